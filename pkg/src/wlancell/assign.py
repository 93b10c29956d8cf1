"""Channel assignment: utilities, learning automata, and greedy baselines.

Assigning each cell one of M channels splits the physical contention graph
into M co-channel subgraphs.  At heavy load a subgraph's aggregate
unblocked share tends to its independence number, so the natural figure of
merit for an assignment is the mean per-cell unblocked share

    U(c) = (1/N) * sum over channels m of alpha(subgraph of channel m),

a number in [0, 1].  `utility_theta_bar` computes it via memoised
independence numbers; `infinite_load_profile` exposes the underlying
per-cell shares (the two agree by construction of the maximum-independent-
set statistics, and the tests cross-check them).

Three assignment strategies are provided:

* `run_lri` -- decentralised linear reward-inaction learning: every cell
  keeps a probability row over channels, samples jointly, and reinforces
  its sampled channel proportionally to the global utility.  Converges to
  pure strategies that are Nash equilibria of the induced game; which one
  depends on the seed and the initial rows.
* `misa` -- a one-shot greedy: channel by channel, peel off a maximal
  independent set of the still-unassigned cells; the last channel absorbs
  the remainder.  Always yields a Nash equilibrium of the heavy-load
  utility, for any admission order.
* `exhaustive_search` -- lexicographic brute force over all M**N
  assignments, with a budget guard.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import BudgetExceededError, ConfigError
from .topology import (ContentionGraph, enumerate_state_space,
                       induced_subgraph, maximal_independent_set)

#: Utility improvements below this are treated as ties when testing for
#: Nash equilibria.
_UTILITY_TIE = 1e-12

_ORDER_POLICIES = ("lexicographic", "random")


@dataclass(frozen=True)
class ChannelAssignment:
    """Channel per cell (entry ``i-1`` for cell ``i``), channels 1..n_channels."""

    channels: tuple[int, ...]
    n_channels: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        if self.n_channels < 1:
            raise ConfigError("need at least one channel")
        bad = [c for c in self.channels if not 1 <= c <= self.n_channels]
        if bad:
            raise ConfigError(
                f"channel labels must lie in 1..{self.n_channels}, got {bad}")

    def classes(self) -> dict[int, tuple[int, ...]]:
        """Cells per channel, 1-based ids, ascending."""
        out: dict[int, list[int]] = {m: [] for m in range(1, self.n_channels + 1)}
        for k, ch in enumerate(self.channels):
            out[ch].append(k + 1)
        return {m: tuple(v) for m, v in out.items()}


@dataclass(frozen=True, eq=False)
class LAState:
    """State of the learning automata: one probability row per cell.

    ``probs`` is an (N, M) row-stochastic matrix, kept read-only; ``step``
    counts updates applied; ``b`` is the learning rate; ``seed`` records
    the stream the run was started from (None for externally driven rngs).
    """

    probs: np.ndarray
    step: int = 0
    b: float = 0.01
    seed: int | None = None

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2:
            raise ConfigError("probs must be a 2-D (cells x channels) matrix")
        if (p < 0).any():
            raise ConfigError("probabilities must be non-negative")
        sums = p.sum(axis=1)
        if not np.allclose(sums, 1.0, atol=1e-9):
            raise ConfigError("each probability row must sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        if not 0.0 < self.b <= 1.0:
            raise ConfigError(f"learning rate must lie in (0, 1], got {self.b}")
        if self.step < 0:
            raise ConfigError("step must be non-negative")


@dataclass(frozen=True)
class LriResult:
    """Outcome of a learning run: final pick, utility trace, and status."""

    assignment: ChannelAssignment
    utility_trace: tuple[float, ...] = field(repr=False)
    converged: bool
    steps: int
    state: LAState = field(repr=False)


@dataclass(frozen=True)
class NashResult:
    """Equilibrium verdict plus every improving unilateral deviation."""

    is_nash: bool
    improving: tuple[tuple[int, int, float], ...]  # (cell, channel, utility)
    utility: float


# Per-graph tables for independence-number queries: closed-neighbourhood
# bitmasks and a memo of subset independence numbers.
_graph_tables: dict[ContentionGraph, tuple[tuple[int, ...], dict[int, int]]] = {}


def _tables(graph: ContentionGraph) -> tuple[tuple[int, ...], dict[int, int]]:
    cached = _graph_tables.get(graph)
    if cached is None:
        idx = {v: k for k, v in enumerate(graph.vertices)}
        closed = []
        for v in graph.vertices:
            mask = 1 << idx[v]
            for u in graph.adjacency[v]:
                mask |= 1 << idx[u]
            closed.append(mask)
        cached = (tuple(closed), {0: 0})
        _graph_tables[graph] = cached
    return cached


def independence_number(graph: ContentionGraph,
                        subset: Sequence[int] | None = None) -> int:
    """Size of a largest independent set within ``subset`` (default: all).

    Memoised branch-and-reduce on bitmasks: either the lowest remaining
    vertex is excluded, or it is taken and its closed neighbourhood drops
    out.  The memo is shared per graph across calls.
    """
    closed, memo = _tables(graph)
    idx = {v: k for k, v in enumerate(graph.vertices)}
    if subset is None:
        mask = (1 << len(graph.vertices)) - 1
    else:
        mask = 0
        for v in subset:
            if v not in idx:
                raise ConfigError(f"vertex {v} not in graph")
            mask |= 1 << idx[v]
    return _alpha(mask, closed, memo)


def _alpha(mask: int, closed: tuple[int, ...], memo: dict[int, int]) -> int:
    known = memo.get(mask)
    if known is not None:
        return known
    low = mask & -mask
    k = low.bit_length() - 1
    skip = _alpha(mask ^ low, closed, memo)
    take = 1 + _alpha(mask & ~closed[k], closed, memo)
    best = max(skip, take)
    memo[mask] = best
    return best


def utility_theta_bar(physical: ContentionGraph,
                      assignment: ChannelAssignment | Sequence[int]) -> float:
    """Mean heavy-load unblocked share of an assignment, in [0, 1].

    Equals the average of `infinite_load_profile` over cells, computed as
    the sum of co-channel independence numbers divided by the cell count
    (each channel's aggregate share tends to its subgraph's independence
    number).
    """
    channels = tuple(getattr(assignment, "channels", assignment))
    if len(channels) != len(physical.vertices):
        raise ConfigError("assignment must cover every cell")
    closed, memo = _tables(physical)
    idx = {v: k for k, v in enumerate(physical.vertices)}
    masks: dict[int, int] = {}
    for v, ch in zip(physical.vertices, channels):
        masks[ch] = masks.get(ch, 0) | (1 << idx[v])
    total = sum(_alpha(m, closed, memo) for m in masks.values())
    return total / len(physical.vertices)


def infinite_load_profile(physical: ContentionGraph,
                          assignment: ChannelAssignment | Sequence[int]
                          ) -> tuple[float, ...]:
    """Per-cell heavy-load unblocked shares under an assignment.

    Each co-channel subgraph contributes its cells' shares of maximum
    independent sets.  Aligned with ``physical.vertices``.
    """
    channels = tuple(getattr(assignment, "channels", assignment))
    if len(channels) != len(physical.vertices):
        raise ConfigError("assignment must cover every cell")
    by_channel: dict[int, list[int]] = {}
    for v, ch in zip(physical.vertices, channels):
        by_channel.setdefault(ch, []).append(v)
    x_by_id: dict[int, float] = {}
    for members in by_channel.values():
        sub = induced_subgraph(physical, members)
        family = enumerate_state_space(sub)
        for v, eta_v in zip(sub.vertices, family.eta_i):
            x_by_id[v] = eta_v / family.eta
    return tuple(x_by_id[v] for v in physical.vertices)


def make_fixed_point_utility(cells, mac, traffic_mode: str = "saturated",
                             ) -> Callable[[ContentionGraph, Sequence[int]], float]:
    """Finite-load utility: mean unblocked share from the full fixed point.

    Far slower than the heavy-load utility (it solves the network model per
    assignment), so it is offered behind an explicit choice.  Imports
    locally to keep this module's dependency on the solver one-way.
    """
    from .multicell import MultiCellProblem, solve_fixed_point

    def utility(physical: ContentionGraph,
                assignment: ChannelAssignment | Sequence[int]) -> float:
        from .topology import logical_graph
        logical = logical_graph(physical, assignment)
        problem = MultiCellProblem(graph=logical, cells=tuple(cells),
                                   mac=mac, traffic_mode=traffic_mode)
        solution = solve_fixed_point(problem)
        return solution.theta_bar / len(physical.vertices)

    return utility


def lri_step(state: LAState, physical: ContentionGraph,
             utility: Callable[[ContentionGraph, Sequence[int]], float],
             rng: np.random.Generator
             ) -> tuple[LAState, ChannelAssignment, float]:
    """One linear reward-inaction update.

    Samples a joint assignment from the rows, evaluates the shared
    utility, and moves each row toward its sampled channel by ``b * U``.
    A utility outside [0, 1] is rejected: the update would no longer be a
    convex combination and rows could leave the simplex.
    """
    p = state.probs
    n, m = p.shape
    cum = np.cumsum(p, axis=1)
    draws = rng.random(n) * cum[:, -1]
    picks = np.minimum((cum < draws[:, None]).sum(axis=1), m - 1)
    assignment = ChannelAssignment(channels=tuple(int(c) + 1 for c in picks),
                                   n_channels=m)
    u = float(utility(physical, assignment))
    if not 0.0 <= u <= 1.0:
        raise ConfigError(f"utility must lie in [0, 1], got {u}")
    updated = p * (1.0 - state.b * u)
    updated[np.arange(n), picks] += state.b * u
    new_state = LAState(probs=updated, step=state.step + 1, b=state.b,
                        seed=state.seed)
    return new_state, assignment, u


def run_lri(physical: ContentionGraph, n_channels: int, b: float, *,
            init: LAState | None = None, max_steps: int = 200_000,
            convergence_threshold: float = 1e-3, seed: int = 0,
            utility: Callable[[ContentionGraph, Sequence[int]], float] | None = None,
            ) -> LriResult:
    """Run reward-inaction learning until the rows are nearly pure.

    Stops once every cell's largest row entry exceeds
    ``1 - convergence_threshold``; the assignment is then the rowwise
    argmax.  If ``max_steps`` elapse first, the best-so-far argmax is
    returned with ``converged=False``.  The default utility is the
    heavy-load `utility_theta_bar`, memoised per sampled assignment.
    """
    n = len(physical.vertices)
    if init is None:
        state = LAState(probs=np.full((n, n_channels), 1.0 / n_channels),
                        b=b, seed=seed)
    else:
        state = LAState(probs=init.probs, step=init.step, b=b, seed=seed)
        if state.probs.shape != (n, n_channels):
            raise ConfigError("init rows do not match the graph and channels")
    base = utility_theta_bar if utility is None else utility
    memo: dict[tuple[int, ...], float] = {}

    def memoised(graph: ContentionGraph, assignment) -> float:
        key = tuple(getattr(assignment, "channels", assignment))
        val = memo.get(key)
        if val is None:
            val = base(graph, assignment)
            memo[key] = val
        return val

    rng = np.random.default_rng(seed)
    trace: list[float] = []
    converged = False
    for _ in range(max_steps):
        state, _, u = lri_step(state, physical, memoised, rng)
        trace.append(u)
        if state.probs.max(axis=1).min() > 1.0 - convergence_threshold:
            converged = True
            break
    channels = tuple(int(c) + 1 for c in state.probs.argmax(axis=1))
    return LriResult(
        assignment=ChannelAssignment(channels=channels, n_channels=n_channels),
        utility_trace=tuple(trace), converged=converged, steps=state.step,
        state=state)


def misa(physical: ContentionGraph, n_channels: int,
         order_policy: str = "lexicographic",
         seed: int | None = None) -> ChannelAssignment:
    """Greedy channel peeling via maximal independent sets.

    Channels ``1..M-1`` each take a maximal independent set of the cells
    still unassigned (admitted in ascending id order, or in a seeded random
    order); channel ``M`` takes whatever remains.  The result is always a
    Nash equilibrium of the heavy-load utility.
    """
    if n_channels < 1:
        raise ConfigError("need at least one channel")
    if order_policy not in _ORDER_POLICIES:
        raise ConfigError(f"order_policy must be one of {_ORDER_POLICIES}")
    rng = np.random.default_rng(seed) if order_policy == "random" else None
    remaining = list(physical.vertices)
    channel_of: dict[int, int] = {}
    for ch in range(1, n_channels):
        if not remaining:
            break
        sub = induced_subgraph(physical, remaining)
        if rng is None:
            order = sub.vertices
        else:
            order = tuple(int(v) for v in rng.permutation(sub.vertices))
        chosen = maximal_independent_set(sub, order)
        for v in chosen:
            channel_of[v] = ch
        remaining = [v for v in remaining if v not in chosen]
    for v in remaining:
        channel_of[v] = n_channels
    channels = tuple(channel_of[v] for v in physical.vertices)
    return ChannelAssignment(channels=channels, n_channels=n_channels)


def is_nash_equilibrium(physical: ContentionGraph,
                        assignment: ChannelAssignment,
                        utility: Callable[[ContentionGraph, Sequence[int]], float]
                        | None = None) -> NashResult:
    """Check all single-cell channel deviations for a utility improvement.

    A deviation counts as improving only when it beats the current utility
    by more than a tie tolerance, so flat regions still count as equilibria.
    """
    base = utility_theta_bar if utility is None else utility
    u0 = base(physical, assignment)
    improving = []
    channels = list(assignment.channels)
    for k in range(len(channels)):
        original = channels[k]
        for ch in range(1, assignment.n_channels + 1):
            if ch == original:
                continue
            channels[k] = ch
            u = base(physical, tuple(channels))
            if u > u0 + _UTILITY_TIE:
                improving.append((k + 1, ch, u))
        channels[k] = original
    return NashResult(is_nash=not improving, improving=tuple(improving),
                      utility=u0)


def exhaustive_search(physical: ContentionGraph, n_channels: int,
                      utility: Callable[[ContentionGraph, Sequence[int]], float]
                      | None = None,
                      budget: int = 2_000_000
                      ) -> tuple[ChannelAssignment, float]:
    """Best assignment over all ``n_channels ** N`` candidates.

    Candidates are scanned in lexicographic order and ties keep the first,
    so the result is deterministic.  Exceeding ``budget`` candidates raises
    BudgetExceededError before any work is done.
    """
    n = len(physical.vertices)
    total = n_channels ** n
    if total > budget:
        raise BudgetExceededError(
            f"{total} assignments exceed the search budget of {budget}")
    best_channels: tuple[int, ...] | None = None
    best_u = -math.inf
    if utility is None:
        closed, memo = _tables(physical)
        bits = [1 << k for k in range(n)]
        for cand in itertools.product(range(1, n_channels + 1), repeat=n):
            masks: dict[int, int] = {}
            for k, ch in enumerate(cand):
                masks[ch] = masks.get(ch, 0) | bits[k]
            u = sum(_alpha(m, closed, memo) for m in masks.values()) / n
            if u > best_u:
                best_u = u
                best_channels = cand
    else:
        for cand in itertools.product(range(1, n_channels + 1), repeat=n):
            u = float(utility(physical, cand))
            if u > best_u:
                best_u = u
                best_channels = cand
    assert best_channels is not None
    return (ChannelAssignment(channels=best_channels, n_channels=n_channels),
            best_u)
