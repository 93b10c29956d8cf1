"""Coupled fixed point for a network of contending cells.

The single-cell model (`wlancell.dcf`) treats collisions as purely local.
In a multi-cell network a cell also loses frames to hidden or co-channel
activity from *neighbouring* cells, and carrier sensing blocks it outright
while a neighbour holds the channel.  Both effects depend on how often each
neighbourhood is busy, which in turn depends on every cell's own attempt
rate, so the network is solved as one fixed point:

1. Given per-cell attempt probabilities ``beta``, each cell starts channel
   occupations at rate ``lambda_i`` (some station wins an idle slot) and
   holds the channel for mean time ``1/mu_i`` (success or collision
   duration, weighted by the success odds among its own stations).
2. The set of simultaneously transmitting cells wanders over the
   independent sets of the contention graph.  The long-run distribution of
   that process is product-form: the probability of a state is
   proportional to the product of the occupation ratios ``rho_i =
   lambda_i / mu_i`` of its members.  It satisfies detailed balance and is
   insensitive to the shape of the holding-time distribution.
3. From that distribution each cell reads off its conditional collision
   probability ``gamma_i`` (averaging over the states where it is actually
   counting down backoff, since those are the only moments it can attempt)
   and maps it back to a fresh ``beta_i``.

Damped iteration of (1)-(3) converges to the operating point.  The
fraction of time a cell is *not* blocked, ``x_i``, scales its standalone
throughput into its networked throughput.  ``x_i`` also has a closed form
in terms of two independent-set partition sums (one for the whole graph,
one with the cell's closed neighbourhood removed); both routes are
implemented and agree to near machine precision, which makes a handy
self-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from . import dcf
from .errors import ConfigError, ConvergenceError
from .topology import (CellSpec, ContentionGraph, IndependentSetFamily,
                       closed_neighborhood_subgraph, enumerate_state_space)

_TRAFFIC_MODES = ("saturated", "tcp_download")

#: Below this much stationary probability of ever being in backoff, a cell
#: is reported as starved and its collision probability pinned to 1.
STARVATION_FLOOR = 1e-300

#: Fixed column order of per-cell result tables (CSV and markdown).
#: ``theta_cell`` is aggregate packets/s for the cell, ``theta_node`` is
#: per station (in tcp_download mode: the AP downlink rate).  ``x_inf``
#: and ``theta_node_inf`` are the heavy-load limits of ``x`` and
#: ``theta_node``.
CSV_COLUMNS = ("id", "n_nodes", "beta", "gamma", "x", "theta_cell",
               "theta_node", "x_inf", "theta_node_inf")


@dataclass(frozen=True)
class MultiCellProblem:
    """A contention graph, its cells, MAC timing, and the traffic model.

    ``graph`` should be the logical (co-channel) graph; pass the physical
    graph unchanged for a single-channel deployment.  ``tcp_download``
    replaces each cell with its two-contender saturated equivalent before
    solving (see `wlancell.dcf.tcp_equivalent_cell`).
    """

    graph: ContentionGraph
    cells: tuple[CellSpec, ...]
    mac: dcf.MacParams = field(default_factory=dcf.MacParams)
    traffic_mode: str = "saturated"

    def __post_init__(self) -> None:
        object.__setattr__(self, "cells", tuple(self.cells))
        if self.traffic_mode not in _TRAFFIC_MODES:
            raise ConfigError(
                f"traffic_mode must be one of {_TRAFFIC_MODES}")
        ids = [c.id for c in self.cells]
        if ids != list(range(1, len(self.cells) + 1)):
            raise ConfigError("cells must be sorted with contiguous ids from 1")
        if self.graph.n_cells != len(self.cells):
            raise ConfigError(
                f"graph has {self.graph.n_cells} cells, got "
                f"{len(self.cells)} cell specs")
        if self.graph.vertices != tuple(range(1, len(self.cells) + 1)):
            raise ConfigError("problem graph must cover every cell id")


@dataclass(frozen=True)
class FixedPointSolution:
    """Converged operating point of a multi-cell problem.

    All per-cell tuples are aligned with cell ids 1..N.  ``pi`` maps each
    independent set (frozenset of cell ids) to its stationary probability.
    ``x`` is the fraction of time a cell is active or in backoff (i.e. not
    blocked by a neighbour); ``theta_cell`` multiplies the standalone cell
    throughput by ``x``.  ``starved`` marks cells whose backoff occupancy
    fell below the starvation floor, for which ``gamma`` is pinned to 1.
    """

    beta: tuple[float, ...]
    gamma: tuple[float, ...]
    lam: tuple[float, ...]
    mu_inv: tuple[float, ...]
    rho: tuple[float, ...]
    pi: Mapping[frozenset[int], float]
    x: tuple[float, ...]
    theta_cell: tuple[float, ...]
    theta_node: tuple[float, ...]
    theta_bar: float
    iterations: int
    residual: float
    starved: tuple[bool, ...]
    family: IndependentSetFamily = field(repr=False)


def effective_configuration(problem: MultiCellProblem
                            ) -> tuple[tuple[CellSpec, ...], dcf.MacParams]:
    """Cells and MAC parameters actually solved, after traffic-mode rewriting."""
    if problem.traffic_mode == "saturated":
        return problem.cells, problem.mac
    n_eff, mac_eff = dcf.tcp_equivalent_cell(problem.mac)
    cells = tuple(replace(c, n_nodes=n_eff) for c in problem.cells)
    return cells, mac_eff


def activation_rate(beta: float, n_nodes: int, slot_time: float) -> float:
    """Rate (1/s) at which an unblocked cell starts a channel occupation.

    Per idle slot, the cell grabs the channel when at least one of its
    ``n_nodes`` stations attempts.
    """
    if n_nodes < 1:
        raise ConfigError(f"need at least one station, got {n_nodes}")
    return (1.0 - (1.0 - beta) ** n_nodes) / slot_time


def mean_active_duration(beta: float, n_nodes: int,
                         t_success: float, t_collision: float) -> float:
    """Mean length (s) of one channel occupation by a cell.

    The occupation is a success when exactly one of the cell's stations
    attempted, a collision otherwise.  At ``beta == 0`` occupations are
    vanishingly rare but all successful, so the mean is ``t_success``.
    """
    if n_nodes < 1:
        raise ConfigError(f"need at least one station, got {n_nodes}")
    if beta == 0.0:
        return t_success
    p_any = 1.0 - (1.0 - beta) ** n_nodes
    p_succ = n_nodes * beta * (1.0 - beta) ** (n_nodes - 1) / p_any
    return p_succ * t_success + (1.0 - p_succ) * t_collision


def stationary_distribution(family: IndependentSetFamily,
                            rho: Sequence[float]
                            ) -> dict[frozenset[int], float]:
    """Product-form stationary law over the independent-set states.

    Each state's weight is the product of its members' occupation ratios;
    weights are normalised with compensated summation.  ``rho`` is aligned
    with ``family.graph.vertices``.
    """
    verts = family.graph.vertices
    if len(rho) != len(verts):
        raise ConfigError("rho must align with the graph vertices")
    if any(r < 0 for r in rho):
        raise ConfigError("occupation ratios must be non-negative")
    rho_by_id = dict(zip(verts, rho))
    weights = [math.prod(rho_by_id[v] for v in state) for state in family.states]
    z = math.fsum(weights)
    return {state: w / z for state, w in zip(family.states, weights)}


def collision_probabilities(family: IndependentSetFamily,
                            pi: Mapping[frozenset[int], float],
                            beta: Sequence[float],
                            cells: Sequence[CellSpec]
                            ) -> tuple[tuple[float, ...], tuple[bool, ...]]:
    """Per-cell conditional collision probability, plus starvation flags.

    Conditioned on the cell being in backoff, an attempt collides unless
    every other station in the cell stays quiet *and* every neighbouring
    cell that is also in backoff stays quiet for that slot.  Cells whose
    probability of ever being in backoff is below the starvation floor get
    ``gamma = 1`` and a True flag.
    """
    verts = family.graph.vertices
    adj = family.graph.adjacency
    n_by_id = {c.id: c.n_nodes for c in cells}
    beta_by_id = dict(zip(verts, beta))
    gammas = []
    starved = []
    for v in verts:
        num_terms = []
        den_terms = []
        b_v = beta_by_id[v]
        silent_own = (1.0 - b_v) ** (n_by_id[v] - 1)
        for state in family.states:
            free = family.in_backoff[state]
            if v not in free:
                continue
            p = pi[state]
            silent_nbrs = math.prod(
                (1.0 - beta_by_id[j]) ** n_by_id[j]
                for j in adj[v] & free)
            num_terms.append(p * (1.0 - silent_own * silent_nbrs))
            den_terms.append(p)
        den = math.fsum(den_terms)
        if den < STARVATION_FLOOR:
            gammas.append(1.0)
            starved.append(True)
        else:
            gammas.append(math.fsum(num_terms) / den)
            starved.append(False)
    return tuple(gammas), tuple(starved)


def unblocked_fractions_direct(family: IndependentSetFamily,
                               pi: Mapping[frozenset[int], float]
                               ) -> tuple[float, ...]:
    """Fraction of time each cell is active or in backoff, from ``pi``."""
    verts = family.graph.vertices
    out = []
    for v in verts:
        out.append(math.fsum(
            pi[state] for state in family.states
            if v in state or v in family.in_backoff[state]))
    return tuple(out)


def _partition_sum(graph: ContentionGraph,
                   rho_by_id: Mapping[int, float]) -> float:
    """Sum over all independent sets of the product of member ratios."""
    family = enumerate_state_space(graph)
    return math.fsum(
        math.prod(rho_by_id[v] for v in state) for state in family.states)


def unblocked_fractions_theorem1(graph: ContentionGraph,
                                 rho: Sequence[float]) -> tuple[float, ...]:
    """Closed-form unblocked fractions from partition-sum ratios.

    ``x_i = (1 + rho_i) * Z_i / Z`` where ``Z`` sums independent-set
    weights over the whole graph and ``Z_i`` over the graph with cell
    ``i``'s closed neighbourhood deleted.  Agrees with the direct
    occupancy sum to near machine precision; kept separate as an
    independent route for validation.
    """
    verts = graph.vertices
    if len(rho) != len(verts):
        raise ConfigError("rho must align with the graph vertices")
    rho_by_id = dict(zip(verts, rho))
    z_full = _partition_sum(graph, rho_by_id)
    out = []
    for v in verts:
        sub = closed_neighborhood_subgraph(graph, v)
        z_v = _partition_sum(sub, rho_by_id)
        out.append((1.0 + rho_by_id[v]) * z_v / z_full)
    return tuple(out)


def cell_throughputs(x: Sequence[float], cells: Sequence[CellSpec],
                     mac: dcf.MacParams
                     ) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Scale standalone cell throughputs by the unblocked fractions.

    Returns ``(theta_cell, theta_node)`` in packets per second; the
    per-node figure divides by the cell's station count.
    """
    cache: dict[int, float] = {}
    theta_cell = []
    theta_node = []
    for xi, cell in zip(x, cells):
        n = cell.n_nodes
        if n not in cache:
            cache[n] = dcf.single_cell_throughput(n, mac)
        agg = xi * cache[n]
        theta_cell.append(agg)
        theta_node.append(agg / n)
    return tuple(theta_cell), tuple(theta_node)


def large_rho_limits(family: IndependentSetFamily
                     ) -> tuple[tuple[float, ...], float]:
    """Heavy-load limits: per-cell unblocked fractions and their sum.

    As occupation ratios grow without bound the stationary law
    concentrates on the maximum independent sets, so each cell's unblocked
    fraction tends to the share of maximum independent sets containing it,
    and the network-wide sum tends to the independence number.
    """
    x_inf = tuple(ei / family.eta for ei in family.eta_i)
    return x_inf, float(family.alpha)


def jain_fairness(x: Sequence[float]) -> float:
    """Jain's fairness index of a non-negative allocation.

    ``(sum x)**2 / (N * sum x**2)``; 1 means perfectly even.  The all-zero
    allocation is degenerate and reported as 1 by convention.
    """
    if not x:
        raise ConfigError("empty allocation")
    square_sum = math.fsum(v * v for v in x)
    if square_sum == 0.0:
        return 1.0
    total = math.fsum(x)
    return total * total / (len(x) * square_sum)


def solve_fixed_point(problem: MultiCellProblem, *,
                      damping: float = 0.5, tol: float = 1e-10,
                      max_iter: int = 10_000) -> FixedPointSolution:
    """Solve the coupled attempt/collision fixed point for a network.

    Damped iteration on the per-cell attempt probabilities, started from
    the collision-free value.  Stops when the largest per-cell update
    falls below ``tol``; raises ConvergenceError (with residual and the
    tail of the iterate history) otherwise.
    """
    if not 0.0 < damping <= 1.0:
        raise ConfigError(f"damping must lie in (0, 1], got {damping}")
    cells, mac = effective_configuration(problem)
    family = enumerate_state_space(problem.graph)
    t_success, t_collision = dcf.frame_durations(mac)
    sigma = mac.slot_time
    n_nodes = [c.n_nodes for c in cells]

    def rates(beta: Sequence[float]):
        lam = tuple(activation_rate(b, n, sigma)
                    for b, n in zip(beta, n_nodes))
        mu_inv = tuple(mean_active_duration(b, n, t_success, t_collision)
                       for b, n in zip(beta, n_nodes))
        rho = tuple(l * m for l, m in zip(lam, mu_inv))
        return lam, mu_inv, rho

    beta = tuple(dcf.attempt_prob_G(0.0, mac) for _ in cells)
    history: list[tuple[float, ...]] = []
    residual = float("inf")
    converged_at = None
    for iteration in range(1, max_iter + 1):
        _, _, rho = rates(beta)
        pi = stationary_distribution(family, rho)
        gamma, _ = collision_probabilities(family, pi, beta, cells)
        target = tuple(dcf.attempt_prob_G(g, mac) for g in gamma)
        beta_next = tuple((1.0 - damping) * b + damping * t
                          for b, t in zip(beta, target))
        residual = max(abs(bn - b) for bn, b in zip(beta_next, beta))
        beta = beta_next
        history.append(beta)
        if residual < tol:
            converged_at = iteration
            break
    if converged_at is None:
        raise ConvergenceError(
            "multi-cell fixed point did not converge within "
            f"{max_iter} iterations",
            residual=residual, iterations=max_iter, history=history[-10:])

    lam, mu_inv, rho = rates(beta)
    pi = stationary_distribution(family, rho)
    gamma, starved = collision_probabilities(family, pi, beta, cells)
    x = unblocked_fractions_direct(family, pi)
    theta_cell, theta_node = cell_throughputs(x, cells, mac)
    return FixedPointSolution(
        beta=beta, gamma=gamma, lam=lam, mu_inv=mu_inv, rho=rho, pi=pi,
        x=x, theta_cell=theta_cell, theta_node=theta_node,
        theta_bar=math.fsum(x), iterations=converged_at, residual=residual,
        starved=starved, family=family)


def solution_rows(problem: MultiCellProblem,
                  solution: FixedPointSolution) -> list[dict]:
    """Per-cell result rows in `CSV_COLUMNS` order (as a list of dicts)."""
    cells, mac = effective_configuration(problem)
    x_inf, _ = large_rho_limits(solution.family)
    cache: dict[int, float] = {}
    rows = []
    for k, cell in enumerate(cells):
        n = cell.n_nodes
        if n not in cache:
            cache[n] = dcf.single_cell_throughput(n, mac) / n
        rows.append({
            "id": cell.id,
            "n_nodes": n,
            "beta": solution.beta[k],
            "gamma": solution.gamma[k],
            "x": solution.x[k],
            "theta_cell": solution.theta_cell[k],
            "theta_node": solution.theta_node[k],
            "x_inf": x_inf[k],
            "theta_node_inf": x_inf[k] * cache[n],
        })
    return rows


def solution_summary(solution: FixedPointSolution) -> dict:
    """Network-level scalars: total unblocked share, fairness, MIS stats."""
    return {
        "theta_bar": solution.theta_bar,
        "jain_fairness": jain_fairness(solution.x),
        "alpha": solution.family.alpha,
        "eta": solution.family.eta,
        "iterations": solution.iterations,
        "residual": solution.residual,
        "n_starved": sum(solution.starved),
    }
