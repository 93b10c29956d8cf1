"""Cells, contention graphs, and their independent-set state spaces.

A deployment is a set of cells (access point plus stations).  Two cells
contend when they are within carrier-sense range, which defines the
*physical* contention graph; assigning channels keeps only the edges
between co-channel cells, giving a *logical* graph.  Because carrier
sensing blocks a cell whenever any neighbour transmits, the set of cells
transmitting simultaneously is always an independent set of the logical
graph, so the reachable channel states are exactly the independent sets.

This module enumerates that state space and, for each state, splits the
remaining cells into blocked ones (some neighbour is active) and cells
counting down backoff.  It also records the maximum independent sets,
which govern the heavy-load behaviour: under ever-growing payloads the
network spends all its time in maximum independent sets, so a cell's
long-run share is tied to how many of them it belongs to.

Cells are identified by 1-based ids throughout.  Graphs are immutable;
subgraph views keep the original ids so results can be mapped back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import dist
from typing import Iterable, Mapping, Sequence

from .errors import BudgetExceededError, ConfigError

_GRAPH_KINDS = ("physical", "logical")


@dataclass(frozen=True)
class CellSpec:
    """One cell: its id, station count, and optional planar position (meters)."""

    id: int
    n_nodes: int = 1
    position: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ConfigError(f"cell ids are 1-based, got {self.id}")
        if self.n_nodes < 1:
            raise ConfigError(
                f"cell {self.id} needs at least one station, got {self.n_nodes}")
        if self.position is not None:
            object.__setattr__(self, "position", tuple(float(c) for c in self.position))
            if len(self.position) != 2:
                raise ConfigError(f"cell {self.id} position must be 2-D")


@dataclass(frozen=True)
class ContentionGraph:
    """Undirected graph on cell ids, possibly restricted to a vertex subset.

    ``vertices`` defaults to all of ``1..n_cells``; subgraphs keep original
    ids.  Edges are stored as sorted pairs and validated against the vertex
    set.  ``kind`` records whether edges mean carrier-sense proximity
    ("physical") or co-channel contention ("logical").
    """

    n_cells: int
    edges: frozenset[tuple[int, int]]
    kind: str = "physical"
    vertices: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.n_cells < 1:
            raise ConfigError(f"need at least one cell, got {self.n_cells}")
        if self.kind not in _GRAPH_KINDS:
            raise ConfigError(f"graph kind must be one of {_GRAPH_KINDS}")
        if self.vertices is None:
            verts = tuple(range(1, self.n_cells + 1))
        else:
            verts = tuple(sorted(set(self.vertices)))
        object.__setattr__(self, "vertices", verts)
        vset = set(verts)
        if not vset <= set(range(1, self.n_cells + 1)):
            raise ConfigError("vertices must be cell ids within 1..n_cells")
        norm = set()
        for e in self.edges:
            i, j = e
            if i == j:
                raise ConfigError(f"self-loop on cell {i}")
            if i not in vset or j not in vset:
                raise ConfigError(f"edge {e} leaves the vertex set")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    @cached_property
    def adjacency(self) -> Mapping[int, frozenset[int]]:
        nbrs: dict[int, set[int]] = {v: set() for v in self.vertices}
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return {v: frozenset(s) for v, s in nbrs.items()}

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def degree(self) -> int:
        """Maximum vertex degree (0 for an edgeless graph)."""
        return max((len(s) for s in self.adjacency.values()), default=0)


@dataclass(frozen=True)
class IndependentSetFamily:
    """All independent sets of a graph, with per-state cell partitions.

    ``states`` lists every independent set, the empty set first, in a
    deterministic (size, then lexicographic) order.  For each state the
    non-members split into ``blocked`` (at least one active neighbour) and
    ``in_backoff`` (free to start transmitting).  ``mis_list`` holds the
    maximum independent sets; ``alpha`` is their common size, ``eta`` how
    many there are, and ``eta_i`` how many contain each vertex, aligned
    with ``graph.vertices``.
    """

    graph: ContentionGraph
    states: tuple[frozenset[int], ...]
    blocked: Mapping[frozenset[int], frozenset[int]] = field(repr=False)
    in_backoff: Mapping[frozenset[int], frozenset[int]] = field(repr=False)
    mis_list: tuple[frozenset[int], ...]
    alpha: int
    eta: int
    eta_i: tuple[int, ...]


def build_physical_graph(cells: Sequence[CellSpec], r_cs: float) -> ContentionGraph:
    """Physical contention graph: an edge wherever cells sit within ``r_cs``.

    Every cell must carry a position; raises ConfigError otherwise.
    """
    if r_cs <= 0:
        raise ConfigError(f"carrier-sense range must be positive, got {r_cs}")
    for c in cells:
        if c.position is None:
            raise ConfigError(
                f"cell {c.id} has no position; geometry unavailable")
    edges = set()
    for a_idx, a in enumerate(cells):
        for b in cells[a_idx + 1:]:
            if dist(a.position, b.position) <= r_cs:
                edges.add((min(a.id, b.id), max(a.id, b.id)))
    return ContentionGraph(n_cells=len(cells), edges=frozenset(edges),
                           kind="physical")


def logical_graph(physical: ContentionGraph,
                  assignment: Sequence[int]) -> ContentionGraph:
    """Keep only edges between co-channel cells.

    ``assignment`` is indexed by cell id (entry ``i-1`` for cell ``i``);
    anything with a ``channels`` attribute (e.g. a ChannelAssignment) is
    accepted too.
    """
    channels = tuple(getattr(assignment, "channels", assignment))
    if len(channels) != physical.n_cells:
        raise ConfigError(
            f"assignment covers {len(channels)} cells, graph has "
            f"{physical.n_cells}")
    kept = frozenset((i, j) for i, j in physical.edges
                     if channels[i - 1] == channels[j - 1])
    return ContentionGraph(n_cells=physical.n_cells, edges=kept,
                           kind="logical", vertices=physical.vertices)


def enumerate_state_space(graph: ContentionGraph, *,
                          max_cells: int = 25,
                          max_states: int = 10_000_000) -> IndependentSetFamily:
    """Enumerate every independent set of ``graph`` and classify each state.

    Depth-first over vertices in sorted order.  Budgets guard against
    exponential blow-up: exceeding ``max_cells`` vertices or ``max_states``
    discovered states raises BudgetExceededError.
    """
    verts = graph.vertices
    if len(verts) > max_cells:
        raise BudgetExceededError(
            f"{len(verts)} cells exceeds the enumeration budget of "
            f"{max_cells}; raise max_cells explicitly if this is intended")
    adj = graph.adjacency
    states: list[frozenset[int]] = []

    def extend(start: int, current: tuple[int, ...]) -> None:
        states.append(frozenset(current))
        if len(states) > max_states:
            raise BudgetExceededError(
                f"independent-set count exceeds max_states={max_states}")
        for k in range(start, len(verts)):
            v = verts[k]
            if not any(u in adj[v] for u in current):
                extend(k + 1, current + (v,))

    extend(0, ())
    states.sort(key=lambda s: (len(s), tuple(sorted(s))))

    vset = set(verts)
    blocked: dict[frozenset[int], frozenset[int]] = {}
    in_backoff: dict[frozenset[int], frozenset[int]] = {}
    for state in states:
        blk = frozenset(v for v in vset - state if adj[v] & state)
        blocked[state] = blk
        in_backoff[state] = frozenset(vset - state - blk)

    alpha = max(len(s) for s in states)
    mis_list = tuple(s for s in states if len(s) == alpha)
    eta = len(mis_list)
    eta_i = tuple(sum(1 for s in mis_list if v in s) for v in verts)
    return IndependentSetFamily(graph=graph, states=tuple(states),
                                blocked=blocked, in_backoff=in_backoff,
                                mis_list=mis_list, alpha=alpha, eta=eta,
                                eta_i=eta_i)


def induced_subgraph(graph: ContentionGraph,
                     vertices: Iterable[int]) -> ContentionGraph:
    """Subgraph induced on ``vertices``, keeping original ids."""
    kept = tuple(sorted(set(vertices)))
    missing = set(kept) - set(graph.vertices)
    if missing:
        raise ConfigError(f"vertices {sorted(missing)} not in graph")
    kset = set(kept)
    edges = frozenset(e for e in graph.edges
                      if e[0] in kset and e[1] in kset)
    return ContentionGraph(n_cells=graph.n_cells, edges=edges,
                           kind=graph.kind, vertices=kept)


def closed_neighborhood_subgraph(graph: ContentionGraph, v: int) -> ContentionGraph:
    """Induced subgraph after deleting ``v`` and all its neighbours.

    Remaining vertices keep their original ids.
    """
    if v not in graph.adjacency:
        raise ConfigError(f"vertex {v} not in graph")
    removed = {v} | set(graph.adjacency[v])
    kept = tuple(u for u in graph.vertices if u not in removed)
    edges = frozenset(e for e in graph.edges
                      if e[0] not in removed and e[1] not in removed)
    return ContentionGraph(n_cells=graph.n_cells, edges=edges,
                           kind=graph.kind, vertices=kept)


def maximal_independent_set(graph: ContentionGraph,
                            order: Sequence[int] | None = None) -> frozenset[int]:
    """Greedy maximal independent set, admitting vertices in ``order``.

    The default order is ascending id.  ``order`` must be a permutation of
    the graph's vertices.
    """
    if order is None:
        order = graph.vertices
    else:
        order = tuple(order)
        if sorted(order) != list(graph.vertices):
            raise ConfigError("order must be a permutation of the vertices")
    adj = graph.adjacency
    chosen: set[int] = set()
    for v in order:
        if not adj[v] & chosen:
            chosen.add(v)
    return frozenset(chosen)


@dataclass(frozen=True)
class ParsedTopology:
    """A topology file, decoded: cells, physical graph, and extras."""

    cells: tuple[CellSpec, ...]
    graph: ContentionGraph
    n_channels: int | None
    mac: Mapping | None
    name: str


def parse_topology(raw: Mapping) -> ParsedTopology:
    """Decode the JSON topology schema into typed objects.

    Schema: ``{"name"?, "cells": [{"id", "n_nodes"?, "x"?, "y"?}, ...],
    "edges"?: [[i, j], ...], "r_cs"?, "channels"?, "mac"?: {...}}``.
    Explicit edges win over geometry; with no edge list, positions plus
    ``r_cs`` are required (except for a single-cell topology).
    """
    if not isinstance(raw, Mapping):
        raise ConfigError("topology must be a JSON object")
    raw_cells = raw.get("cells")
    if not raw_cells:
        raise ConfigError("topology has no cells")
    cells = []
    for rc in raw_cells:
        pos = None
        if "x" in rc or "y" in rc:
            if "x" not in rc or "y" not in rc:
                raise ConfigError(f"cell {rc.get('id')} has a partial position")
            pos = (rc["x"], rc["y"])
        try:
            cells.append(CellSpec(id=int(rc["id"]),
                                  n_nodes=int(rc.get("n_nodes", 1)),
                                  position=pos))
        except KeyError as exc:
            raise ConfigError(f"cell entry missing {exc}") from exc
    cells.sort(key=lambda c: c.id)
    ids = [c.id for c in cells]
    if ids != list(range(1, len(cells) + 1)):
        raise ConfigError(f"cell ids must be contiguous from 1, got {ids}")

    if "edges" in raw:
        edge_list: Iterable = raw["edges"]
        edges = frozenset((min(int(i), int(j)), max(int(i), int(j)))
                          for i, j in edge_list)
        graph = ContentionGraph(n_cells=len(cells), edges=edges,
                                kind="physical")
    elif "r_cs" in raw:
        graph = build_physical_graph(cells, float(raw["r_cs"]))
    elif len(cells) == 1:
        graph = ContentionGraph(n_cells=1, edges=frozenset(), kind="physical")
    else:
        raise ConfigError(
            "topology needs either an explicit edge list or r_cs geometry")

    n_channels = int(raw["channels"]) if "channels" in raw else None
    if n_channels is not None and n_channels < 1:
        raise ConfigError(f"channels must be positive, got {n_channels}")
    mac = raw.get("mac")
    if mac is not None and not isinstance(mac, Mapping):
        raise ConfigError("mac section must be an object")
    return ParsedTopology(cells=tuple(cells), graph=graph,
                          n_channels=n_channels, mac=mac,
                          name=str(raw.get("name", "topology")))
