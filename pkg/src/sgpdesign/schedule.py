"""Broadcast slot scheduling under half-duplex and interference constraints.

Links ``(i, j)`` and ``(k, l)`` may share a slot only if neither endpoint is
both transmitting and receiving (``i != l`` and ``j != k``) and, for distinct
transmitters, neither receiver hears the other transmitter (``{i, l}`` and
``{k, j}`` are not interference edges). Links from the same transmitter are one
broadcast and never conflict.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import NonCompliantLink, TooLarge
from .graphs import BaseTopology, Digraph, Edge, Graph, max_degrees


def _interference_matrix(base) -> np.ndarray:
    if isinstance(base, np.ndarray):
        return base.astype(bool)
    return base.adjacency_matrix()


def conflicts(link1: Edge, link2: Edge, base) -> bool:
    """Whether two distinct directed links cannot be scheduled in one slot."""
    i, j = link1
    k, l = link2
    if i == l or j == k:
        return True
    if i == k:
        return False
    g = base.undirected if isinstance(base, BaseTopology) else base
    # a node receives from one neighbor per slot, even if the interference
    # graph does not list the receiving link itself
    return j == l or g.has_edge(i, l) or g.has_edge(k, j)


def conflict_matrix(links, interference: np.ndarray) -> np.ndarray:
    """Pairwise conflict relation over ``links`` as a symmetric boolean matrix."""
    if len(links) == 0:
        return np.zeros((0, 0), dtype=bool)
    e = np.asarray(links)
    tx, rx = e[:, 0], e[:, 1]
    same_tx = tx[:, None] == tx[None, :]
    half_duplex = (tx[:, None] == rx[None, :]) | (rx[:, None] == tx[None, :])
    heard = (
        interference[tx[:, None], rx[None, :]]
        | interference[tx[None, :], rx[:, None]]
        | (rx[:, None] == rx[None, :])
    )
    m = half_duplex | (~same_tx & heard)
    np.fill_diagonal(m, False)
    return m


@dataclass(frozen=True, eq=False)
class ConflictGraph:
    links: tuple[Edge, ...]
    adj: np.ndarray

    def __len__(self):
        return len(self.links)

    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if len(self.links) else 0

    def neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.adj[v])

    @property
    def num_conflicts(self) -> int:
        return int(self.adj.sum()) // 2

    @classmethod
    def from_edges(cls, num_vertices: int, edges) -> "ConflictGraph":
        """Abstract conflict graph (vertices labelled ``(v, v)``), used by oracles."""
        adj = np.zeros((num_vertices, num_vertices), dtype=bool)
        for u, v in edges:
            if u != v:
                adj[u, v] = adj[v, u] = True
        return cls(tuple((v, v) for v in range(num_vertices)), adj)


def build_conflict_graph(g_a: Digraph, base: BaseTopology, interference: Graph | None = None) -> ConflictGraph:
    bad = [e for e in g_a.links if not base.has_link(*e)]
    if bad:
        raise NonCompliantLink(f"links not in the base topology: {bad[:5]}")
    imat = _interference_matrix(interference if interference is not None else base)
    return ConflictGraph(g_a.links, conflict_matrix(g_a.links, imat))


@dataclass(frozen=True)
class Schedule:
    """Ordered slots; slot ``s`` (1-based in exports) holds links sent together."""

    slots: tuple[tuple[Edge, ...], ...]

    @property
    def tau(self) -> int:
        return len(self.slots)

    def links(self) -> list[Edge]:
        return [e for s in self.slots for e in s]

    def to_json(self) -> str:
        return json.dumps([[list(e) for e in s] for s in self.slots])

    @classmethod
    def from_json(cls, text: str) -> "Schedule":
        return cls(tuple(tuple(tuple(e) for e in s) for s in json.loads(text)))


def greedy_color(cg: ConflictGraph) -> Schedule:
    """Greedy coloring in descending conflict degree, ties by link order."""
    m = len(cg.links)
    if m == 0:
        return Schedule(())
    deg = cg.degrees()
    order = sorted(range(m), key=lambda v: (-deg[v], cg.links[v]))
    color = np.full(m, -1)
    for v in order:
        used = color[cg.adj[v] & (color >= 0)]
        c = 0
        if used.size:
            taken = np.zeros(used.max() + 2, dtype=bool)
            taken[used] = True
            c = int(np.argmin(taken))
        color[v] = c
    slots = []
    for c in range(color.max() + 1):
        slots.append(tuple(sorted(cg.links[v] for v in np.flatnonzero(color == c))))
    return Schedule(tuple(slots))


def brute_force_chromatic(cg: ConflictGraph, limit: int = 14) -> int:
    """Exact chromatic number by exhaustive k-coloring, k ascending."""
    m = len(cg.links)
    if m > limit:
        raise TooLarge(f"{m} vertices exceeds the exhaustive-search limit of {limit}")
    if m == 0:
        return 0
    order = sorted(range(m), key=lambda v: -int(cg.adj[v].sum()))
    nbrs = [np.flatnonzero(cg.adj[v]).tolist() for v in range(m)]

    def colorable(k):
        color = [-1] * m

        def place(idx, used):
            if idx == m:
                return True
            v = order[idx]
            blocked = {color[w] for w in nbrs[v]}
            # colors beyond used+1 are symmetric relabellings
            for c in range(min(k, used + 1)):
                if c not in blocked:
                    color[v] = c
                    if place(idx + 1, max(used, c + 1)):
                        return True
            color[v] = -1
            return False

        return place(0, 0)

    k = 1
    while not colorable(k):
        k += 1
    return k


def dc_bound(g_a: Digraph, base: BaseTopology) -> int:
    """Upper bound ``(D + 1)(D_a^+ + D_a^-)`` on the conflict graph's max degree."""
    out_max, in_max = max_degrees(g_a)
    return (base.max_degree() + 1) * (out_max + in_max)


def schedule_violations(s: Schedule, cg: ConflictGraph) -> list[str]:
    """Human-readable reasons ``s`` is not a valid schedule for ``cg`` (empty if valid)."""
    problems = []
    index = {e: v for v, e in enumerate(cg.links)}
    seen: dict[Edge, int] = {}
    for si, slot in enumerate(s.slots, 1):
        members = []
        for e in slot:
            if e not in index:
                problems.append(f"slot {si}: unknown link {e}")
                continue
            if e in seen:
                problems.append(f"link {e} appears in slots {seen[e]} and {si}")
            seen[e] = si
            members.append(e)
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                if cg.adj[index[members[a]], index[members[b]]]:
                    problems.append(f"slot {si}: conflicting pair {members[a]} {members[b]}")
    for e in cg.links:
        if e not in seen:
            problems.append(f"link {e} is not scheduled")
    return problems


def validate_schedule(s: Schedule, cg: ConflictGraph) -> bool:
    return not schedule_violations(s, cg)


def schedule_digraph(g_a: Digraph, base: BaseTopology, interference: Graph | None = None) -> Schedule:
    return greedy_color(build_conflict_graph(g_a, base, interference))
