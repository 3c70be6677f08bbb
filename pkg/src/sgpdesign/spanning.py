"""Low-degree spanning trees and distance-driven edge augmentation.

The spanning tree heuristic follows Fürer and Raghavachari: start from a BFS
tree, then repeatedly relieve maximum-degree vertices by swapping a non-tree
edge into the tree. Vertices of degree ``k - 1`` that block an improvement are
themselves made relievable (recording the edge that would relieve them), which
is what gives the heuristic its ``OPT + 1`` behaviour.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import AddsExhausted, Disconnected
from .graphs import Edge, Graph, _norm_edge, all_pairs_distances


@dataclass(frozen=True)
class SpanningGraph:
    n: int
    edges: tuple[Edge, ...]
    is_tree: bool

    @property
    def graph(self) -> Graph:
        return Graph(self.n, self.edges)

    def max_degree(self) -> int:
        return self.graph.max_degree()

    def diameter(self) -> int:
        d = all_pairs_distances(self.graph)
        return int(d.max()) if self.n else 0


class _Tree:
    """Mutable spanning tree used during local search."""

    def __init__(self, n: int, edges):
        self.n = n
        self.adj = [set() for _ in range(n)]
        for u, v in edges:
            self.adj[u].add(v)
            self.adj[v].add(u)

    def copy(self) -> "_Tree":
        t = _Tree(self.n, [])
        t.adj = [set(a) for a in self.adj]
        return t

    def edges(self) -> list[Edge]:
        return sorted(_norm_edge(u, v) for u in range(self.n) for v in self.adj[u] if u < v)

    def has(self, u, v) -> bool:
        return v in self.adj[u]

    def deg(self, v) -> int:
        return len(self.adj[v])

    def add(self, u, v):
        self.adj[u].add(v)
        self.adj[v].add(u)

    def remove(self, u, v):
        self.adj[u].discard(v)
        self.adj[v].discard(u)

    def path(self, u: int, v: int) -> list[int]:
        parent = {u: None}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            if x == v:
                break
            for y in sorted(self.adj[x]):
                if y not in parent:
                    parent[y] = x
                    queue.append(y)
        if v not in parent:
            return []
        out = [v]
        while out[-1] != u:
            out.append(parent[out[-1]])
        return out[::-1]

    def potential(self) -> tuple[int, int]:
        degs = [len(a) for a in self.adj]
        k = max(degs, default=0)
        return k, degs.count(k)

    def is_spanning_tree(self) -> bool:
        if sum(len(a) for a in self.adj) != 2 * (self.n - 1):
            return False
        seen = {0}
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for y in self.adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == self.n


class _UnionFind:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, x):
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.p[max(ra, rb)] = min(ra, rb)


def _bfs_tree(g: Graph, root: int = 0) -> list[Edge]:
    seen = {root}
    queue = deque([root])
    edges = []
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if w not in seen:
                seen.add(w)
                edges.append((u, w))
                queue.append(w)
    return edges


def _swap_at(tree: _Tree, w: int, u: int, v: int) -> bool:
    """Add ``{u, v}`` and drop a tree edge incident to ``w`` on the induced cycle."""
    path = tree.path(u, v)
    if w not in path:
        return False
    i = path.index(w)
    x = path[i + 1] if i + 1 < len(path) else path[i - 1]
    tree.remove(w, x)
    tree.add(u, v)
    return True


def _relieve(tree: _Tree, w: int, fix: dict, k: int, depth: int = 0) -> bool:
    """Bring a vertex pushed back up to degree ``k`` down again via its recorded edge."""
    if tree.deg(w) < k:
        return True
    if w not in fix or depth > tree.n:
        return False
    u, v = fix.pop(w)
    if tree.has(u, v) or not _swap_at(tree, w, u, v):
        return False
    return _relieve(tree, u, fix, k, depth + 1) and _relieve(tree, v, fix, k, depth + 1)


def _fr_round(tree: _Tree, g: Graph) -> bool:
    """One Fürer–Raghavachari improvement attempt; returns True on success."""
    n = tree.n
    k, _ = tree.potential()
    if k <= 2:
        return False
    deg = [tree.deg(v) for v in range(n)]
    bad = [d >= k - 1 for d in deg]
    uf = _UnionFind(n)
    for u, v in tree.edges():
        if not bad[u] and not bad[v]:
            uf.union(u, v)
    fix: dict[int, Edge] = {}
    non_tree = [e for e in g.edges if not tree.has(*e)]
    changed = True
    while changed:
        changed = False
        for u, v in non_tree:
            if bad[u] or bad[v] or uf.find(u) == uf.find(v):
                continue
            path = tree.path(u, v)
            blockers = [w for w in path if bad[w]]
            heavy = [w for w in blockers if deg[w] == k]
            if heavy:
                trial = tree.copy()
                before = trial.potential()
                ok = _swap_at(trial, heavy[0], u, v)
                ok = ok and _relieve(trial, u, dict(fix), k) and _relieve(trial, v, dict(fix), k)
                if ok and trial.is_spanning_tree() and trial.potential() < before:
                    tree.adj = trial.adj
                    return True
                continue
            for w in blockers:
                bad[w] = False
                fix[w] = (u, v)
                for x in tree.adj[w]:
                    if not bad[x]:
                        uf.union(w, x)
            changed = True
    return False


def _single_swap(tree: _Tree, g: Graph) -> bool:
    """Apply the first edge swap that lowers ``(max degree, #max-degree vertices)``."""
    before = tree.potential()
    k = before[0]
    for u, v in g.edges:
        if tree.has(u, v):
            continue
        path = tree.path(u, v)
        for i, w in enumerate(path):
            if tree.deg(w) != k:
                continue
            for x in (path[i - 1] if i > 0 else None, path[i + 1] if i + 1 < len(path) else None):
                if x is None:
                    continue
                tree.remove(w, x)
                tree.add(u, v)
                if tree.potential() < before:
                    return True
                tree.remove(u, v)
                tree.add(w, x)
    return False


def min_degree_spanning_tree(g_u: Graph) -> SpanningGraph:
    """Approximate minimum-degree spanning tree of a connected undirected graph."""
    if not g_u.is_connected():
        raise Disconnected("cannot span a disconnected graph", g_u.components())
    if g_u.n <= 1:
        return SpanningGraph(g_u.n, (), True)
    tree = _Tree(g_u.n, _bfs_tree(g_u))
    cap = g_u.n * max(g_u.num_edges, 1)
    for _ in range(cap):
        if _fr_round(tree, g_u) or _single_swap(tree, g_u):
            continue
        break
    return SpanningGraph(g_u.n, tuple(tree.edges()), True)


def iter_distance_edges(t: SpanningGraph, g_u: Graph) -> Iterator[Edge]:
    """Yield base edges in the order the greedy maximum-distance rule adds them.

    Distances are recomputed in the working graph after each addition; ties go
    to the lexicographically smallest ``(u, v)``.
    """
    work = set(t.edges)
    candidates = [e for e in g_u.edges if e not in work]
    current = Graph(t.n, work)
    while candidates:
        d = all_pairs_distances(current)
        cand = np.array(candidates)
        dist = d[cand[:, 0], cand[:, 1]]
        best = int(np.argmax(dist))  # first max = lexicographically smallest
        e = candidates.pop(best)
        work.add(e)
        current = Graph(t.n, work)
        yield e


def add_k_edges(t: SpanningGraph, g_u: Graph, K: int) -> SpanningGraph:
    """Add ``K`` non-tree base edges, each joining the farthest-apart endpoints."""
    if K < 0:
        raise ValueError("K must be non-negative")
    base = set(g_u.edges)
    if t.n != g_u.n or not set(t.edges) <= base:
        raise ValueError("spanning graph is not a subgraph of the base")
    added = []
    if K:
        for e in iter_distance_edges(t, g_u):
            added.append(e)
            if len(added) == K:
                break
        if len(added) < K:
            raise AddsExhausted(K, len(added))
    if not added:
        return t
    return SpanningGraph(t.n, tuple(sorted(set(t.edges) | set(added))), False)
