"""Graph representations and the traversal primitives used by the design pipeline.

Nodes are dense integers ``0..n-1``. Neighbor iteration is always in ascending
node order so that every traversal (and therefore every design) is reproducible.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import Disconnected, NotStronglyConnected

Edge = tuple[int, int]


def _norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Simple undirected graph on nodes ``0..n-1``."""

    def __init__(self, n: int, edges: Iterable[Edge]):
        if n < 0:
            raise ValueError("node count must be non-negative")
        es = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                continue
            es.add(_norm_edge(u, v))
        self.n = n
        self.edges: tuple[Edge, ...] = tuple(sorted(es))
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        self._adj = tuple(tuple(sorted(a)) for a in adj)
        self._edge_set = frozenset(self.edges)

    @property
    def vertices(self) -> range:
        return range(self.n)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self._edge_set

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def with_edges(self, extra: Iterable[Edge]) -> "Graph":
        return Graph(self.n, list(self.edges) + list(extra))

    def without_edge(self, e: Edge) -> "Graph":
        e = _norm_edge(*e)
        return Graph(self.n, [x for x in self.edges if x != e])

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [s], deque([s])
            while queue:
                u = queue.popleft()
                for w in self._adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        queue.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        if self.edges:
            e = np.array(self.edges)
            a[e[:, 0], e[:, 1]] = True
            a[e[:, 1], e[:, 0]] = True
        return a

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={len(self.edges)})"


class BaseTopology:
    """Bidirected wireless connectivity graph.

    Every undirected edge ``{i, j}`` of the underlying view contributes the two
    directed links ``(i, j)`` and ``(j, i)``. The undirected view must be
    connected.
    """

    def __init__(self, n: int, edges: Iterable[Edge]):
        self.undirected = Graph(n, edges)
        self.n = n
        if not self.undirected.is_connected():
            comps = self.undirected.components()
            shown = "; ".join(str(c) for c in comps[:5])
            raise Disconnected(
                f"base topology is disconnected: {len(comps)} components ({shown})",
                components=comps,
            )
        links = []
        for u, v in self.undirected.edges:
            links.append((u, v))
            links.append((v, u))
        self.links: tuple[Edge, ...] = tuple(sorted(links))
        self._link_set = frozenset(self.links)

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.undirected.edges

    def has_link(self, i: int, j: int) -> bool:
        return (i, j) in self._link_set

    def max_degree(self) -> int:
        return self.undirected.max_degree()

    def adjacency_matrix(self) -> np.ndarray:
        return self.undirected.adjacency_matrix()

    def as_digraph(self) -> "Digraph":
        return Digraph(self.n, self.links)

    @classmethod
    def from_text(cls, text: str) -> "BaseTopology":
        return cls(*parse_edge_list(text))

    @classmethod
    def from_file(cls, path) -> "BaseTopology":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        lines = [f"# n={self.n} edges={len(self.edges)}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"BaseTopology(n={self.n}, edges={len(self.edges)})"


def parse_edge_list(text: str) -> tuple[int, list[Edge]]:
    """Parse the ``i j`` per-line edge format; ``#`` starts a comment.

    The node count is one more than the largest index seen.
    """
    edges = []
    n = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'i j', got {raw!r}")
        u, v = int(parts[0]), int(parts[1])
        if u < 0 or v < 0:
            raise ValueError(f"line {lineno}: negative node index")
        edges.append((u, v))
        n = max(n, u + 1, v + 1)
    return n, edges


class Digraph:
    """Directed graph given by its link set (self-loops are never stored)."""

    def __init__(self, n: int, links: Iterable[Edge]):
        ls = set()
        for i, j in links:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"link ({i}, {j}) out of range for n={n}")
            if i != j:
                ls.add((i, j))
        self.n = n
        self.links: tuple[Edge, ...] = tuple(sorted(ls))
        self._link_set = frozenset(self.links)
        out: list[list[int]] = [[] for _ in range(n)]
        inn: list[list[int]] = [[] for _ in range(n)]
        for i, j in self.links:
            out[i].append(j)
            inn[j].append(i)
        self._out = tuple(tuple(o) for o in out)
        self._in = tuple(tuple(sorted(x)) for x in inn)

    def out_neighbors(self, j: int) -> tuple[int, ...]:
        return self._out[j]

    def in_neighbors(self, j: int) -> tuple[int, ...]:
        return self._in[j]

    def out_degree(self, j: int) -> int:
        return len(self._out[j])

    def in_degree(self, j: int) -> int:
        return len(self._in[j])

    def has_link(self, i: int, j: int) -> bool:
        return (i, j) in self._link_set

    @property
    def num_links(self) -> int:
        return len(self.links)

    def with_links(self, extra: Iterable[Edge]) -> "Digraph":
        return Digraph(self.n, list(self.links) + list(extra))

    def is_subgraph_of(self, base: BaseTopology) -> bool:
        return self.n == base.n and all(base.has_link(i, j) for i, j in self.links)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        if self.links:
            e = np.array(self.links)
            a[e[:, 0], e[:, 1]] = True
        return a

    def __eq__(self, other):
        return isinstance(other, Digraph) and self.n == other.n and self.links == other.links

    def __hash__(self):
        return hash((self.n, self.links))

    def __repr__(self):
        return f"Digraph(n={self.n}, links={len(self.links)})"


def _bfs_hops(adj, src: int, n: int) -> list[int]:
    dist = [-1] * n
    dist[src] = 0
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def directed_distances(g: Digraph) -> np.ndarray:
    """Hop-count matrix ``d[s, t]`` of ``g`` with ``inf`` for unreachable pairs."""
    d = np.full((g.n, g.n), np.inf)
    for s in range(g.n):
        row = _bfs_hops(g._out, s, g.n)
        for t, h in enumerate(row):
            if h >= 0:
                d[s, t] = h
    return d


def all_pairs_distances(g: Graph) -> np.ndarray:
    """Undirected hop-count matrix with ``inf`` for unreachable pairs."""
    d = np.full((g.n, g.n), np.inf)
    for s in range(g.n):
        row = _bfs_hops(g._adj, s, g.n)
        for t, h in enumerate(row):
            if h >= 0:
                d[s, t] = h
    return d


def is_strongly_connected(g: Digraph) -> bool:
    if g.n <= 1:
        return True
    fwd = _bfs_hops(g._out, 0, g.n)
    if min(fwd) < 0:
        return False
    back = _bfs_hops(g._in, 0, g.n)
    return min(back) >= 0


def diameter(g: Digraph) -> int:
    """Largest directed shortest-path hop count over ordered node pairs."""
    if not is_strongly_connected(g):
        raise NotStronglyConnected(f"{g!r} is not strongly connected")
    best = 0
    for s in range(g.n):
        best = max(best, max(_bfs_hops(g._out, s, g.n)))
    return best


def max_degrees(g: Digraph) -> tuple[int, int]:
    """``(max out-degree, max in-degree)`` excluding self-loops."""
    if g.n == 0:
        return 0, 0
    return (max(len(o) for o in g._out), max(len(i) for i in g._in))


class Component(NamedTuple):
    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]


def bridge_decomposition(g: Graph) -> tuple[list[Component], list[Edge]]:
    """Split a connected graph into 2-edge-connected components and bridges.

    Uses iterative Tarjan low-link numbering. Components are returned ordered by
    their smallest vertex; bridges are sorted ``(u, v)`` pairs with ``u < v``.
    """
    if not g.is_connected():
        raise Disconnected("bridge decomposition needs a connected graph", g.components())
    n = g.n
    pre = [0] * n
    low = [0] * n
    counter = 0
    bridges = set()
    for root in range(n):
        if pre[root]:
            continue
        counter += 1
        pre[root] = low[root] = counter
        stack = [(root, -1, iter(g.neighbors(root)))]
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w == parent:
                    # simple graph: the single parent edge is skipped once
                    continue
                if pre[w]:
                    low[u] = min(low[u], pre[w])
                else:
                    counter += 1
                    pre[w] = low[w] = counter
                    stack.append((w, u, iter(g.neighbors(w))))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                if parent >= 0:
                    low[parent] = min(low[parent], low[u])
                    if low[u] > pre[parent]:
                        bridges.add(_norm_edge(parent, u))

    inner = Graph(n, [e for e in g.edges if e not in bridges])
    comps = []
    for verts in inner.components():
        vs = set(verts)
        comps.append(Component(tuple(verts), tuple(e for e in inner.edges if e[0] in vs)))
    return comps, sorted(bridges)


def dfs_preorder(component, root: int) -> tuple[list[Edge], dict[int, int]]:
    """Depth-first search from ``root`` visiting neighbors in ascending order.

    ``component`` is anything with ``vertices`` and ``edges`` (a :class:`Graph`
    or a :class:`Component`). Returns the tree edges as ``(parent, child)``
    pairs and the 1-based preorder number of every vertex.
    """
    verts = set(component.vertices)
    if root not in verts:
        raise ValueError(f"root {root} is not in the component")
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for u, v in component.edges:
        adj[u].append(v)
        adj[v].append(u)
    for v in adj:
        adj[v].sort()
    pre = {root: 1}
    tree = []
    stack = [(root, iter(adj[root]))]
    while stack:
        u, it = stack[-1]
        for w in it:
            if w not in pre:
                pre[w] = len(pre) + 1
                tree.append((u, w))
                stack.append((w, iter(adj[w])))
                break
        else:
            stack.pop()
    if len(pre) != len(verts):
        raise Disconnected("component is not connected from the given root")
    return tree, pre
