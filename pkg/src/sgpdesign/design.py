"""Communication graph design for stochastic gradient push.

Pipeline: low-degree spanning tree -> ``K`` distance-driven extra edges ->
orientation into a strongly connected digraph -> slot-preserving link
augmentation. Objectives are integers, so they are kept exact (Python ints)
and compared exactly; ``log`` and float renderings are carried for reports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidPartition, NotStronglyConnected
from .graphs import (
    BaseTopology,
    Digraph,
    Graph,
    bridge_decomposition,
    dfs_preorder,
    diameter,
    directed_distances,
    is_strongly_connected,
    max_degrees,
)
from .schedule import Schedule, _interference_matrix, build_conflict_graph, conflict_matrix, greedy_color
from .spanning import SpanningGraph, add_k_edges, iter_distance_edges, min_degree_spanning_tree


class Objective(NamedTuple):
    """An exact non-negative integer objective with its natural log and float value."""

    exact: int
    log: float
    value: float

    @classmethod
    def of(cls, x: int) -> "Objective":
        lg = math.log(x) if x > 0 else -math.inf
        try:
            val = float(x)
        except OverflowError:
            val = math.inf
        return cls(x, lg, val)


def iteration_factor(diam: int, max_out: int) -> int:
    """The iteration-count factor ``diam^2 (1 + max_out)^(4 diam)``."""
    return diam * diam * (1 + max_out) ** (4 * diam)


def objective_eq14(g_a: Digraph) -> Objective:
    """``(D_a^+ + D_a^-) diam^2 (1 + D_a^+)^(4 diam)`` of a strongly connected digraph."""
    diam = diameter(g_a)
    out_max, in_max = max_degrees(g_a)
    return Objective.of((out_max + in_max) * iteration_factor(diam, out_max))


def theorem2_bound(tree: SpanningGraph) -> Objective:
    """Guarantee ``2 D* (diam*)^2 (1 + D*)^(4 diam*)`` from the Step-1 tree's own degree and diameter."""
    d_star = tree.max_degree()
    diam_star = tree.diameter()
    return Objective.of(2 * d_star * iteration_factor(diam_star, d_star))


def orient_edges(g: SpanningGraph | Graph) -> Digraph:
    """Orient a connected undirected graph into a strongly connected digraph.

    Inside each bridge-connected component a DFS from its smallest vertex
    orients tree edges parent -> child and the remaining (back) edges from the
    descendant to the ancestor. Bridges are kept in both directions.
    """
    graph = g.graph if isinstance(g, SpanningGraph) else g
    comps, bridges = bridge_decomposition(graph)
    links = []
    for comp in comps:
        if len(comp.vertices) < 2:
            continue
        tree, pre = dfs_preorder(comp, comp.vertices[0])
        tree_set = set(tree)
        for u, v in comp.edges:
            if pre[u] > pre[v]:
                u, v = v, u
            links.append((u, v) if (u, v) in tree_set else (v, u))
    for u, v in bridges:
        links += [(u, v), (v, u)]
    return Digraph(graph.n, links)


def augment_links(
    g_a: Digraph,
    schedule: Schedule,
    base: BaseTopology,
    gamma: int | None = None,
    interference: Graph | None = None,
) -> tuple[Digraph, Schedule]:
    """Add base links that fit an existing slot without raising the iteration factor past ``gamma``.

    Each round picks, among links that fit some slot, the one minimizing
    ``diam^2 (1 + D_a^+)^(4 diam)`` after insertion (ties: smallest link), places
    it in the first slot it does not conflict with, and stops once the best
    candidate would exceed ``gamma`` or nothing fits.
    """
    if gamma is None:
        gamma = iteration_factor(diameter(g_a), max_degrees(g_a)[0])
    n = g_a.n
    all_links = list(base.links)
    if not all_links or schedule.tau == 0:
        return g_a, schedule
    index = {e: i for i, e in enumerate(all_links)}
    tx = np.array([e[0] for e in all_links])
    rx = np.array([e[1] for e in all_links])
    conf = conflict_matrix(all_links, _interference_matrix(interference if interference is not None else base))

    active = np.zeros(len(all_links), dtype=bool)
    for e in g_a.links:
        active[index[e]] = True
    slots = [list(s) for s in schedule.slots]
    members = np.zeros((len(all_links), len(slots)), dtype=np.int32)
    for s, slot in enumerate(slots):
        for e in slot:
            members[index[e], s] = 1
    feasible = (conf.astype(np.int32) @ members) == 0

    dist = directed_distances(g_a)
    if np.isinf(dist).any():
        raise NotStronglyConnected("link augmentation needs a strongly connected graph")
    dist = dist.astype(np.int64)
    outdeg = np.bincount(tx[active], minlength=n)
    diam = int(dist.max())
    factors: dict[tuple[int, int], int] = {}

    def factor(d, k):
        key = (int(d), int(k))
        if key not in factors:
            factors[key] = iteration_factor(*key)
        return factors[key]

    while True:
        cand = np.flatnonzero(~active & feasible.any(axis=1))
        if cand.size == 0:
            break
        u, v = tx[cand], rx[cand]
        dplus = np.maximum(outdeg.max(), outdeg[u] + 1)
        new_diam = np.full(cand.size, diam)
        if diam > 1:
            ps, pt = np.nonzero(dist == diam)
            for lo in range(0, cand.size, 512):
                sl = slice(lo, lo + 512)
                via = dist[ps][:, u[sl]] + 1 + dist[v[sl]][:, pt].T
                shrinks = np.flatnonzero((via < diam).all(axis=0)) + lo
                for c in shrinks:
                    nd = np.minimum(dist, dist[:, u[c], None] + 1 + dist[None, v[c], :])
                    new_diam[c] = nd.max()
        scores = [factor(d, k) for d, k in zip(new_diam, dplus)]
        best = min(range(cand.size), key=lambda c: scores[c])  # first minimum = smallest link
        if scores[best] > gamma:
            break
        li = cand[best]
        a, b = int(tx[li]), int(rx[li])
        s = int(np.argmax(feasible[li]))
        slots[s].append((a, b))
        active[li] = True
        feasible[conf[li], s] = False
        dist = np.minimum(dist, dist[:, a, None] + 1 + dist[None, b, :])
        diam = int(dist.max())
        outdeg[a] += 1

    out = Digraph(n, [all_links[i] for i in np.flatnonzero(active)])
    return out, Schedule(tuple(tuple(sorted(s)) for s in slots))


@dataclass
class DesignResult:
    g_a: Digraph
    schedule: Schedule
    tau: int
    delta: float
    diameter: int
    max_out: int
    max_in: int
    objective_eq14: Objective
    objective_eq9_form: Objective
    gamma: Objective
    K: int
    skip_step4: bool
    tree: SpanningGraph | None = field(default=None, repr=False)
    oriented: Digraph | None = field(default=None, repr=False)
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.g_a.n,
            "links": [list(e) for e in self.g_a.links],
            "schedule": [[list(e) for e in s] for s in self.schedule.slots],
            "metrics": {
                "tau": self.tau,
                "diameter": self.diameter,
                "max_out_degree": self.max_out,
                "max_in_degree": self.max_in,
                "delta": self.delta,
                "num_links": self.g_a.num_links,
                "log_objective_eq14": self.objective_eq14.log,
                "objective_eq14": str(self.objective_eq14.exact),
                "log_objective_eq9_form": self.objective_eq9_form.log,
                "log_gamma": self.gamma.log,
                "gamma": str(self.gamma.exact),
            },
            "provenance": {"K": self.K, "skip_step4": self.skip_step4, "seed": self.seed},
        }


def summarize(
    g_a: Digraph,
    schedule: Schedule,
    gamma: int,
    K: int,
    skip_step4: bool,
    **extra,
) -> DesignResult:
    diam = diameter(g_a)
    out_max, in_max = max_degrees(g_a)
    ifac = iteration_factor(diam, out_max)
    return DesignResult(
        g_a=g_a,
        schedule=schedule,
        tau=schedule.tau,
        delta=1.0 / (out_max + 1),
        diameter=diam,
        max_out=out_max,
        max_in=in_max,
        objective_eq14=Objective.of((out_max + in_max) * ifac),
        objective_eq9_form=Objective.of(schedule.tau * ifac),
        gamma=Objective.of(gamma),
        K=K,
        skip_step4=skip_step4,
        **extra,
    )


def _finish(base, tree, graph, K, skip_step4, interference, seed=None) -> DesignResult:
    g3 = orient_edges(graph)
    sched = greedy_color(build_conflict_graph(g3, base, interference))
    gamma = iteration_factor(diameter(g3), max_degrees(g3)[0])
    g_a = g3
    if not skip_step4:
        g_a, sched = augment_links(g3, sched, base, gamma, interference)
    return summarize(g_a, sched, gamma, K, skip_step4, tree=tree, oriented=g3, seed=seed)


def design_graph(
    base: BaseTopology,
    K: int,
    skip_step4: bool = False,
    interference: Graph | None = None,
) -> DesignResult:
    """Run the full design pipeline for a fixed number ``K`` of extra edges."""
    if K < 0:
        raise ValueError("K must be non-negative")
    tree = min_degree_spanning_tree(base.undirected)
    graph = add_k_edges(tree, base.undirected, K)
    return _finish(base, tree, graph, K, skip_step4, interference)


@dataclass
class SweepResult:
    results: list[tuple[int, DesignResult]]
    k_star: int

    @property
    def best(self) -> DesignResult:
        return dict(self.results)[self.k_star]


def sweep_k(
    base: BaseTopology,
    k_max: int,
    skip_step4: bool = False,
    interference: Graph | None = None,
) -> SweepResult:
    """Design for every ``K`` in ``0..k_max`` and pick the Eq.-14 minimizer (smallest ``K`` on ties).

    ``k_max`` is clamped to the number of non-tree base edges. The extra edges
    for ``K + 1`` extend those for ``K``, so edge addition runs once.
    """
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    tree = min_degree_spanning_tree(base.undirected)
    results = [(0, _finish(base, tree, tree.graph, 0, skip_step4, interference))]
    edges = set(tree.edges)
    for K, e in enumerate(iter_distance_edges(tree, base.undirected), 1):
        if K > k_max:
            break
        edges.add(e)
        g = SpanningGraph(base.n, tuple(sorted(edges)), False)
        results.append((K, _finish(base, tree, g, K, skip_step4, interference)))
    k_star = min(results, key=lambda kr: (kr[1].objective_eq14.exact, kr[0]))[0]
    return SweepResult(results, k_star)


def f_of_b(B: int, g_a: Digraph, split, base: BaseTopology, interference: Graph | None = None) -> Objective:
    """Period-``B`` objective lower bound for a partition of ``g_a``'s links into ``B`` sets.

    ``(sum_t tau(G_t)) diam^2 B (ceil(D_a^+/B) + 1)^(4 diam B)`` with each
    ``tau(G_t)`` from greedy coloring and ``diam``, ``D_a^+`` from ``g_a``.
    """
    if B < 1 or len(split) != B:
        raise InvalidPartition(f"expected {B} link sets, got {len(split)}")
    seen = []
    for part in split:
        seen += [tuple(e) for e in part]
    if len(seen) != len(set(seen)) or set(seen) != set(g_a.links):
        raise InvalidPartition("link sets must partition the activated links")
    taus = sum(greedy_color(build_conflict_graph(Digraph(g_a.n, part), base, interference)).tau for part in split)
    diam = diameter(g_a)
    out_max = max_degrees(g_a)[0]
    per = -(-out_max // B)
    return Objective.of(taus * diam * diam * B * (per + 1) ** (4 * diam * B))
