"""Brute-force oracle suites that cross-check the design pipeline.

Each suite returns an ``OracleResult``; failures carry a readable
counterexample. ``run_verify`` runs them all at a ``quick`` or ``full`` level.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .design import f_of_b, objective_eq14, sweep_k, theorem2_bound
from .graphs import BaseTopology, Digraph, is_strongly_connected, max_degrees
from .mixing import min_weight, uniform_column_stochastic
from .schedule import (
    ConflictGraph,
    brute_force_chromatic,
    build_conflict_graph,
    dc_bound,
    greedy_color,
    schedule_violations,
)
from .sim import LocalProblem, ProblemSet, SgpState, sgp_step
from .topologies import random_connected

LEVELS = {
    "quick": dict(designs=20, subgraphs=20, chromatic=20, chromatic_max=10, digraphs=20, splits=40, pushsum_iters=500),
    "full": dict(designs=100, subgraphs=100, chromatic=50, chromatic_max=14, digraphs=50, splits=200, pushsum_iters=10_000),
}


@dataclass
class OracleResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, msg: str):
        self.failures.append(msg)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = "".join(f" {k}={v}" for k, v in self.info.items())
        return f"{status} {self.name}: {self.checked} checked, {len(self.failures)} failed{extra}"


def random_topologies(count: int, seed: int, n_range=(8, 20), density_range=(0.2, 0.6)):
    """Connected random base topologies with node count and edge density drawn per instance."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        density = float(rng.uniform(*density_range))
        yield random_connected(n, density, int(rng.integers(1 << 31)))


def random_subgraph(base: BaseTopology, rng, keep=None) -> Digraph:
    """Random subset of the base links (each kept with probability ``keep``)."""
    keep = rng.uniform(0.1, 0.9) if keep is None else keep
    links = [e for e in base.links if rng.random() < keep]
    return Digraph(base.n, links)


def random_conflict_graph(rng, max_vertices: int) -> ConflictGraph:
    m = int(rng.integers(1, max_vertices + 1))
    p = rng.uniform(0.1, 0.9)
    edges = [(u, v) for u, v in itertools.combinations(range(m), 2) if rng.random() < p]
    return ConflictGraph.from_edges(m, edges)


def designed_graphs(count: int, seed: int):
    """Skip-Step-4 designs at the objective-optimal K over random topologies."""
    for base in random_topologies(count, seed):
        sweep = sweep_k(base, base.undirected.num_edges, skip_step4=True)
        yield base, sweep.best


def check_design_bound(designs) -> OracleResult:
    res = OracleResult("design_bound")
    for base, r in designs:
        res.checked += 1
        if not is_strongly_connected(r.g_a):
            res.fail(f"n={base.n} K={r.K}: design is not strongly connected, links={list(r.g_a.links)}")
            continue
        bound = theorem2_bound(r.tree)
        obj = objective_eq14(r.g_a)
        if obj.exact > bound.exact:
            res.fail(f"n={base.n} K={r.K}: objective log {obj.log:.6g} exceeds bound log {bound.log:.6g}")
    return res


def _check_schedule_of(res: OracleResult, label: str, g_a: Digraph, base: BaseTopology, colorer):
    cg = build_conflict_graph(g_a, base)
    s = colorer(cg)
    res.checked += 1
    for msg in schedule_violations(s, cg):
        res.fail(f"{label}: {msg}")
    d_c = cg.max_degree()
    if d_c > dc_bound(g_a, base):
        res.fail(f"{label}: conflict degree {d_c} exceeds (D+1)(D_a^+ + D_a^-) = {dc_bound(g_a, base)}")
    if s.tau > d_c + 1:
        res.fail(f"{label}: tau {s.tau} exceeds D_c + 1 = {d_c + 1}")


def check_schedules(designs, subgraphs, colorer=greedy_color) -> OracleResult:
    """Exhaustive pair check of every slot plus the conflict-degree and slot-count bounds."""
    res = OracleResult("schedule_validity")
    for idx, (base, r) in enumerate(designs):
        _check_schedule_of(res, f"design {idx}", r.g_a, base, colorer)
    for idx, (base, g) in enumerate(subgraphs):
        _check_schedule_of(res, f"subgraph {idx}", g, base, colorer)
    return res


def check_chromatic(count: int, max_vertices: int, seed: int, colorer=greedy_color) -> OracleResult:
    res = OracleResult("chromatic")
    rng = np.random.default_rng(seed)
    matches = 0
    for idx in range(count):
        cg = random_conflict_graph(rng, max_vertices)
        opt = brute_force_chromatic(cg, limit=max_vertices)
        tau = colorer(cg).tau
        res.checked += 1
        if not opt <= tau <= cg.max_degree() + 1:
            res.fail(f"graph {idx} ({len(cg)} vertices): optimum {opt}, greedy {tau}, D_c+1 {cg.max_degree() + 1}")
        matches += opt == tau
    res.info["greedy_optimal_rate"] = round(matches / max(count, 1), 3)
    return res


def _column_grid(size: int, step: float):
    """All positive weight vectors of length ``size`` on the ``step`` grid summing to one."""
    units = round(1 / step)
    for combo in itertools.product(range(1, units + 1), repeat=size - 1):
        last = units - sum(combo)
        if last >= 1:
            yield [c * step for c in combo] + [last * step]


GRID_GRAPH = Digraph(3, [(0, 1), (0, 2), (1, 2), (2, 0)])


def check_uniform_weights(count: int, seed: int, step: float = 0.05) -> OracleResult:
    """Grid search over column-stochastic weights on a 3-node graph, plus uniform-weight equality."""
    res = OracleResult("uniform_weights")
    g = GRID_GRAPH
    best = 0.0
    # columns are independent: the best achievable minimum is the worst column's best minimum
    for j in range(g.n):
        size = g.out_degree(j) + 1
        best_col = max(min(col) for col in _column_grid(size, step))
        best = best_col if j == 0 else min(best, best_col)
    res.checked += 1
    target = 1.0 / (max_degrees(g)[0] + 1)
    if best > target + 1e-12:
        res.fail(f"grid search found delta {best} above 1/(D_a^+ + 1) = {target}")
    res.info["grid_best_delta"] = round(best, 6)
    rng = np.random.default_rng(seed)
    for idx in range(count):
        n = int(rng.integers(2, 12))
        base = random_connected(n, float(rng.uniform(0.3, 0.9)), int(rng.integers(1 << 31)))
        g_a = random_subgraph(base, rng)
        w = uniform_column_stochastic(g_a)
        res.checked += 1
        expected = 1.0 / (max_degrees(g_a)[0] + 1)
        if not w.is_column_stochastic():
            res.fail(f"digraph {idx}: uniform weights are not column-stochastic")
        if min_weight(w) != expected:
            res.fail(f"digraph {idx}: delta {min_weight(w)!r} != {expected!r}, links={list(g_a.links)}")
    return res


def random_split(links, B: int, rng) -> list[list]:
    parts = [[] for _ in range(B)]
    for e in links:
        parts[int(rng.integers(B))].append(e)
    return parts


def check_split_penalty(designs, count: int, seed: int) -> OracleResult:
    res = OracleResult("split_penalty")
    rng = np.random.default_rng(seed)
    designs = list(designs)
    for idx in range(count):
        base, r = designs[idx % len(designs)]
        B = int(rng.integers(2, 5))
        split = random_split(r.g_a.links, B, rng)
        fb = f_of_b(B, r.g_a, split, base)
        f1 = f_of_b(1, r.g_a, [list(r.g_a.links)], base)
        res.checked += 1
        if fb.exact < f1.exact:
            res.fail(f"triple {idx}: F({B}) log {fb.log:.6g} < F(1) log {f1.log:.6g}")
    return res


def check_pushsum(designs, iters: int, seed: int) -> OracleResult:
    """Mass conservation and the exact average dynamics of SGP on the given designs."""
    res = OracleResult("pushsum")
    rng = np.random.default_rng(seed)
    for idx, (base, r) in enumerate(designs):
        n, d = base.n, 3
        probs = [LocalProblem("quadratic", np.eye(d), rng.standard_normal(d)) for _ in range(n)]
        ps = ProblemSet(probs)
        w_mat = uniform_column_stochastic(r.g_a)
        state = SgpState.start(rng.standard_normal((n, d)))
        res.checked += 1
        for t in range(iters):
            g = ps.grads(state.x / state.w[:, None])
            nxt = sgp_step(state, w_mat, ps, 0.1)
            if abs(nxt.w.sum() - n) >= 1e-9:
                res.fail(f"design {idx}: sum of weights {nxt.w.sum()!r} at iteration {t + 1}")
                break
            want = state.x_bar - 0.1 * g.mean(axis=0)
            err = float(np.max(np.abs(nxt.x_bar - want)))
            if err > 1e-12 * max(1.0, float(np.max(np.abs(want)))):
                res.fail(f"design {idx}: average dynamics off by {err:.3e} at iteration {t + 1}")
                break
            state = nxt
    return res


def run_verify(level: str = "quick", seed: int = 0, colorer=greedy_color) -> list[OracleResult]:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {sorted(LEVELS)}")
    cfg = LEVELS[level]
    designs = list(designed_graphs(cfg["designs"], seed))
    rng = np.random.default_rng(seed + 1)
    subgraphs = [(base, random_subgraph(base, rng)) for base in random_topologies(cfg["subgraphs"], seed + 2)]
    return [
        check_design_bound(designs),
        check_schedules(designs, subgraphs, colorer),
        check_chromatic(cfg["chromatic"], cfg["chromatic_max"], seed + 3, colorer),
        check_uniform_weights(cfg["digraphs"], seed + 4),
        check_split_penalty(designs, cfg["splits"], seed + 5),
        check_pushsum(designs[: max(1, len(designs) // 5)], cfg["pushsum_iters"], seed + 6),
    ]


def faulty_colorer(cg: ConflictGraph):
    """Greedy coloring that then merges the first two slots, for fault-injection tests."""
    s = greedy_color(cg)
    if s.tau < 2:
        return s
    merged = tuple(sorted(s.slots[0] + s.slots[1]))
    return type(s)((merged,) + s.slots[2:])
