"""Command-line entry point: ``sgpdesign <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .design import design_graph, objective_eq14, sweep_k
from .errors import ConfigError, DesignError
from .graphs import BaseTopology, Digraph, Graph, diameter, is_strongly_connected, parse_edge_list
from .mixing import uniform_column_stochastic
from .schedule import schedule_digraph
from .sim import ARMS, ExperimentConfig, compare, run_experiment
from .topologies import GeneratorSpec
from .verify import run_verify

DEFAULT_K_MAX = 10


class UsageError(Exception):
    pass


def _base(args) -> BaseTopology:
    if (args.topology is None) == (args.gen is None):
        raise UsageError("give exactly one of --topology and --gen")
    if args.topology is not None:
        return BaseTopology.from_file(args.topology)
    spec = GeneratorSpec.parse(args.gen)
    if getattr(args, "seed", None) is not None and spec.kind in ("random_geometric", "random"):
        spec.params.setdefault("seed", str(args.seed))
    return spec.build()


def _interference(args, n: int) -> Graph | None:
    if not getattr(args, "interference", None):
        return None
    m, edges = parse_edge_list(Path(args.interference).read_text())
    if m > n:
        raise UsageError(f"interference graph mentions node {m - 1} but the topology has {n} nodes")
    return Graph(n, edges)


def _outdir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_design(out: Path, result) -> None:
    (out / "design.json").write_text(json.dumps(result.to_dict(), indent=2) + "\n")
    (out / "schedule.json").write_text(result.schedule.to_json() + "\n")
    uniform_column_stochastic(result.g_a).write(out / "mixing.txt")


def _summary(result) -> str:
    return (
        f"K={result.K} tau={result.tau} links={result.g_a.num_links} diameter={result.diameter} "
        f"max_out={result.max_out} max_in={result.max_in} log_objective={result.objective_eq14.log:.6g}"
    )


def cmd_generate(args) -> int:
    base = _base(args)
    text = base.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"nodes={base.n} edges={base.undirected.num_edges}", file=sys.stderr)
    return 0


def cmd_design(args) -> int:
    base = _base(args)
    interference = _interference(args, base.n)
    if args.k is None:
        sweep = sweep_k(base, args.k_max, args.skip_step4, interference)
        result = sweep.best
    else:
        result = design_graph(base, args.k, args.skip_step4, interference)
    result.seed = args.seed
    _write_design(_outdir(args), result)
    print(_summary(result))
    return 0


def cmd_schedule(args) -> int:
    """Re-schedule an existing link list (a design.json or a directed edge list)."""
    base = _base(args)
    interference = _interference(args, base.n)
    text = Path(args.links).read_text()
    if args.links.endswith(".json"):
        links = [tuple(e) for e in json.loads(text)["links"]]
    else:
        links = parse_edge_list(text)[1]
    g_a = Digraph(base.n, links)
    sched = schedule_digraph(g_a, base, interference)
    out = _outdir(args)
    (out / "schedule.json").write_text(sched.to_json() + "\n")
    line = f"tau={sched.tau} links={g_a.num_links}"
    if is_strongly_connected(g_a):
        line += f" diameter={diameter(g_a)} log_objective={objective_eq14(g_a).log:.6g}"
    else:
        line += " (not strongly connected)"
    print(line)
    return 0


def _config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: {exc}") from None
    for key, val in (
        ("topology", args.topology),
        ("gen", args.gen),
        ("algorithm", args.algo),
        ("K", args.k),
        ("eps", args.eps),
        ("seed", args.seed),
        ("out", args.out),
        ("max_iters", args.max_iters),
        ("eta", args.eta),
    ):
        if val is not None:
            data[key] = val
    if args.topology is not None:
        data.pop("gen", None)
    if args.gen is not None:
        data.pop("topology", None)
    if args.skip_step4:
        data["skip_step4"] = True
    return ExperimentConfig.from_dict(data)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = _outdir(argparse.Namespace(out=cfg.out))
    if args.compare:
        traces = compare(cfg)
    else:
        tr = run_experiment(cfg)
        traces = {tr.arm: tr}
    for arm, tr in traces.items():
        tr.write_csv(out / f"trace_{arm}.csv")
        status = f"iterations={tr.iterations} slots={tr.total_slots}" if tr.reached else f"not reached in {len(tr)} iterations"
        print(f"{arm}: tau={tr.tau} {status}")
    return 0


def cmd_sweep(args) -> int:
    base = _base(args)
    interference = _interference(args, base.n)
    sweep = sweep_k(base, args.k_max, args.skip_step4, interference)
    out = _outdir(args)
    with open(out / "sweep.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["K", "tau", "links", "diameter", "max_out", "max_in", "log_objective_eq14", "log_objective_eq9_form"])
        for K, r in sweep.results:
            wr.writerow([K, r.tau, r.g_a.num_links, r.diameter, r.max_out, r.max_in, r.objective_eq14.log, r.objective_eq9_form.log])
    best = sweep.best
    best.seed = args.seed
    _write_design(out, best)
    print(f"K*={sweep.k_star} " + _summary(best))
    return 0


def cmd_verify(args) -> int:
    results = run_verify(args.level, args.seed or 0)
    for r in results:
        print(r.line())
        for msg in r.failures[:5]:
            print(f"    {msg}")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sgpdesign", description="Design, schedule and simulate SGP communication graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    def topo(sp):
        sp.add_argument("--topology", help="edge-list file of the base topology")
        sp.add_argument("--gen", help="generator spec, e.g. windmill:m=3,k=21 or rg:n=33,radius=0.5")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")

    sp = sub.add_parser("generate", help="write a base topology edge list")
    topo(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("design", help="design an activated graph and its schedule")
    topo(sp)
    sp.add_argument("--k", type=int, help="number of extra edges (default: sweep 0..--k-max)")
    sp.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    sp.add_argument("--skip-step4", action="store_true")
    sp.add_argument("--interference", help="edge-list file of the interference graph")
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("schedule", help="schedule a given link list")
    topo(sp)
    sp.add_argument("--links", required=True, help="design.json or a directed edge list")
    sp.add_argument("--interference")
    sp.set_defaults(func=cmd_schedule)

    sp = sub.add_parser("simulate", help="run SGP or D-PSGD and write trace CSVs")
    topo(sp)
    sp.add_argument("--config", help="experiment config JSON")
    sp.add_argument("--algo", choices=["sgp", "dpsgd"])
    sp.add_argument("--k", type=int)
    sp.add_argument("--skip-step4", action="store_true")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--max-iters", type=int)
    sp.add_argument("--compare", action="store_true", help="run " + ", ".join(ARMS))
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep-k", help="design for K = 0..k_max and report the objective curve")
    topo(sp)
    sp.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    sp.add_argument("--skip-step4", action="store_true")
    sp.add_argument("--interference")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="run the brute-force oracle suites")
    sp.add_argument("--level", choices=["quick", "full"], default="quick")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DesignError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
