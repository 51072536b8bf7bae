"""Command-line interface.

Subcommands: compare, align, isomorph, sbm-bench, factor-bench, classify,
oracle-check. The primary result document is JSON on stdout (or --out);
structured errors go to stderr as JSON with exit code 1; usage errors exit
with code 2. Every randomized subcommand requires --seed, and identical
argv plus seed produce byte-identical output documents (timings are kept
out of the serialized records).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .bench import (
    BenchResult,
    knn_classify,
    run_factor_bench,
    run_isomorphism_bench,
    run_sbm_bench,
    solve_alignment,
)
from .costs import (
    CostMatrix,
    cost_attribute,
    cost_degree,
    cost_embedding,
    cost_zero_one_identity,
)
from .dataio import parse_network_file, parse_tu_dataset
from .errors import DimensionMismatch, MissingAttributes, OtcError
from .generators import GeneratorSpec, gen_random_strongly_connected
from .networks import Network
from .solver import hard_alignment, solve_exact_otc, solve_lp_oracle

GRAPH_CLASSES = {
    "er_6_15_p13": GeneratorSpec("erdos_renyi", {"n_range": (6, 15), "p": 1 / 3}),
    "er_6_15_p23": GeneratorSpec("erdos_renyi", {"n_range": (6, 15), "p": 2 / 3}),
    "er_16_25_p14": GeneratorSpec("erdos_renyi", {"n_range": (16, 25), "p": 1 / 4}),
    "er_16_25_p34": GeneratorSpec("erdos_renyi", {"n_range": (16, 25), "p": 3 / 4}),
    "sbm_7_7_7_7": GeneratorSpec(
        "sbm", {"block_sizes": [7, 7, 7, 7], "p_within": 0.7, "p_between": 0.1}
    ),
    "sbm_10_8_6": GeneratorSpec(
        "sbm", {"block_sizes": [10, 8, 6], "p_within": 0.7, "p_between": 0.1}
    ),
    "sbm_7_7_7": GeneratorSpec(
        "sbm", {"block_sizes": [7, 7, 7], "p_within": 0.7, "p_between": 0.1}
    ),
    "rwa_012": GeneratorSpec(
        "random_weighted_adjacency", {"n_range": (6, 20), "alphabet": (0, 1, 2)}
    ),
    "lollipop": GeneratorSpec(
        "lollipop", {"candy_range": (7, 15), "stick_range": (7, 15), "extra_edge_p": 0.5}
    ),
}

COST_CHOICES = ("identity", "attr", "degree", "sdegree", "eucl", "sqeucl")


def build_cost(name: str, g1: Network, g2: Network) -> CostMatrix:
    if name == "identity":
        if g1.n != g2.n:
            raise DimensionMismatch("identity cost needs equal vertex counts")
        return cost_zero_one_identity(g1.n)
    if name == "attr":
        return cost_attribute(g1.labels, g2.labels)
    if name == "degree":
        return cost_degree(g1, g2, standardized=False)
    if name == "sdegree":
        return cost_degree(g1, g2, standardized=True)
    if name in ("eucl", "sqeucl"):
        if g1.embedding is None or g2.embedding is None:
            raise MissingAttributes("euclidean costs need vertex embeddings on both networks")
        return cost_embedding(g1.embedding, g2.embedding, squared=name == "sqeucl")
    raise ValueError(f"unknown cost {name!r}")


def _solver_options(args, solver: str) -> dict:
    if solver != "entropic":
        return {}
    return {
        "outer_iters": args.L,
        "horizon": args.T,
        "xi": args.xi,
        "sinkhorn_iters": args.sinkhorn_iters,
    }


def _strip_runtime(records: List[dict]) -> List[dict]:
    return [{k: v for k, v in r.items() if k != "runtime"} for r in records]


def _bench_doc(result: BenchResult) -> dict:
    summary = {
        k: v for k, v in result.summary.items() if not k.startswith("runtime")
    }
    return {
        "experiment": result.experiment,
        "summary": summary,
        "records": _strip_runtime(result.records),
    }


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_doc(args, doc: dict) -> None:
    _emit(args, json.dumps(doc, indent=2) + "\n")


def _alignment_csv(doc: dict) -> str:
    lines = ["table,u,up,v,vp,value"]
    for u, row in enumerate(doc["vertex_alignment"]):
        for v, p in enumerate(row):
            if p > 0:
                lines.append(f"vertex,{u},,{v},,{p!r}")
    for u, up, v, vp, p in doc.get("edge_alignment", []):
        lines.append(f"edge,{u},{up},{v},{vp},{p!r}")
    for u, v in enumerate(doc.get("hard_alignment", [])):
        lines.append(f"hard,{u},,{v},,1")
    return "\n".join(lines) + "\n"


def cmd_compare(args, align: bool = False) -> int:
    g1 = parse_network_file(args.network1)
    g2 = parse_network_file(args.network2)
    cost = build_cost(args.cost, g1, g2)
    value, pi_v, sol = solve_alignment(
        g1, g2, cost, args.solver, _solver_options(args, args.solver)
    )
    doc = {
        "rho": value,
        "solver": args.solver,
        "cost": cost.rule,
        "n1": g1.n,
        "n2": g2.n,
    }
    if sol is not None:
        doc["iterations"] = sol.diagnostics.iterations
        doc["objectives"] = sol.diagnostics.objectives
        doc["converged"] = sol.diagnostics.converged
        doc["stationarity_residual"] = sol.coupling.stationarity_residual()
    if align:
        doc["vertex_alignment"] = [[float(x) for x in row] for row in pi_v]
        if sol is not None:
            doc["edge_alignment"] = [
                [u, up, v, vp, p] for ((u, up), (v, vp)), p in sorted(sol.edge_alignment().items())
            ]
        if args.hard:
            doc["hard_alignment"] = [int(x) for x in hard_alignment(pi_v)]
        if args.format == "csv":
            _emit(args, _alignment_csv(doc))
            return 0
    _emit_doc(args, doc)
    return 0


def cmd_isomorph(args) -> int:
    spec = GRAPH_CLASSES[args.graph_class]
    spec = GeneratorSpec(spec.kind, dict(spec.params), seed=args.seed)
    result = run_isomorphism_bench(
        spec, trials=args.trials, solver=args.solver,
        solver_options=_solver_options(args, args.solver),
    )
    doc = _bench_doc(result)
    doc["graph_class"] = args.graph_class
    doc["solver"] = args.solver
    _emit_doc(args, doc)
    return 0


def cmd_sbm_bench(args) -> int:
    result = run_sbm_bench(
        block_sizes1=args.blocks1,
        block_sizes2=args.blocks2,
        p_within=args.p_within,
        p_between=args.p_between,
        trials=args.trials,
        solver=args.solver,
        solver_options=_solver_options(args, args.solver),
        seed=args.seed,
    )
    doc = _bench_doc(result)
    doc["solver"] = args.solver
    _emit_doc(args, doc)
    return 0


def cmd_factor_bench(args) -> int:
    result = run_factor_bench(
        sigma_list=args.sigma,
        epsilon=args.epsilon,
        trials=args.trials,
        solver=args.solver,
        solver_options=_solver_options(args, args.solver),
        seed=args.seed,
        b=args.blocks,
        m=args.per_block,
        directed=args.directed,
    )
    doc = _bench_doc(result)
    doc["solver"] = args.solver
    rows = []
    for sigma, stats in result.summary["by_sigma"].items():
        rows.append(
            f"sigma={sigma:g}: {stats['accuracy_pct_mean']:.2f} +- {stats['accuracy_pct_sd']:.2f}"
        )
    doc["table"] = rows
    _emit_doc(args, doc)
    return 0


def cmd_classify(args) -> int:
    data = parse_tu_dataset(args.tu_dir, args.tu_name)
    nets = data.networks
    labels = data.graph_labels
    if args.max_graphs is not None and len(nets) > args.max_graphs:
        keep = np.random.default_rng(args.seed).permutation(len(nets))[: args.max_graphs]
        keep = np.sort(keep)
        nets = [nets[i] for i in keep]
        labels = [labels[i] for i in keep]
    usable = [i for i, g in enumerate(nets)]
    D = np.zeros((len(nets), len(nets)))
    opts = _solver_options(args, args.solver)
    for a in range(len(nets)):
        for b in range(a + 1, len(nets)):
            cost = build_cost(args.cost, nets[a], nets[b])
            value, _, _ = solve_alignment(nets[a], nets[b], cost, args.solver, opts)
            D[a, b] = D[b, a] = value
    result = knn_classify(
        D, labels, k=args.k, train_fraction=args.train_fraction,
        repeats=args.repeats, seed=args.seed,
    )
    doc = {
        "dataset": args.tu_name,
        "graphs": len(nets),
        "solver": args.solver,
        "cost": args.cost,
        "k": args.k,
        "accuracy_mean": result.accuracy_mean,
        "accuracy_sd": result.accuracy_sd,
        "per_repeat": result.per_repeat,
    }
    _emit_doc(args, doc)
    return 0


def cmd_oracle_check(args) -> int:
    seeds = np.random.SeedSequence(args.seed).spawn(args.trials)
    mismatches = 0
    max_gap = 0.0
    records = []
    for t in range(args.trials):
        rng = np.random.default_rng(seeds[t])
        n = int(rng.integers(2, args.max_n + 1))
        m = int(rng.integers(2, args.max_n + 1))
        g1 = gen_random_strongly_connected(n, density=0.5, seed=rng)
        g2 = gen_random_strongly_connected(m, density=0.5, seed=rng)
        cost = rng.uniform(0.0, 1.0, size=(n, m))
        exact = solve_exact_otc(g1, g2, cost)
        oracle = solve_lp_oracle(g1, g2, cost)
        gap = abs(exact.rho - oracle.rho)
        max_gap = max(max_gap, gap)
        if gap > 1e-7:
            mismatches += 1
        records.append({"trial": t, "n": n, "m": m, "gap": gap})
    doc = {
        "trials": args.trials,
        "mismatches": mismatches,
        "max_gap": max_gap,
        "message": f"{mismatches} mismatches",
        "records": records,
    }
    _emit_doc(args, doc)
    return 0 if mismatches == 0 else 1


def _add_entropic_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--L", type=int, default=10, help="entropic outer iterations")
    p.add_argument("--T", type=int, default=50, help="entropic evaluation horizon")
    p.add_argument("--xi", type=float, default=100.0, help="entropic regularization sharpness")
    p.add_argument("--sinkhorn-iters", type=int, default=50, help="Sinkhorn iterations per solve")


def _add_common(p: argparse.ArgumentParser, seed_required: bool) -> None:
    p.add_argument("--solver", choices=("exact", "entropic", "onestep", "ot"), default="exact")
    p.add_argument("--seed", type=int, required=seed_required,
                   help="random seed" + (" (required)" if seed_required else ""))
    p.add_argument("--out", default=None, help="write the result document to this path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_entropic_flags(p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="otcalign",
        description="Compare and softly align weighted networks by optimally "
        "coupling their random walks.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="difference cost between two network files")
    p.add_argument("network1")
    p.add_argument("network2")
    p.add_argument("--cost", choices=COST_CHOICES, default="identity")
    _add_common(p, seed_required=False)
    p.set_defaults(func=lambda a: cmd_compare(a, align=False), hard=False)

    p = sub.add_parser("align", help="compare plus vertex/edge alignment dumps")
    p.add_argument("network1")
    p.add_argument("network2")
    p.add_argument("--cost", choices=COST_CHOICES, default="identity")
    p.add_argument("--hard", action="store_true", help="emit the argmax vertex map")
    _add_common(p, seed_required=False)
    p.set_defaults(func=lambda a: cmd_compare(a, align=True))

    p = sub.add_parser("isomorph", help="isomorphism-detection benchmark")
    p.add_argument("--graph-class", choices=sorted(GRAPH_CLASSES), required=True)
    p.add_argument("--trials", type=int, default=30)
    _add_common(p, seed_required=True)
    p.set_defaults(func=cmd_isomorph)

    p = sub.add_parser("sbm-bench", help="block-model alignment benchmark")
    p.add_argument("--blocks1", type=_int_list, default=[12, 12, 12, 12])
    p.add_argument("--blocks2", type=_int_list, default=[8, 8, 8, 8])
    p.add_argument("--p-within", type=_float_list, default=[1.0, 0.8, 0.6, 0.4])
    p.add_argument("--p-between", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=10)
    _add_common(p, seed_required=True)
    p.set_defaults(func=cmd_sbm_bench)

    p = sub.add_parser("factor-bench", help="factor alignment benchmark")
    p.add_argument("--sigma", type=_float_list, default=[2.5])
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--blocks", type=int, default=6, help="factor vertex count")
    p.add_argument("--per-block", type=int, default=5, help="extension vertices per fiber")
    p.add_argument("--directed", action="store_true")
    _add_common(p, seed_required=True)
    p.set_defaults(func=cmd_factor_bench)

    p = sub.add_parser("classify", help="k-NN classification of a TU-format collection")
    p.add_argument("--tu-dir", required=True)
    p.add_argument("--tu-name", required=True)
    p.add_argument("--cost", choices=COST_CHOICES, default="attr")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--max-graphs", type=int, default=None,
                   help="subsample the collection to this many graphs")
    _add_common(p, seed_required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle-check", help="exact solver vs occupation-measure LP")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-n", type=int, default=4)
    _add_common(p, seed_required=True)
    p.set_defaults(func=cmd_oracle_check)
    return ap


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x]


def cli_main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (OtcError, OSError, ValueError) as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
