"""Command-line front end: ``gen``, ``fit`` and ``theory`` subcommands.

Exit codes: 0 on success, 1 on runtime failure, 2 on bad usage.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import EdgeListError, InvalidParameterError
from .experiments import METHODS, TARGETS, ExperimentSpec, GraphSource, with_overrides, run_experiment
from .graph import generate_block_graph, write_edge_list
from .optimizer import PRECONDITIONERS, TrainConfig
from .theory import DEFAULT_GRID, MIN_DEGREE, JumpTarget, check_newman_bound, rate_experiment, write_rates_csv

log = logging.getLogger("graphpade")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def parse_degrees(text: str) -> list[int]:
    """``"5:50:5"`` (inclusive start:stop:step) or ``"5,10,20"``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad degree list {text!r}; use start:stop:step or a,b,c") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphpade", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic block graph as an edge list")
    g.add_argument("--groups", type=int, default=5)
    g.add_argument("--group-size", type=int, default=100)
    g.add_argument("--intra-max", type=int, default=8)
    g.add_argument("--inter-max", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="fit spectral filters to a target on a graph")
    f.add_argument("--config", help="ExperimentSpec JSON; flags given explicitly override it")
    f.add_argument("--graph", help="edge-list file (default: synthetic block graph)")
    f.add_argument("--groups", type=int)
    f.add_argument("--group-size", type=int)
    f.add_argument("--target", choices=[t for t in TARGETS if t != "jump"])
    f.add_argument("--method", nargs="+", choices=METHODS, dest="methods")
    f.add_argument("--m", type=int)
    f.add_argument("--n", type=int)
    f.add_argument("--k", type=int)
    f.add_argument("--lr", type=float)
    f.add_argument("--epochs", type=int)
    f.add_argument("--preconditioner", choices=PRECONDITIONERS)
    f.add_argument("--seed", type=int)
    f.add_argument("--repeats", type=int, help="run seeds seed..seed+repeats-1 and aggregate")
    f.add_argument("--out-dir")
    f.add_argument("--cache-dir", help="eigendecomposition cache keyed by graph hash")
    f.add_argument("--threads", type=int, default=None, help="default: available CPUs")
    f.add_argument("--timing", action="store_true", help="record wall-clock seconds (not reproducible)")

    t = sub.add_parser("theory", help="Newman bound check or decay-rate table")
    t.add_argument("--kind", choices=("newman", "rates"), default="newman")
    t.add_argument("--approx", choices=("rational", "polynomial"), default="rational",
                   help="approximant for --kind rates")
    t.add_argument("--degrees", type=parse_degrees, default=parse_degrees("5:50:5"))
    t.add_argument("--grid", type=int, default=DEFAULT_GRID)
    t.add_argument("--c", type=float, default=1.0, help="interval half-width for --kind newman")
    t.add_argument("--out")
    return p


def cmd_gen(args) -> int:
    g = generate_block_graph(args.groups, args.group_size, args.intra_max, args.inter_max, args.seed)
    write_edge_list(g, args.out)
    print(f"vertices: {g.n}")
    print(f"edges: {g.num_edges}")
    if g.num_edges == 0:
        print("warning: generated graph has no edges", file=sys.stderr)
    return EXIT_OK


def _spec_from_args(args) -> ExperimentSpec:
    spec = ExperimentSpec.from_json(args.config) if args.config else ExperimentSpec()
    graph = spec.graph
    if args.graph:
        graph = GraphSource(path=args.graph)
    elif args.groups or args.group_size:
        graph = GraphSource(
            groups=args.groups or graph.groups,
            group_size=args.group_size or graph.group_size,
            intra_max=graph.intra_max,
            inter_max=graph.inter_max,
        )
    cfg = spec.train
    tkw = {"learning_rate": args.lr, "max_epochs": args.epochs, "preconditioner": args.preconditioner}
    tkw = {k: v for k, v in tkw.items() if v is not None}
    if tkw:
        cfg = TrainConfig(**{**cfg.__dict__, **tkw})
    threads = args.threads if args.threads is not None else (spec.threads if args.config else os.cpu_count() or 1)
    return with_overrides(
        spec,
        graph=graph,
        train=cfg,
        target=args.target,
        methods=tuple(args.methods) if args.methods else None,
        m=args.m,
        n=args.n,
        k=args.k,
        seed=args.seed,
        repeats=args.repeats,
        out_dir=args.out_dir,
        cache_dir=args.cache_dir,
        threads=threads,
        timing=True if args.timing else None,
    )


def cmd_fit(args) -> int:
    spec = _spec_from_args(args)
    if spec.graph.path and not Path(spec.graph.path).is_file():
        print(f"error: graph file not found: {spec.graph.path}", file=sys.stderr)
        return EXIT_FAIL
    runs, summaries = run_experiment(spec)
    failed = False
    for reports, summary in zip(runs, summaries):
        print(f"seed {summary['seed']}: {summary['vertices']} vertices, {summary['edges']} edges, "
              f"dirichlet energy of truth {summary['dirichlet_energy']:.17g}")
        for rep in reports:
            if rep.ok:
                print(f"  {rep.method:18s} s_err {rep.spectral_mse:.6e}  v_err {rep.vertex_mse:.6e}")
            else:
                failed = True
                print(f"  {rep.method:18s} FAILED {rep.error}")
    if spec.out_dir:
        print(f"outputs in {spec.out_dir}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_theory(args, parser) -> int:
    low = [d for d in args.degrees if d < MIN_DEGREE]
    if low or not args.degrees:
        parser.error(f"degrees must be >= {MIN_DEGREE}, got {args.degrees}")
    if args.kind == "newman":
        rows = []
        all_ok = True
        for d in args.degrees:
            err, bound, ok = check_newman_bound(d, args.c, args.grid)
            all_ok &= ok
            rows.append((d, err))
            print(f"n={d:3d} sup_error={err:.6e} bound={bound:.6e} {'pass' if ok else 'FAIL'}")
    else:
        rows = rate_experiment(args.approx, JumpTarget(a=1.0, b=0.0, sigma=0, shift=0.0), args.degrees, args.grid)
        all_ok = True
        for d, e in rows:
            print(f"n={d:3d} sup_error={e:.6e}")
    if args.out:
        write_rates_csv(rows, args.out)
    return EXIT_OK if all_ok else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "fit":
            return cmd_fit(args)
        return cmd_theory(args, parser)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EdgeListError, OSError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
