"""Command-line entry point: ``python -m ssbe <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _write_text(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_train(args) -> int:
    from .harness import ExperimentConfig, run_experiment

    config = ExperimentConfig.load(args.config)
    report = run_experiment(config, output_dir=args.out)
    for name, res in report.results.items():
        print(f"{name}: relative L2 {res.final_l2:.4e}  relative H1 {res.final_h1:.4e}  "
              f"({res.wall_time:.1f} s)")
    print(f"outputs in {report.output_dir}")
    return 0


def _cmd_counterexample(args) -> int:
    from .counterexample import failure_demo, failure_table_csv

    _write_text(failure_table_csv(failure_demo(args.imax, args.lam)), args.out)
    return 0


def _cmd_rademacher(args) -> int:
    from .theory_probe import empirical_rademacher, loglog_slope

    lines = ["n,estimate,bound"]
    ests = []
    for n in args.n_list:
        r = empirical_rademacher(args.cls, args.q, n, args.d, args.trials, args.restarts,
                                 args.seed, args.M)
        ests.append(r.estimate)
        lines.append(f"{n},{r.estimate:.17g},{r.bound:.17g}")
    _write_text("\n".join(lines) + "\n", args.out)
    if len(args.n_list) >= 2 and all(e > 0 for e in ests):
        print(f"log-log slope {loglog_slope(args.n_list, ests):.3f}", file=sys.stderr)
    return 0


def _cmd_approx(args) -> int:
    from .theory_probe import approximation_probe, random_barron_spec

    spec = random_barron_spec(args.atoms, args.spec_seed)
    lines = ["m,mean_risk,std_error,variance_reference,theorem_bound,path_norm_event_fraction"]
    for m in args.m_list:
        r = approximation_probe(spec, m, args.n_mc, args.seed, args.draws)
        lines.append(f"{m},{r.mean_risk:.17g},{r.std_error:.17g},{r.variance_reference:.17g},"
                     f"{r.theorem_bound:.17g},{r.path_norm_event_fraction:.17g}")
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_verify(args) -> int:
    from .harness import verify_autodiff

    worst = verify_autodiff(args.seed, args.nets)
    ok = worst["gradient"] < 1e-6 and worst["laplacian"] < 1e-4 and worst["pullback"] < 1e-5
    for k, v in worst.items():
        print(f"{k:10s} max relative error {v:.3e}")
    print("OK" if ok else "FAILED")
    return 0 if ok else 1


def _cmd_eval(args) -> int:
    from .harness import evaluate_checkpoint

    resolution = None if args.grid == "default" else int(args.grid)
    print(json.dumps(evaluate_checkpoint(args.checkpoint, resolution, args.seed), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ssbe", description="PINN / SSBE experiments and probes.")
    sub = p.add_subparsers(dest="command", metavar="{train,counterexample,rademacher,"
                                                   "approx-probe,verify-autodiff,eval}")
    sub.required = True

    s = sub.add_parser("train", help="run an experiment from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None, help="output directory (overrides the config)")
    s.set_defaults(func=_cmd_train)

    s = sub.add_parser("counterexample", help="PINN objective vs H1 error of harmonic perturbations")
    s.add_argument("--imax", type=int, required=True)
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_counterexample)

    s = sub.add_parser("rademacher", help="Monte-Carlo Rademacher estimates vs bounds (CSV)")
    s.add_argument("--class", dest="cls", choices=["F_Q", "G_Q", "DG_Q"], default="F_Q")
    s.add_argument("--q", type=float, default=1.0)
    s.add_argument("--n-list", type=int, nargs="+", default=[64, 256, 1024, 4096])
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--M", type=float, default=1.0)
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--restarts", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_rademacher)

    s = sub.add_parser("approx-probe", help="risk of m-neuron Barron averages (CSV)")
    s.add_argument("--m-list", type=int, nargs="+", default=[8, 32, 128])
    s.add_argument("--atoms", type=int, default=16)
    s.add_argument("--spec-seed", type=int, default=0)
    s.add_argument("--n-mc", type=int, default=1000)
    s.add_argument("--draws", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_approx)

    s = sub.add_parser("verify-autodiff", help="finite-difference check of jets and pullbacks")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--nets", type=int, default=10)
    s.set_defaults(func=_cmd_verify)

    s = sub.add_parser("eval", help="relative errors of a saved checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--grid", default="default", help="'default' or a grid resolution")
    s.add_argument("--seed", type=int, default=12345)
    s.set_defaults(func=_cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
