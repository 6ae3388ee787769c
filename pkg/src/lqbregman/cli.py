"""Command-line entry point: ``python3 -m lqbregman <subcommand> ...``.

Exit status is 0 when every check passes (or the iteration converged),
1 when a check fails and 2 for a bad configuration or bad arguments.
"""

import argparse
import os
import sys

import numpy as np

from .alternating import estimate_linear_rate
from .errors import ConfigParseError, InsufficientDecay, NonConvergence
from .harness import (
    _kappa,
    _run_trace,
    example2_pair,
    example2_point,
    load_config,
    power_type_probe,
    run_example1,
    run_example2,
    run_experiment,
    to_json,
)
from .regularity import estimate_kappa
from .space import SpaceConfig


def _grid(text):
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda grid {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty lambda grid")
    return vals


def _emit(obj, out):
    text = to_json(obj)
    if out:
        folder = os.path.dirname(out)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _config(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.samples is not None:
        cfg.kappa_samples = args.samples
    return cfg


def cmd_example1(args):
    rep = run_example1(args.q or 3.0, 1000 if args.samples is None else args.samples,
                       args.seed or 0)
    _emit(rep.to_dict(), args.out)
    return 0 if rep.overall_pass else 1


def cmd_example2(args):
    rep = run_example2(args.lambda_grid or [0.1, 0.01, 0.001])
    _emit(rep.to_dict(), args.out)
    return 0 if rep.overall_pass else 1


def cmd_run(args):
    status, summary = run_experiment(_config(args), args.out)
    sys.stdout.write(to_json(summary))
    return status


def cmd_rate(args):
    cfg = _config(args)
    try:
        trace = _run_trace(cfg)
    except NonConvergence as exc:
        trace = exc.trace
    out = {"iterations": len(trace) - 1, "stop_reason": trace.stop_reason}
    try:
        r = estimate_linear_rate(trace)
    except InsufficientDecay as exc:
        out["rate"] = None
        out["error"] = str(exc)
        _emit(out, args.out)
        return 1
    out["rate"] = {"q_hat": r.q_hat, "C_hat": r.C_hat, "r_squared": r.r_squared,
                   "window": list(r.window)}
    kappa = _kappa(cfg)
    out["kappa_hat"] = kappa
    if kappa is not None:
        bound = 1.0 - 1.0 / kappa + 0.05
        out["contraction_bound"] = bound
        out["within_bound"] = bool(r.q_hat <= bound)
    _emit(out, args.out)
    return 0 if out.get("within_bound", True) else 1


def cmd_regularity(args):
    seed = args.seed or 0
    samples = 10_000 if args.samples is None else args.samples
    probe = None
    if args.config:
        cfg = load_config(args.config)
        if len(cfg.use) < 2:
            raise ConfigParseError("regularity needs two subspaces")
        M, N = cfg.selected()[:2]
        space = cfg.space
    else:
        # the near-parallel pair, probed along v_lambda
        M, N = example2_pair()
        space = SpaceConfig(3, args.q or 3.0, args.p)
        grid = args.lambda_grid or [1e-1, 1e-2, 1e-3, 1e-4]
        probe = np.array([example2_point(lam) for lam in grid])
    rep = estimate_kappa(M, N, space, n_samples=samples, seed=seed,
                         probe_points=probe)
    _emit(rep.to_dict(), args.out)
    return 0


def cmd_probe(args):
    rep = power_type_probe(args.q or 3.0, 2.0,
                           10_000 if args.samples is None else args.samples,
                           args.seed or 0, p=args.p)
    _emit(rep, args.out)
    return 0 if rep["passed"] else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lqbregman",
        description="Bregman projections and alternating methods in l^n_q.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, *flags):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        if "config" in flags:
            p.add_argument("--config", required=name in ("run", "rate"),
                           help="experiment configuration (JSON)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None,
                       help="output path (file prefix for run)")
        if "q" in flags:
            p.add_argument("--q", type=float, default=None)
            p.add_argument("--p", type=float, default=None)
        if "samples" in flags:
            p.add_argument("--samples", type=int, default=None)
        if "grid" in flags:
            p.add_argument("--lambda-grid", type=_grid, default=None,
                           help="comma separated values in (0, 1]")
        return p

    add("example1", cmd_example1, "coordinate-plane pair checks", "q", "samples")
    add("example2", cmd_example2, "near-parallel planes checks", "grid")
    add("run", cmd_run, "run a configured experiment", "config", "samples")
    add("rate", cmd_rate, "fit the linear rate of a configured run",
        "config", "samples")
    add("regularity", cmd_regularity, "sample the regularity constant",
        "config", "q", "samples", "grid")
    add("probe", cmd_probe, "power-type slope probe", "q", "samples")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
