"""Command-line front end: ``bica separate|scan|eval|synth|sweep|rerun``."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .driver import SUPPORTS, BicaConfig, likelihood_scan, separate
from .errors import (BicaError, DegenerateSignal, InvalidData, InvalidDf, InvalidDimension,
                     InvalidGrid, InvalidSpec)
from .io import InputError, read_manifest, read_matrix, sha256_file, write_manifest, write_matrix, write_table
from .metrics import amari, sir
from .synth import FIXED_MIXING_3X3, gen_sources, mix, parse_kinds, random_mixing

EXIT_OK, EXIT_INPUT, EXIT_ALGO = 0, 2, 3
INPUT_ERRORS = (InputError, InvalidData, InvalidDimension, InvalidSpec, InvalidGrid, InvalidDf,
                DegenerateSignal)
PATH_FLAGS = ("--input", "--west", "--wtrue", "--atrue", "--strue", "--sest")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("BICA_THREADS", "1")))
    except ValueError:
        return 1


def _config_args(p):
    g = p.add_argument_group("algorithm")
    g.add_argument("--grid", type=int, default=500, help="grid points L (default 500)")
    g.add_argument("--df", type=float, default=3.0, help="weak-learner degrees of freedom (default 3)")
    g.add_argument("--boost-iters", type=int, default=5, help="boosting iterations M (default 5)")
    g.add_argument("--maxit", type=int, default=20, help="outer iterations (default 20)")
    g.add_argument("--tol", type=float, default=1e-8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--restarts", type=int, default=3,
                   help="extra random starts; the highest likelihood run is kept")
    g.add_argument("--sweeps", type=int, default=1, help="fixed-point sweeps per outer iteration")
    g.add_argument("--support", choices=SUPPORTS, default="ball")
    g.add_argument("--threads", type=int, default=_default_threads(),
                   help="worker threads for the per-component density fits "
                        "(default: $BICA_THREADS or 1)")


def _config(args, **override) -> BicaConfig:
    kw = dict(L=args.grid, df=args.df, M=args.boost_iters, maxit=args.maxit, seed=args.seed,
              tol=args.tol, sweeps_per_iter=args.sweeps, restarts=args.restarts,
              support=args.support)
    kw.update(override)
    return BicaConfig(**kw)


def _parse_angles(text):
    try:
        parts = [float(v) for v in text.split(":")]
    except ValueError:
        raise InputError(f"--angles expects start:stop:step, got {text!r}") from None
    if len(parts) == 2:
        parts.append(1.0)
    if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
        raise InputError(f"--angles expects start:stop:step with step > 0, got {text!r}")
    start, stop, step = parts
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


class _Run:
    """Collects artifacts and writes ``manifest.json`` at the end of a command."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = argv
        self.out = args.out
        self.t0 = time.perf_counter()
        self.artifacts = []
        os.makedirs(self.out, exist_ok=True)

    def path(self, name):
        p = os.path.join(self.out, name)
        self.artifacts.append(name)
        return p

    def finish(self, config=None, inputs=(), **extra):
        manifest = {
            "command": self.args.command,
            "argv": self.argv,
            "version": __version__,
            "config": config.to_dict() if config is not None else None,
            "seed": getattr(self.args, "seed", None),
            "inputs": {os.path.abspath(p): sha256_file(p) for p in inputs if p},
            "artifacts": self.artifacts + ["manifest.json"],
            "wall_clock_seconds": time.perf_counter() - self.t0,
        }
        manifest.update(extra)
        write_manifest(os.path.join(self.out, "manifest.json"), manifest)


def cmd_separate(args, argv):
    x = read_matrix(args.input, header=args.header)
    config = _config(args)
    run = _Run(args, argv)
    res = separate(x, config, threads=args.threads)
    write_matrix(run.path("W.csv"), res.unmixing)
    write_matrix(run.path("sources.csv"), res.transform(x), header=args.header)
    write_table(run.path("loglik.csv"), ["iteration", "total_loglik"],
                [(i + 1, v) for i, v in enumerate(res.loglik_per_iter)])
    if args.plot:
        from .plotting import plot_loglik
        plot_loglik(res.loglik_per_iter, run.path("loglik.png"))
    run.finish(config, [args.input], iterations_run=res.iterations_run)
    return EXIT_OK


def cmd_scan(args, argv):
    x = read_matrix(args.input, header=args.header)
    if x.shape[0] != 2:
        raise InvalidDimension(f"scan needs a 2-row input, got {x.shape[0]} rows")
    angles = _parse_angles(args.angles)
    config = _config(args)
    run = _Run(args, argv)
    rows = likelihood_scan(x, angles, config)
    write_table(run.path("scan.csv"), ["angle_deg", "total_loglik"], rows)
    if args.plot:
        from .plotting import plot_scan
        plot_scan(rows, run.path("scan.png"), true_angle=args.true_angle,
                  label=f"M={config.M}")
    run.finish(config, [args.input])
    return EXIT_OK


def _true_unmixing(args):
    if args.wtrue:
        return read_matrix(args.wtrue)
    return np.linalg.inv(read_matrix(args.atrue))


def cmd_eval(args, argv):
    out = {}
    if args.west or args.wtrue or args.atrue:
        if not args.west or not (args.wtrue or args.atrue):
            raise InputError("--west needs --wtrue (or --atrue), and vice versa")
        W, W0 = read_matrix(args.west), _true_unmixing(args)
        if W.shape != W0.shape or W.shape[0] != W.shape[1]:
            raise InputError(f"shape mismatch: W {W.shape} vs true {W0.shape}")
        out["amari_x100"] = 100.0 * amari(W, W0)
    if args.strue or args.sest:
        if not (args.strue and args.sest):
            raise InputError("--strue and --sest must be given together")
        S, Y = read_matrix(args.strue, args.header), read_matrix(args.sest, args.header)
        if S.shape != Y.shape:
            raise InputError(f"shape mismatch: true {S.shape} vs estimated {Y.shape}")
        mean_db, per = sir(S, Y)
        out["mean_sir_db"] = mean_db
        out["per_component_sir"] = per.tolist()
    if not out:
        raise InputError("give --west/--wtrue and/or --strue/--sest")
    print(json.dumps(out))
    return EXIT_OK


def _mixing(spec, m, seed):
    if spec == "random":
        return random_mixing(m, seed)
    if spec == "identity":
        return np.eye(m)
    if spec == "paper3x3":
        if m != 3:
            raise InvalidSpec(f"paper3x3 mixing needs 3 sources, got {m}")
        return FIXED_MIXING_3X3.copy()
    if spec.startswith("rotation:"):
        if m != 2:
            raise InvalidSpec("rotation mixing needs 2 sources")
        from .driver import rotation
        try:
            return rotation(float(spec.split(":", 1)[1])).T
        except ValueError:
            raise InvalidSpec(f"bad rotation angle in {spec!r}") from None
    if os.path.exists(spec):
        return read_matrix(spec)
    raise InvalidSpec(f"unknown --mix {spec!r} (random, identity, paper3x3, rotation:DEG or a CSV path)")


def cmd_synth(args, argv):
    specs = parse_kinds(args.kinds)
    S = gen_sources(specs, args.n, args.seed)
    A = _mixing(args.mix, S.shape[0], args.seed)
    X = mix(S, A)
    run = _Run(args, argv)
    write_matrix(run.path("sources.csv"), S, header=args.header)
    write_matrix(run.path("mixed.csv"), X, header=args.header)
    write_matrix(run.path("A.csv"), A)
    run.finish(None, [], kinds=args.kinds, n=args.n, mix=args.mix)
    return EXIT_OK


def cmd_sweep(args, argv):
    x = read_matrix(args.input, header=args.header)
    W0 = _true_unmixing(args)
    S = read_matrix(args.strue, args.header) if args.strue else None
    try:
        ms = [int(v) for v in args.boost_iters_list.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--boost-iters-list expects integers, got {args.boost_iters_list!r}") from None
    run = _Run(args, argv)
    rows = []
    for m_iters in ms:
        config = _config(args, M=m_iters)
        res = separate(x, config, threads=args.threads)
        sir_db = sir(S, res.transform(x))[0] if S is not None else float("nan")
        rows.append((m_iters, 100.0 * amari(res.unmixing, W0), sir_db))
    write_table(run.path("sweep.csv"), ["M", "amari_x100", "mean_sir_db"], rows)
    if args.plot:
        from .plotting import plot_sweep
        plot_sweep(rows, run.path("sweep.png"))
    run.finish(_config(args), [args.input, args.wtrue or args.atrue, args.strue])
    return EXIT_OK


def cmd_rerun(args, argv):
    manifest = read_manifest(args.manifest)
    recorded = list(manifest.get("argv") or [])
    if not recorded:
        raise InputError(f"{args.manifest}: manifest has no argv")
    for path, digest in manifest.get("inputs", {}).items():
        if not os.path.exists(path) or sha256_file(path) != digest:
            raise InputError(f"input {path} is missing or changed since the recorded run")
    if args.out:
        i = recorded.index("--out")
        recorded[i + 1] = args.out
    return main(recorded)


def build_parser():
    p = argparse.ArgumentParser(prog="bica", description="Boosted-density ICA.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("separate", help="estimate the unmixing matrix and sources")
    s.add_argument("--input", required=True, help="CSV, rows = mixtures, columns = samples")
    s.add_argument("--out", required=True)
    s.add_argument("--header", action="store_true", help="CSV files carry a header row")
    s.add_argument("--plot", action="store_true", help="also render loglik.png")
    _config_args(s)
    s.set_defaults(func=cmd_separate)

    s = sub.add_parser("scan", help="log-likelihood against rotation angle (2 rows)")
    s.add_argument("--input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--angles", default="0:180:1", help="start:stop:step in degrees, inclusive")
    s.add_argument("--header", action="store_true")
    s.add_argument("--plot", action="store_true", help="also render scan.png")
    s.add_argument("--true-angle", type=float, default=None, help="mark this angle on the plot")
    _config_args(s)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("eval", help="Amari metric and/or SIR as JSON")
    s.add_argument("--west")
    s.add_argument("--wtrue")
    s.add_argument("--atrue", help="true mixing matrix; its inverse is used as --wtrue")
    s.add_argument("--strue")
    s.add_argument("--sest")
    s.add_argument("--header", action="store_true")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="generate and mix synthetic sources")
    s.add_argument("--kinds", required=True,
                   help="e.g. uniform,gmm(w=0.5/0.5,mu=-1/1,sd=0.3/0.3),laplace,student_t(5)")
    s.add_argument("--n", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mix", default="random",
                   help="random, identity, paper3x3, rotation:DEG or a CSV path")
    s.add_argument("--out", required=True)
    s.add_argument("--header", action="store_true")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("sweep", help="separation quality against boosting iterations M")
    s.add_argument("--input", required=True)
    s.add_argument("--wtrue")
    s.add_argument("--atrue")
    s.add_argument("--strue")
    s.add_argument("--boost-iters-list", default="1,2,5,10,20,50")
    s.add_argument("--out", required=True)
    s.add_argument("--header", action="store_true")
    s.add_argument("--plot", action="store_true", help="also render sweep.png")
    _config_args(s)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("rerun", help="repeat a run recorded in manifest.json")
    s.add_argument("manifest")
    s.add_argument("--out", help="write to this directory instead of the recorded one")
    s.set_defaults(func=cmd_rerun)
    return p


def _recorded_argv(argv):
    out = list(argv)
    for i, tok in enumerate(out[:-1]):
        if tok in PATH_FLAGS or (tok == "--mix" and os.path.exists(out[i + 1])):
            out[i + 1] = os.path.abspath(out[i + 1])
    if "--out" in out:
        i = out.index("--out")
        out[i + 1] = os.path.abspath(out[i + 1])
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "sweep" and not (args.wtrue or args.atrue):
        parser.print_usage(sys.stderr)
        print("bica sweep: error: --wtrue or --atrue is required", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args, _recorded_argv(argv))
    except INPUT_ERRORS as exc:
        print(f"bica {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BicaError as exc:
        print(f"bica {args.command}: algorithm error: {exc}", file=sys.stderr)
        return EXIT_ALGO
    except np.linalg.LinAlgError as exc:
        print(f"bica {args.command}: algorithm error: {exc}", file=sys.stderr)
        return EXIT_ALGO


if __name__ == "__main__":
    sys.exit(main())
