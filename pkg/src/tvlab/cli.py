"""tvlab command line.

Exit codes: 0 success / verification passed, 2 usage or domain error,
3 verification failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import localtime, subordinator, truncvar
from .errors import TvlabError
from .paths import (
    SimConfig,
    generate_bm,
    read_path_csv,
    write_columns_csv,
    write_path_csv,
)
from .skorokhod import reflect, solve

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 2, 3


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _q_grid(spec: str) -> list[float]:
    """``lo:hi:log|lin:n`` or a comma-separated list."""
    if ":" not in spec:
        return _floats(spec)
    lo, hi, kind, n = spec.split(":")
    lo, hi, n = float(lo), float(hi), int(n)
    if kind == "log":
        return list(np.geomspace(lo, hi, n))
    if kind == "lin":
        return list(np.linspace(lo, hi, n))
    raise argparse.ArgumentTypeError(f"grid kind must be log or lin, got {kind!r}")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tvlab", description="Truncated variation laboratory.")
    p.add_argument("--version", action="version", version=f"tvlab {_version()}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate-bm", help="write a Brownian path as CSV")
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=1e-4)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--index", type=int, default=0)
    s.add_argument("--out", required=True)

    s = sub.add_parser("ttv", help="truncated variation of a CSV path")
    s.add_argument("--input", required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--running", action="store_true", help="emit time,running_ttv CSV")
    s.add_argument("--json", action="store_true")
    s.add_argument("--out")

    s = sub.add_parser("oracle", help="exhaustive truncated variation")
    s.add_argument("mode", choices=["ttv", "utv", "dtv"])
    s.add_argument("--input", required=True)
    s.add_argument("--c", type=float, required=True)

    s = sub.add_parser("skorokhod", help="two-sided reflection of a CSV path")
    s.add_argument("--input", required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--x", type=float, help="anchor (default: lazy anchor)")
    s.add_argument("--out", required=True)

    s = sub.add_parser("localtime", help="lattice local times of a CSV path")
    s.add_argument("--input", required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--eps", type=float)
    s.add_argument("--estimator", choices=["crossing", "occupation"], default="crossing")
    s.add_argument("--grid-correction", action="store_true")
    s.add_argument("--out", required=True)

    s = sub.add_parser("exponent", help="table of the exponent, I1, I2, W(c), Z(c)")
    s.add_argument("--c", type=float, required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--q", type=_floats)
    g.add_argument("--q-grid", type=_q_grid)
    s.add_argument("--out")

    verify = sub.add_parser("verify", help="Monte Carlo and oracle verifications")
    vsub = verify.add_subparsers(dest="experiment", required=True)

    def common(sp, seed):
        sp.add_argument("--seed", type=int, default=seed)
        sp.add_argument("--fresh-seed", action="store_true")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--json", action="store_true")
        sp.add_argument("--out")

    s = vsub.add_parser("exponent")
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--q", type=_floats, default=[0.5, 1.0, 2.0])
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=1e-4)
    s.add_argument("--paths", type=int, default=4000)
    s.add_argument("--refine", action="store_true",
                   help="also check that halving dt shrinks the median error")
    s.add_argument("--refine-seeds", type=int, default=3)
    s.add_argument("--refine-paths", type=int, default=40000)
    common(s, 7)

    s = vsub.add_parser("representation")
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=1e-4)
    s.add_argument("--paths", type=int, default=2000)
    s.add_argument("--target", choices=["ttv", "path"], default="ttv")
    s.add_argument("--estimator", choices=["crossing", "occupation"], default="crossing")
    s.add_argument("--eps", type=float)
    common(s, 11)

    s = vsub.add_parser("tails")
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=1e-4)
    s.add_argument("--paths", type=int, default=10000)
    common(s, 13)

    s = vsub.add_parser("tanaka")
    s.add_argument("--c", type=float, default=0.5)
    s.add_argument("--dt", type=float, default=1e-5)
    s.add_argument("--seeds", type=int, default=50)
    s.add_argument("--eps", type=float)
    s.add_argument("--estimator", choices=["crossing", "occupation"], default="crossing")
    common(s, 5)

    s = vsub.add_parser("oracle")
    s.add_argument("--paths", type=int, default=1000)
    s.add_argument("--max-len", type=int, default=12)
    common(s, 1)
    return p


def _master_seed(args) -> int:
    if args.fresh_seed:
        return int.from_bytes(os.urandom(4), "little")
    env = os.environ.get("TVLAB_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _emit(args, payload: str, summary: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    if getattr(args, "json", False):
        print(payload)
    else:
        print(summary)


def _merge(rep, other, prefix: str) -> None:
    """Fold a secondary report into ``rep`` under a name prefix."""
    rep.config[prefix + "config"] = other.config
    for row in other.estimates:
        rep.estimates.append({**row, "name": prefix + row["name"]})
    for row in other.statistics:
        rep.statistics.append({**row, "name": prefix + row["name"]})
    for k, v in other.thresholds.items():
        rep.thresholds[prefix + k] = v
    rep.passed = bool(rep.passed and other.passed)


def _verify(args) -> int:
    seed = _master_seed(args)
    threads = args.threads
    exp = args.experiment
    if exp == "exponent":
        rep = subordinator.empirical_exponent(
            args.c, args.q, args.t, args.dt, args.paths, seed, threads
        )
        if args.refine:
            seeds = tuple(seed + 1 + k for k in range(args.refine_seeds))
            ref = subordinator.exponent_refinement(
                args.c, args.q, args.t, args.dt, 2, args.refine_paths, seeds, threads
            )
            _merge(rep, ref, "refine_")
    elif exp == "representation":
        rep = subordinator.representation_test(
            args.c, args.t, args.dt, args.paths, seed, args.target, args.estimator,
            args.eps, threads=threads,
        )
    elif exp == "tails":
        rep = subordinator.tail_check_tau(args.c, args.dt, args.paths, seed, threads)
        scaling = subordinator.tau_scaling_test(args.c, 2.0, args.dt, args.paths, seed + 1, threads)
        rep.config["scaling_seed"] = seed + 1
        _merge(rep, scaling, "scaling_")
        calib = localtime.localtime_calibration(args.paths, args.dt, seed=seed + 2,
                                                threads=threads)
        _merge(rep, calib, "calibration_")
    elif exp == "tanaka":
        rep = localtime.tanaka_experiment(
            args.c, args.dt, args.seeds, seed, eps=args.eps, estimator=args.estimator,
            threads=threads,
        )
    else:
        rep = truncvar.oracle_suite(args.paths, args.max_len, seed)
    lines = [f"{rep.experiment}: {'PASS' if rep.passed else 'FAIL'}"]
    for row in rep.estimates + rep.statistics:
        se = f" +/- {row['se']:.3g}" if row.get("se") is not None else ""
        lines.append(f"  {row['name']} = {row['value']}{se}")
    _emit(args, rep.to_json(), "\n".join(lines))
    return EXIT_OK if rep.passed else EXIT_FAILED


def _exponent_table(args) -> None:
    qs = args.q if args.q is not None else args.q_grid
    c = args.c
    cols = {"q": [], "phi": [], "I1": [], "I2": [], "W": [], "Z": []}
    for q in qs:
        i1, i2 = subordinator.excursion_terms(c, q)
        cols["q"].append(q)
        cols["phi"].append(subordinator.levy_exponent(c, q))
        cols["I1"].append(i1)
        cols["I2"].append(i2)
        cols["W"].append(subordinator.scale_w(q, c))
        cols["Z"].append(subordinator.scale_z(q, c))
    if args.out:
        write_columns_csv(args.out, cols)
    else:
        write_columns_csv(sys.stdout, cols)


def dispatch(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cmd = args.command
        if cmd == "simulate-bm":
            path = generate_bm(SimConfig(args.T, args.dt, args.seed, args.index))
            write_path_csv(args.out, path)
        elif cmd == "ttv":
            path = read_path_csv(args.input)
            res = truncvar.ttv_stream(path, args.c)
            if args.running:
                write_columns_csv(args.out or sys.stdout,
                                  {"time": res.times, "running_ttv": res.running_ttv})
            else:
                payload = json.dumps(res.as_dict(), separators=(",", ":"))
                summary = (f"c={res.c} ttv={res.ttv!r} utv={res.utv!r} dtv={res.dtv!r}")
                _emit(args, payload, summary)
        elif cmd == "oracle":
            path = read_path_csv(args.input)
            print(repr(truncvar.ttv_oracle(path, args.c, args.mode)))
        elif cmd == "skorokhod":
            path = read_path_csv(args.input)
            sol = solve(path, args.c) if args.x is None else reflect(path, args.c, args.x)
            write_columns_csv(args.out, {"time": path.times, "f": path.values, "g": sol.g,
                                         "h": sol.h, "U": sol.U, "D": sol.D})
        elif cmd == "localtime":
            path = read_path_csv(args.input)
            lt = localtime.lattice_local_times(path, args.c, args.estimator, args.eps,
                                               args.grid_correction)
            n = lt.times.size
            write_columns_csv(args.out, {
                "time": np.tile(lt.times, lt.levels.size),
                "level_index": np.repeat(lt.levels, n),
                "L": lt.L.reshape(-1),
            })
        elif cmd == "exponent":
            _exponent_table(args)
        elif cmd == "verify":
            return _verify(args)
    except (TvlabError, OSError) as exc:
        print(f"tvlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
