"""Command-line interface: ``update``, ``track``, ``dist`` and ``bench``.

Exit codes: 0 on success, 1 on domain errors (deflating update, singular W,
rank deficiency), 2 on usage and input errors.
"""

import argparse
import csv
import sys

import numpy as np

from . import formats
from .bench import time_update
from .core import DEFLATION_TOL, Factorization, grood_update
from .exceptions import DeflatingUpdateError, ParseError, UpdateError
from .grassmann import principal_angles
from .streaming import Method, TrackerConfig, track


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return values


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="subspace-update",
        description="Rank-one updates of orthogonal factorizations X = U W.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("update", help="apply one rank-one update")
    p.add_argument("--u", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--ab", required=True, help="update stream file with exactly one record")
    p.add_argument("--out-u", required=True)
    p.add_argument("--out-w", required=True)
    p.add_argument("--tol", type=_positive_float, default=DEFLATION_TOL)

    p = sub.add_parser("track", help="apply a stream of updates and write a CSV report")
    p.add_argument("--u", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--stream", required=True)
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.GEODESIC.value)
    p.add_argument("--reorth-every", type=int, default=0)
    p.add_argument("--report", required=True)
    p.add_argument("--out-u")
    p.add_argument("--out-w")
    p.add_argument("--tol", type=_positive_float, default=DEFLATION_TOL)

    p = sub.add_parser("dist", help="Riemannian distance between two subspaces")
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--angles", action="store_true", help="also print all principal angles")

    p = sub.add_parser("bench", help="time single updates on random instances")
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--p", type=_int_list, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.GEODESIC.value)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _load_factorization(u_path, w_path):
    U = formats.read_matrix(u_path)
    W = formats.read_matrix(w_path)
    try:
        return Factorization(U, W)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read_stream(path, f):
    (n, p), updates = formats.read_update_stream(path, with_dims=True)
    if (n, p) != f.shape:
        raise UsageError(f"stream is {n}x{p} but the factorization is {f.shape[0]}x{f.shape[1]}")
    return updates


def cmd_update(args):
    f = _load_factorization(args.u, args.w)
    updates = _read_stream(args.ab, f)
    if len(updates) != 1:
        raise UsageError(f"--ab must hold exactly one record, found {len(updates)}")
    out = grood_update(f, updates[0], tol=args.tol)
    formats.write_matrix(args.out_u, out.factorization.u)
    formats.write_matrix(args.out_w, out.factorization.w)
    print(f"distance_rad={formats.format_float(out.distance)}")
    print(f"kind={out.kind.value}")
    return 0


def cmd_track(args):
    if args.reorth_every < 0:
        raise UsageError("--reorth-every must be nonnegative")
    f = _load_factorization(args.u, args.w)
    updates = _read_stream(args.stream, f)
    cfg = TrackerConfig(
        reorth_every=args.reorth_every, deflation_tol=args.tol, method=Method(args.method)
    )
    final, reports = track(f, updates, cfg)
    with open(args.report, "w", newline="") as fh:
        formats.write_report(fh, reports)
    if args.out_u:
        formats.write_matrix(args.out_u, final.u)
    if args.out_w:
        formats.write_matrix(args.out_w, final.w)
    return 0


def cmd_dist(args):
    U = formats.read_matrix(args.u)
    V = formats.read_matrix(args.v)
    if U.shape != V.shape:
        raise UsageError(f"shape mismatch: {U.shape} vs {V.shape}")
    thetas = principal_angles(U, V)
    print(f"distance_rad={formats.format_float(np.linalg.norm(thetas))}")
    if args.angles:
        print("angles_rad=" + " ".join(formats.format_float(t) for t in thetas))
    return 0


def cmd_bench(args):
    if args.reps < 1:
        raise UsageError("--reps must be positive")
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n", "p", "method", "median_ns", "mean_ns"])
    for n in args.n:
        for p in args.p:
            if not p < n:
                continue
            row = time_update(n, p, args.reps, args.method, args.seed)
            writer.writerow([n, p, row.method, f"{row.median_ns:.17g}", f"{row.mean_ns:.17g}"])
    return 0


COMMANDS = {"update": cmd_update, "track": cmd_track, "dist": cmd_dist, "bench": cmd_bench}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DeflatingUpdateError as exc:
        where = f" at step {exc.step_index}" if exc.step_index is not None else ""
        print(f"error: deflating update{where}", file=sys.stderr)
        return 1
    except UpdateError as exc:
        where = f" at step {exc.step_index}" if exc.step_index is not None else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return 1
    except (ParseError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
