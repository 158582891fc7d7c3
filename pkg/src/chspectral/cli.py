"""Command-line front end: sweeps, spectra, and verification suites.

Exit codes: 0 success, 1 a verification suite failed, 2 usage or config
error.  All floats are serialized with 17 significant digits so identical
inputs give byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .coefficient import CoefficientError, load_coefficient
from .corpus import CorpusMember, default_corpus
from .floquet import (
    GUARD_BAND,
    auxiliary_spectrum,
    discriminant_sweep,
    periodic_spectrum,
)
from .hamiltonians import SmoothDomainError, hamiltonian_fields
from .shooting import DEFAULT_STEPS
from .suites import SUITE_NAMES, run_suite
from .variations import gradient_bundle, gradient_table


def _g(x):
    return format(float(x), ".17g")


def _fail(message):
    print(f"chspectral: {message}", file=sys.stderr)
    raise SystemExit(2)


def _power_of_two(k):
    return k > 0 and (k & (k - 1)) == 0


def build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="PATH",
                        help="coefficient spec (JSON); verify runs the "
                             "built-in corpus when omitted")
    shared.add_argument("--n", type=int, default=256,
                        help="grid size for field sampling (power of two)")
    shared.add_argument("--steps", type=int, default=DEFAULT_STEPS,
                        help="integrator steps per period (power of two)")
    shared.add_argument("--lambda-min", dest="lambda_min", type=float,
                        default=None, help="lower edge of the spectral window")
    shared.add_argument("--lambda-max", dest="lambda_max", type=float,
                        default=None, help="upper edge of the spectral window")
    shared.add_argument("--count", type=int, default=None,
                        help="sweep samples / max eigenvalue count")
    shared.add_argument("--eps", type=float, default=1e-5,
                        help="step for finite-difference checks")
    shared.add_argument("--out", metavar="DIR",
                        help="write artifacts here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="chspectral",
        description="Floquet spectra, spectral gradients, and canonical "
                    "conjugacy checks for a periodic string with point masses.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("discriminant", parents=[shared],
                   help="CSV sweep of the Floquet discriminant")
    sub.add_parser("spectrum", parents=[shared],
                   help="CSV of band edges and auxiliary eigenvalues")
    verify = sub.add_parser("verify", parents=[shared],
                            help="run a verification suite, emit a JSON report")
    verify.add_argument("suite", choices=SUITE_NAMES + ("all",))
    return parser


def _validated(args):
    if not _power_of_two(args.n):
        _fail(f"--n must be a positive power of two, got {args.n}")
    if not _power_of_two(args.steps):
        _fail(f"--steps must be a positive power of two, got {args.steps}")
    if args.count is not None and args.count < 1:
        _fail(f"--count must be positive, got {args.count}")
    if args.eps <= 0.0:
        _fail(f"--eps must be positive, got {args.eps}")


def _load_config(args):
    if not args.config:
        _fail(f"{args.command} needs --config")
    try:
        return load_coefficient(args.config)
    except (OSError, CoefficientError) as exc:
        _fail(str(exc))


def _emit(text, out_dir, filename):
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, filename)
        with open(path, "w") as fh:
            fh.write(text)
        return path
    sys.stdout.write(text)
    return None


def cmd_discriminant(args):
    m = _load_config(args)
    lo = 0.0 if args.lambda_min is None else args.lambda_min
    hi = 50.0 if args.lambda_max is None else args.lambda_max
    count = 200 if args.count is None else args.count
    lines = ["lambda,delta"]
    if hi > lo:
        lams = np.linspace(lo, hi, count)
        deltas = discriminant_sweep(m, lams, steps=args.steps)
        lines += [f"{_g(lam)},{_g(d)}" for lam, d in zip(lams, deltas)]
    _emit("\n".join(lines) + "\n", args.out, "discriminant.csv")
    return 0


def cmd_spectrum(args):
    m = _load_config(args)
    lo = GUARD_BAND if args.lambda_min is None else max(args.lambda_min, GUARD_BAND)
    hi = 50.0 if args.lambda_max is None else args.lambda_max
    rows = []
    if hi > lo:
        counters = {"periodic": 0, "antiperiodic": 0}
        for edge in periodic_spectrum(m, lo, hi, steps=args.steps):
            counters[edge.kind] += 1
            rho = 1.0 if edge.kind == "periodic" else -1.0
            rows.append((edge.lam, edge.kind, counters[edge.kind], rho,
                         edge.multiplicity == 2))
        for pt in auxiliary_spectrum(m, lam_min=lo, lam_max=hi,
                                     count=args.count, steps=args.steps):
            rows.append((pt.mu, "aux", pt.index, pt.rho, pt.degenerate))
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = ["kind,index,lambda,rho,degenerate"]
    lines += [f"{kind},{idx},{_g(lam)},{_g(rho)},{'true' if deg else 'false'}"
              for lam, kind, idx, rho, deg in rows]
    _emit("\n".join(lines) + "\n", args.out, "spectrum.csv")
    return 0


def _gradient_csv(m, n, count, steps):
    pts = auxiliary_spectrum(m, count=count, steps=steps)
    pt = next((p for p in pts if not p.degenerate), None)
    if pt is None:
        return None
    bundle = gradient_bundle(m, pt, steps=steps)
    xs, d_mu, d_log, d_f, d_g = gradient_table(bundle, n)
    lines = ["x,d_mu,d_logrho,d_f,d_g"]
    lines += [",".join(_g(c) for c in row)
              for row in zip(xs, d_mu, d_log, d_f, d_g)]
    return "\n".join(lines) + "\n"


def _fields_csv(m, n):
    xs, j_side, k_side, diff = hamiltonian_fields(m, n)
    lines = ["x,j_gradh2,k_gradh3,residual"]
    lines += [",".join(_g(c) for c in row)
              for row in zip(xs, j_side, k_side, diff)]
    return "\n".join(lines) + "\n"


def _verify_artifacts(args, members, suites_run):
    members = default_corpus() if members is None else members
    if "gradients" in suites_run:
        for member in members:
            csv = _gradient_csv(member.m, args.n,
                                3 if args.count is None else args.count,
                                args.steps)
            if csv is not None:
                _emit(csv, args.out, f"gradients_{member.name}.csv")
    if "hamiltonian" in suites_run:
        for member in members:
            if member.m.has_atoms:
                continue
            _emit(_fields_csv(member.m, args.n), args.out,
                  f"hamiltonian_{member.name}.csv")


def cmd_verify(args):
    if args.config:
        try:
            members = [CorpusMember("config", load_coefficient(args.config))]
        except (OSError, CoefficientError) as exc:
            _fail(str(exc))
        strict = True
    else:
        members, strict = None, False
    count = 3 if args.count is None else args.count
    try:
        results = run_suite(args.suite, members=members, strict=strict,
                            n=args.n, eps=args.eps, count=count,
                            steps=args.steps)
    except (ValueError, SmoothDomainError) as exc:
        _fail(str(exc))
    for name, report in results:
        for note in report.notes:
            print(f"{name}: {note}", file=sys.stderr)
    if args.out:
        for name, report in results:
            path = _emit(report.to_json() + "\n", args.out, f"verify_{name}.json")
            state = "PASS" if report.passed else "FAIL"
            print(f"{name}: {state} ({len(report.residuals)} cases) -> {path}")
        _verify_artifacts(args, members, [name for name, _ in results])
    else:
        docs = [report.to_dict() for _, report in results]
        payload = docs[0] if len(docs) == 1 else docs
        print(json.dumps(payload, indent=2))
    return 0 if all(report.passed for _, report in results) else 1


def entry(argv=None):
    args = build_parser().parse_args(argv)
    _validated(args)
    if args.command == "discriminant":
        return cmd_discriminant(args)
    if args.command == "spectrum":
        return cmd_spectrum(args)
    return cmd_verify(args)


def main(argv=None):
    raise SystemExit(entry(argv))
