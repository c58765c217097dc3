"""Command-line front end.

Exit codes: 0 certified, 1 input or parameter error, 2 certification
impossible (no feasible constants, no minorization, unreachable set).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from contextlib import nullcontext
from datetime import datetime, timezone
from typing import List, Optional

import numpy as np

from . import __version__
from .certify import certify_fixed, fit_K, optimize_constants, verify_pointwise_contraction
from .errors import (
    CertError,
    ContractViolation,
    EmptyLevelSet,
    HarrisError,
    NoFeasiblePoint,
    NoMinorization,
    SupportMismatch,
    Unreachable,
)
from .examples import DEMOS, get_demo
from .harris_alt import certify_averaged, check_alt, default_R
from .ingest import InputError, LoadedKernel, parse_indices, read_kernel, read_measure, read_vector
from .core import LyapunovWeight
from .report import (
    HarrisReport,
    alt_dict,
    averaged_dict,
    averaging_dict,
    check_dict,
    contraction_dict,
    convergence_dict,
    drift_dict,
    minorization_dict,
)
from .solve import exact_invariant, invariant_measure

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2
INFEASIBLE = (NoFeasiblePoint, NoMinorization, EmptyLevelSet, Unreachable, SupportMismatch, CertError, ContractViolation)


def _load(args, strict: bool = False) -> LoadedKernel:
    if args.kernel.startswith("demo:"):
        ex = get_demo(args.kernel[5:])
        dev = float(np.max(np.abs(ex.kernel.rows.sum(axis=1) - 1.0)))
        loaded = LoadedKernel(ex.kernel, ex.V, args.kernel, dev)
    else:
        loaded = read_kernel(args.kernel)
    V = loaded.V
    if args.v is not None:
        V = LyapunovWeight(read_vector(args.v, loaded.kernel.n))
    if V is None:
        raise InputError("no Lyapunov weight: pass V as a file / inline list or embed 'v' in the JSON kernel")
    if strict:
        V = LyapunovWeight(V.values, strict=True)
    return LoadedKernel(loaded.kernel, V, loaded.source, loaded.row_sum_max_dev)


def _digest(loaded: LoadedKernel) -> dict:
    v = loaded.V.values
    return {
        "source": loaded.source,
        "n": loaded.kernel.n,
        "v_min": float(v.min()),
        "v_max": float(v.max()),
        "row_sum_max_dev": loaded.row_sum_max_dev,
    }


def _certificate(args, loaded: LoadedKernel):
    k, V = loaded.kernel, loaded.V
    fixed = args.gamma is not None or args.r is not None
    if fixed:
        if args.gamma is None or args.r is None:
            raise InputError("--gamma and --r must be given together")
        K = args.k if args.k is not None else fit_K(k, V, args.gamma)
        alpha0 = args.alpha0
        if alpha0 is None and args.beta is not None:
            alpha0 = args.beta * max(K, 1e-12)
        return certify_fixed(k, V, args.gamma, args.r, alpha0=alpha0, K=args.k)
    if any(x is not None for x in (args.k, args.alpha0, args.beta)):
        raise InputError("--k / --alpha0 / --beta need --gamma and --r")
    return optimize_constants(k, V)


def _fill_certify(report: HarrisReport, args, loaded: LoadedKernel):
    cert = _certificate(args, loaded)
    report.drift = drift_dict(cert.drift)
    report.minorization = minorization_dict(cert.minorization)
    report.contraction = contraction_dict(cert)
    check = verify_pointwise_contraction(loaded.kernel, loaded.V, cert)
    report.check = check_dict(check)
    report.verdicts.update(
        drift=cert.drift.valid,
        minorization=cert.minorization.residual_ok,
        contraction=cert.alpha_bar < 1.0,
        verification=check.passed,
    )
    return cert


def cmd_certify(args, report: HarrisReport):
    loaded = _load(args)
    report.input = _digest(loaded)
    _fill_certify(report, args, loaded)


def cmd_invariant(args, report: HarrisReport):
    if not args.tol > 0:
        raise InputError(f"--tol must be > 0, got {args.tol!r}")
    loaded = _load(args)
    report.input = _digest(loaded)
    cert = _fill_certify(report, args, loaded)
    mu0 = read_measure(args.mu0, loaded.kernel.n)
    run = invariant_measure(loaded.kernel, loaded.V, cert, tol=args.tol, mu0=mu0, keep_path=args.curve is not None)
    report.convergence = convergence_dict(run, args.tol)
    report.verdicts["invariant"] = run.certified_error <= args.tol
    if args.curve:
        exact = exact_invariant(loaded.kernel).weights
        w = 1.0 + cert.beta * loaded.V.values
        with open(args.curve, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh)
            out.writerow(["n", "rho_beta_to_mustar", "certified_bound"])
            for n, (mu, bound) in enumerate(zip(run.path, run.bounds)):
                out.writerow([n, repr(float(np.abs(mu - exact) @ w)), repr(float(bound))])


def cmd_alt(args, report: HarrisReport):
    loaded = _load(args, strict=True)
    report.input = _digest(loaded)
    k, V = loaded.kernel, loaded.V
    S = parse_indices(args.s, k.n)
    alt = check_alt(k, V, S, args.gamma_tilde, args.b)
    report.alt = alt_dict(alt)
    report.verdicts["alt_assumptions"] = alt.valid
    if not alt.valid:
        raise CertError("indicator drift inequality fails at some state")
    R = args.r if args.r is not None else default_R(alt)
    result = certify_averaged(k, V, alt, R, n_max=args.ell_max)
    report.averaging = averaging_dict(result.averaging)
    report.averaged = averaged_dict(result)
    report.verdicts.update(
        averaged_drift=result.drift.valid,
        averaged_minorization=result.minorization.residual_ok,
        averaged_contraction=result.certificate.alpha_bar < 1.0,
        averaged_verification=result.check.passed,
    )


def cmd_demo(args) -> int:
    if not args.name:
        for name, build in sorted(DEMOS.items()):
            print(f"demo:{name:10s} {build().description}")
        return EXIT_OK
    ex = get_demo(args.name)
    payload = {"n": ex.kernel.n, "rows": ex.kernel.rows.tolist(), "v": ex.V.values.tolist()}
    if ex.kernel.space.labels:
        payload["labels"] = list(ex.kernel.space.labels)
    print(json.dumps(payload))
    return EXIT_OK


def _tuning(p: argparse.ArgumentParser):
    g = p.add_argument_group("fixed constants (default: grid search)")
    g.add_argument("--gamma", type=float, help="drift rate gamma in (0, 1)")
    g.add_argument("--k", type=float, help="drift constant K (default: tightest fit)")
    g.add_argument("--r", type=float, help="level-set radius R")
    g.add_argument("--alpha0", type=float, help="alpha0 in (0, alpha); default alpha/2")
    g.add_argument("--beta", type=float, help="scale beta; sets alpha0 = beta * K")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harris", description="Certify geometric ergodicity of finite Markov kernels.")
    parser.add_argument("--version", action="version", version=f"harris {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("kernel", help="CSV / JSON kernel file, or demo:<name>")
        p.add_argument("v", nargs="?", help="Lyapunov weight: file or inline comma list")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "pretty"), default="json")

    p = sub.add_parser("certify", help="certify a one-step contraction")
    common(p)
    _tuning(p)

    p = sub.add_parser("invariant", help="certified invariant measure")
    common(p)
    _tuning(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--mu0", default="uniform", help='"uniform", "delta:<i>", or a vector file')
    p.add_argument("--curve", help="CSV path for the convergence curve")

    p = sub.add_parser("alt", help="indicator-drift assumptions and the averaged kernel")
    common(p)
    p.add_argument("--s", required=True, help="comma-separated indices of S")
    p.add_argument("--gamma-tilde", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--r", type=float, help="level-set radius (default 1.05 * 2b/(1-gamma_tilde))")
    p.add_argument("--ell-max", type=int, help="cap on the search for ell (default 10 * n)")

    p = sub.add_parser("demo", help="list built-in chains or dump one as JSON")
    p.add_argument("name", nargs="?")
    return parser


COMMANDS = {"certify": cmd_certify, "invariant": cmd_invariant, "alt": cmd_alt}


def _emit(report: HarrisReport, args):
    text = report.to_json() if args.format == "json" else report.pretty()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _thread_limit():
    threads = os.environ.get("HARRIS_THREADS")
    if not threads:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(threads)))


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "demo":
        try:
            return cmd_demo(args)
        except HarrisError as exc:
            print(f"harris: {exc}", file=sys.stderr)
            return EXIT_INPUT

    report = HarrisReport(
        command=args.command,
        input={"source": args.kernel},
        generated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    with _thread_limit():
        try:
            COMMANDS[args.command](args, report)
        except INFEASIBLE as exc:
            report.error = f"{type(exc).__name__}: {exc}"
            report.verdicts.setdefault("certified", False)
            if "v_min" in report.input:
                _emit(report, args)
            print(f"harris: {report.error}", file=sys.stderr)
            return EXIT_INFEASIBLE
        except (HarrisError, OSError) as exc:
            print(f"harris: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_INPUT
    _emit(report, args)
    return EXIT_OK if report.passed else EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
