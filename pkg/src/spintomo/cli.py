"""Batch command-line front end.

Exit codes: 0 success, 1 validation or physicality failure, 2 usage error,
3 I/O error (unreadable, unwritable or malformed JSON files).
"""

from __future__ import annotations

import argparse
import csv
import json
import secrets
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import cmatrix, io, selftest
from .errors import DimensionMismatch, InvalidQuadruple, SpinTomoError, ValidationFailure
from .geometry import PurityClass, quadruple_from_triple, random_quadruple
from .multiqubit import EXHAUSTIVE_LIMIT, TensorScheme, forward_n, inverse_n, verify_tensor_identities
from .scheme import Spin12Scheme, build_scheme, scheme_diagnostics
from .tomography import (
    bloch_state,
    estimate_state,
    forward,
    inverse,
    is_physical,
    random_mixed_state,
    random_pure_state,
    simulate_counts,
    trial_seed,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

MODES = {"pure": PurityClass.ALL_PURE, "mixed": PurityClass.ALL_MIXED, "heterogeneous": PurityClass.HETEROGENEOUS}

CSV_COLUMNS = ("shots", "trial", "base_seed", "trial_seed", "frobenius_error", "min_eigenvalue", "trace")


class UsageError(Exception):
    """Raised for semantically invalid flag combinations (exit 2)."""


def _print_json(doc) -> None:
    print(json.dumps(doc, indent=2))


def _print_diagnostics(diag, label: str) -> None:
    status = "PASS" if diag.passed else "FAIL"
    print(f"scheme {label or '(unlabelled)'}: {status}")
    for c in diag.checks:
        flag = "ok  " if c.passed else ("FAIL" if c.asserted else "info")
        print(f"  {flag} {c.name:<28} {c.value:.3e}  (tol {c.tol:.0e})")


def _print_report_failures(report) -> None:
    for msg in report.failures:
        print(f"  - {msg}", file=sys.stderr)


# -- scheme ---------------------------------------------------------------------


def _read_vectors(path: str) -> np.ndarray:
    doc = io.read_json(path)
    if isinstance(doc, dict):
        doc = doc.get("vectors")
    try:
        vectors = np.array(doc, dtype=float)
    except (TypeError, ValueError):
        raise UsageError(f"{path}: expected a list of 3-vectors or an object with 'vectors'") from None
    if vectors.ndim != 2 or vectors.shape[1] != 3 or vectors.shape[0] not in (3, 4):
        raise UsageError(f"{path}: expected 3 or 4 Bloch vectors, got shape {vectors.shape}")
    return vectors


def cmd_scheme_new(args) -> int:
    if args.preset:
        vectors = io.preset_vectors(args.preset)
        label = args.label or args.preset
    elif args.vectors:
        vectors = _read_vectors(args.vectors)
        if len(vectors) == 3:
            vectors = quadruple_from_triple(*vectors).vectors
        label = args.label
    else:
        vectors = random_quadruple(args.random, MODES[args.mode]).vectors
        label = args.label or f"random-{args.mode}-{args.random}"
    try:
        s = build_scheme(vectors, label=label, route=args.route)
    except InvalidQuadruple as exc:
        print(f"error: {exc}", file=sys.stderr)
        _print_report_failures(exc.report)
        return EXIT_FAIL
    diag = scheme_diagnostics(s)
    io.save_scheme(args.out, s)
    _print_diagnostics(diag, s.label)
    print(f"wrote {args.out}")
    return EXIT_OK if diag.passed else EXIT_FAIL


def cmd_scheme_validate(args) -> int:
    try:
        s = io.load_scheme(args.file)
    except ValidationFailure as exc:
        report = getattr(exc.__cause__, "report", None)
        if args.json:
            _print_json({"passed": False, "error": str(exc), "geometry": report.to_dict() if report else None})
        else:
            print(f"scheme {args.file}: FAIL", file=sys.stderr)
            print(f"  {exc}", file=sys.stderr)
        return EXIT_FAIL
    diag = scheme_diagnostics(s)
    if args.json:
        _print_json(diag.to_dict())
    else:
        _print_diagnostics(diag, s.label)
    return EXIT_OK if diag.passed else EXIT_FAIL


# -- map ------------------------------------------------------------------------


def _load_any_scheme(path: str):
    kind, obj = io.load_any(path)
    if kind not in ("scheme", "tensor_scheme"):
        raise UsageError(f"{path} holds a {kind} document, expected a scheme or tensor scheme")
    return obj


def cmd_map_forward(args) -> int:
    s = _load_any_scheme(args.scheme)
    rho = io.load_state(args.state)
    t = forward(rho, s) if isinstance(s, Spin12Scheme) else forward_n(rho, s)
    io.save_tomogram(args.out, t)
    print("w = " + " ".join(f"{x:.12g}" for x in t.w))
    print(f"wrote {args.out}")
    return EXIT_OK


def _physical_n(rho: np.ndarray, tol: float) -> bool:
    return abs(np.trace(rho) - 1.0) <= tol and cmatrix.is_psd(rho, tol)


def cmd_map_inverse(args) -> int:
    s = _load_any_scheme(args.scheme)
    t = io.load_tomogram(args.tomogram)
    rho = inverse(t, s) if isinstance(s, Spin12Scheme) else inverse_n(t, s)
    io.save_state(args.out, rho)
    print(np.array2string(rho, precision=10, suppress_small=True))
    print(f"wrote {args.out}")
    if not args.check_physical:
        return EXIT_OK
    if isinstance(s, Spin12Scheme):
        report = is_physical(t, s)
        ok = report.passed
        print(
            f"physicality: {'PASS' if ok else 'FAIL'} "
            f"(diagonal {report.diagonal[0]:.6g}, {report.diagonal[1]:.6g}; "
            f"determinant {report.determinant:.6g}; normalization {report.normalization:.6g})"
        )
    else:
        ok = _physical_n(rho, 1e-10)
        print(f"physicality: {'PASS' if ok else 'FAIL'} (min eigenvalue {cmatrix.min_eigenvalue(rho):.6g})")
    return EXIT_OK if ok else EXIT_FAIL


# -- tensor ---------------------------------------------------------------------


def _load_factor(name: str) -> Spin12Scheme:
    """A factor is a scheme file path or the name of a bundled preset."""
    if name in io.PRESET_VECTORS:
        return io.preset(name)
    return io.load_scheme(name)


def cmd_tensor_build(args) -> int:
    factors = [_load_factor(f) for f in args.factors.split(",") if f]
    if not factors:
        raise UsageError("--factors needs at least one entry")
    if args.n is not None:
        if args.n < 1:
            raise UsageError("--n must be at least 1")
        if len(factors) != 1:
            raise UsageError("--n replicates a single factor; give one factor or drop --n")
        factors = factors * args.n
    ts = TensorScheme(tuple(factors))
    io.save_tensor(args.out, ts, include_matrices=not args.vectors_only)
    print(f"tensor scheme N = {ts.n} ({ts.label}), {ts.size} components of size {ts.dim}x{ts.dim}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_tensor_verify(args) -> int:
    ts = io.load_tensor(args.file)
    if args.exhaustive and ts.n > EXHAUSTIVE_LIMIT:
        raise UsageError(f"--exhaustive is limited to N <= {EXHAUSTIVE_LIMIT}; this scheme has N = {ts.n}")
    mode = "exhaustive" if args.exhaustive else "sampled"
    report = verify_tensor_identities(ts, mode, samples=args.samples, seed=args.seed)
    if args.json:
        _print_json(report.to_dict())
    else:
        print(f"tensor scheme N = {ts.n}, {mode}: {'PASS' if report.passed else 'FAIL'}")
        for key, value in report.to_dict().items():
            if key.endswith("residual"):
                print(f"  {key:<26} {value:.3e}")
    return EXIT_OK if report.passed else EXIT_FAIL


# -- simulate -------------------------------------------------------------------


def _one_trial(rho, s, shots, base_seed, trial):
    ts = trial_seed(base_seed, trial)
    _, m = estimate_state(simulate_counts(rho, s, shots, ts), s, rho)
    return {
        "shots": shots,
        "trial": trial,
        "base_seed": base_seed,
        "trial_seed": ts,
        "frobenius_error": m.frobenius_error,
        "min_eigenvalue": m.min_eigenvalue,
        "trace": m.trace,
    }


def _loglog_slope(shots, medians) -> float:
    return float(np.polyfit(np.log10(shots), np.log10(medians), 1)[0])


def cmd_simulate(args) -> int:
    s = io.load_scheme(args.scheme)
    rho = io.load_state(args.state)
    if rho.shape != (2, 2):
        raise DimensionMismatch(f"simulation needs a single-qubit state, got {rho.shape}")
    if any(m < 1 for m in args.shots) or args.trials < 1:
        raise UsageError("--shots and --trials must be positive")
    seed = args.seed
    if seed is None:
        seed = secrets.randbits(63)
        print(f"no --seed given; using seed {seed}")
    tasks = [(m, t) for m in args.shots for t in range(args.trials)]
    # Each trial has its own derived seed, so running them out of order changes nothing;
    # Executor.map returns results in submission order.
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        rows = list(pool.map(lambda mt: _one_trial(rho, s, mt[0], seed, mt[1]), tasks))
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    medians = []
    print(f"seed {seed}, {args.trials} trial(s) per shot count")
    print(f"{'shots':>10} {'median err':>12} {'q10':>11} {'q90':>11} {'min eig (min)':>14}")
    for m in args.shots:
        err = np.array([r["frobenius_error"] for r in rows if r["shots"] == m])
        mins = np.array([r["min_eigenvalue"] for r in rows if r["shots"] == m])
        q10, q50, q90 = np.quantile(err, [0.1, 0.5, 0.9])
        medians.append(q50)
        print(f"{m:>10d} {q50:>12.4e} {q10:>11.4e} {q90:>11.4e} {mins.min():>14.4e}")
    distinct = sorted(set(args.shots))
    if len(distinct) > 1 and all(x > 0 for x in medians):
        by_shots = {m: q for m, q in zip(args.shots, medians)}
        print(f"log-log slope of median error vs shots: {_loglog_slope(distinct, [by_shots[m] for m in distinct]):.3f}")
    if args.csv:
        print(f"wrote {args.csv}")
    return EXIT_OK


# -- state ----------------------------------------------------------------------


def cmd_state_new(args) -> int:
    if args.bloch is not None:
        e = np.array(args.bloch, dtype=float)
        if np.linalg.norm(e) > 1.0 + 1e-12:
            print(f"error: Bloch vector length {np.linalg.norm(e):.6g} exceeds 1", file=sys.stderr)
            return EXIT_FAIL
        rho = bloch_state(e)
    elif args.maximally_mixed:
        if args.n < 1:
            raise UsageError("--n must be at least 1")
        rho = np.eye(2**args.n, dtype=complex) / 2**args.n
    elif args.bell:
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = rho[0, 3] = rho[3, 0] = rho[3, 3] = 0.5
    else:
        if args.n < 1:
            raise UsageError("--n must be at least 1")
        rng = np.random.default_rng(args.random)
        rho = random_pure_state(rng, 2**args.n) if args.pure else random_mixed_state(rng, 2**args.n)
    io.save_state(args.out, rho)
    print(f"wrote {args.out} ({rho.shape[0]}x{rho.shape[0]} state)")
    return EXIT_OK


# -- selftest -------------------------------------------------------------------


def cmd_selftest(args) -> int:
    outcomes = selftest.run(seed=args.seed, iterations=args.iterations)
    width = max(len(o.name) for o in outcomes)
    for o in outcomes:
        print(f"{'PASS' if o.passed else 'FAIL'}  {o.name:<{width}}  {o.seconds:7.2f}s  {o.detail}")
    failed = sum(not o.passed for o in outcomes)
    print(f"{len(outcomes) - failed}/{len(outcomes)} suites passed (seed {args.seed}, iterations {args.iterations})")
    return EXIT_OK if failed == 0 else EXIT_FAIL


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spintomo", description="Spin-1/2 tomographic schemes from Bloch-vector quadruples.")
    sub = p.add_subparsers(dest="command", required=True)

    scheme = sub.add_parser("scheme", help="build or validate a single-qubit scheme").add_subparsers(
        dest="action", required=True
    )
    new = scheme.add_parser("new", help="build a scheme and write it to a file")
    src = new.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(io.PRESET_VECTORS))
    src.add_argument("--vectors", metavar="FILE", help="JSON list of 3 or 4 Bloch vectors")
    src.add_argument("--random", metavar="SEED", type=int)
    new.add_argument("--mode", choices=sorted(MODES), default="mixed", help="purity class for --random")
    new.add_argument("--label", default="")
    new.add_argument("--route", choices=("cramer", "inverse"), default="cramer", help="quantizer construction")
    new.add_argument("--out", required=True, metavar="FILE")
    new.set_defaults(func=cmd_scheme_new)

    val = scheme.add_parser("validate", help="run the full identity suite on a scheme file")
    val.add_argument("file")
    val.add_argument("--json", action="store_true", help="machine-readable report")
    val.set_defaults(func=cmd_scheme_validate)

    mp = sub.add_parser("map", help="forward or inverse tomographic map").add_subparsers(dest="action", required=True)
    fwd = mp.add_parser("forward", help="state -> tomogram")
    fwd.add_argument("--scheme", required=True, metavar="FILE", help="scheme or tensor scheme file")
    fwd.add_argument("--state", required=True, metavar="FILE")
    fwd.add_argument("--out", required=True, metavar="FILE")
    fwd.set_defaults(func=cmd_map_forward)
    inv = mp.add_parser("inverse", help="tomogram -> state")
    inv.add_argument("--scheme", required=True, metavar="FILE", help="scheme or tensor scheme file")
    inv.add_argument("--tomogram", required=True, metavar="FILE")
    inv.add_argument("--out", required=True, metavar="FILE")
    inv.add_argument("--check-physical", action="store_true", help="exit 1 if the reconstruction is not a state")
    inv.set_defaults(func=cmd_map_inverse)

    tensor = sub.add_parser("tensor", help="multi-qubit tensor schemes").add_subparsers(dest="action", required=True)
    tb = tensor.add_parser("build", help="compose factor schemes")
    tb.add_argument("--factors", required=True, help="comma-separated scheme files or preset names")
    tb.add_argument("--n", type=int, help="replicate a single factor N times")
    tb.add_argument("--vectors-only", action="store_true", help="omit U and D matrices from the file")
    tb.add_argument("--out", required=True, metavar="FILE")
    tb.set_defaults(func=cmd_tensor_build)
    tv = tensor.add_parser("verify", help="check tensor orthogonality, completeness and normalization")
    tv.add_argument("file")
    tv.add_argument("--exhaustive", action="store_true", help=f"check every pair (N <= {EXHAUSTIVE_LIMIT})")
    tv.add_argument("--samples", type=int, default=1000)
    tv.add_argument("--seed", type=int, default=0)
    tv.add_argument("--json", action="store_true")
    tv.set_defaults(func=cmd_tensor_verify)

    sim = sub.add_parser("simulate", help="finite-shot reconstruction study")
    sim.add_argument("--scheme", required=True, metavar="FILE")
    sim.add_argument("--state", required=True, metavar="FILE")
    sim.add_argument("--shots", required=True, type=int, nargs="+", metavar="M")
    sim.add_argument("--seed", type=int, help="base seed; drawn and printed when omitted")
    sim.add_argument("--trials", type=int, default=1)
    sim.add_argument("--workers", type=int, default=1, help="threads used to run trials")
    sim.add_argument("--csv", metavar="FILE", help="per-trial rows: " + ",".join(CSV_COLUMNS))
    sim.set_defaults(func=cmd_simulate)

    state = sub.add_parser("state", help="write a density-matrix file").add_subparsers(dest="action", required=True)
    sn = state.add_parser("new")
    kind = sn.add_mutually_exclusive_group(required=True)
    kind.add_argument("--bloch", type=float, nargs=3, metavar=("A", "B", "G"))
    kind.add_argument("--maximally-mixed", action="store_true")
    kind.add_argument("--bell", action="store_true", help="two-qubit (|00> + |11>)/sqrt(2)")
    kind.add_argument("--random", type=int, metavar="SEED")
    sn.add_argument("--n", type=int, default=1, help="qubit count for --maximally-mixed and --random")
    sn.add_argument("--pure", action="store_true", help="with --random, draw a pure state")
    sn.add_argument("--out", required=True, metavar="FILE")
    sn.set_defaults(func=cmd_state_new)

    st = sub.add_parser("selftest", help="run the invariant suite")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--iterations", type=int, default=200)
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, DimensionMismatch) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"I/O error: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SpinTomoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
