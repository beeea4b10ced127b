"""End-to-end invariant suite behind ``spintomo selftest``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import cmatrix, io
from .geometry import PlanarQuadrilateral, PurityClass, fold_quadrilateral, random_quadruple
from .multiqubit import TensorScheme, forward_n, inverse_n, verify_tensor_identities
from .scheme import build_scheme, scheme_diagnostics
from .tomography import (
    forward,
    inverse,
    is_physical,
    purity,
    random_mixed_state,
    random_pure_state,
)


@dataclass(frozen=True)
class Outcome:
    name: str
    passed: bool
    detail: str
    seconds: float


def _presets(rng, k) -> tuple[bool, str]:
    worst = 0.0
    for name in ("example1", "example2"):
        s = io.preset(name)
        worst = max(worst, float(np.max(np.abs(s.U - io.reference_matrices(name, "U")))))
        worst = max(worst, float(np.max(np.abs(s.D - io.reference_matrices(name, "D")))))
    return worst <= 1e-14, f"max deviation {worst:.2e}"


def _random_schemes(rng, k) -> tuple[bool, str]:
    failed = 0
    for i in range(k):
        for mode in PurityClass:
            s = build_scheme(random_quadruple(rng, mode))
            if not scheme_diagnostics(s).passed:
                failed += 1
    return failed == 0, f"{3 * k} schemes, {failed} failing"


def _round_trip(rng, k) -> tuple[bool, str]:
    worst = 0.0
    for i in range(k):
        s = build_scheme(random_quadruple(rng, PurityClass.ALL_MIXED))
        rho = random_pure_state(rng) if i % 2 else random_mixed_state(rng)
        w = forward(rho, s)
        worst = max(worst, cmatrix.frobenius_distance(inverse(w, s), rho))
        worst = max(worst, abs(w.w.sum() - 2.0))
    return worst <= 1e-10, f"max error {worst:.2e}"


def _dual_round_trip(rng, k) -> tuple[bool, str]:
    s = io.preset("example1")
    worst = 0.0
    for _ in range(k):
        w = rng.normal(size=4)
        w *= 2.0 / w.sum()
        worst = max(worst, float(np.max(np.abs(forward(inverse(w, s), s, check=False).w - w))))
    return worst <= 1e-10, f"max error {worst:.2e}"


def _purity(rng, k) -> tuple[bool, str]:
    low = min(purity(random_mixed_state(rng)) for _ in range(k))
    at_center = purity(np.eye(2) / 2)
    return low >= 0.5 - 1e-12 and abs(at_center - 0.5) <= 1e-15, f"min purity {low:.6f}, I/2 -> {at_center}"


def _physicality(rng, k) -> tuple[bool, str]:
    s = io.preset("example1")
    ok = all(is_physical(forward(random_mixed_state(rng), s), s).passed for _ in range(k))
    rejects = not is_physical([1.0, 1.0, 0.0, 0.0], s).passed
    return ok and rejects, f"accepts {k} states: {ok}; rejects (1,1,0,0): {rejects}"


def _tensor(rng, k) -> tuple[bool, str]:
    e1, e2 = io.preset("example1"), io.preset("example2")
    two = verify_tensor_identities(TensorScheme((e1, e2)), "exhaustive")
    three = verify_tensor_identities(TensorScheme((e1, e2, e1)), "sampled", samples=max(k, 1000), seed=int(rng.integers(1 << 31)))
    bell = np.zeros((4, 4), dtype=complex)
    bell[0, 0] = bell[0, 3] = bell[3, 0] = bell[3, 3] = 0.5
    ts = TensorScheme.replicate(e1, 2)
    w = forward_n(bell, ts)
    err = cmatrix.frobenius_distance(inverse_n(w, ts), bell)
    worst = err
    for n in (2, 3):
        ts = TensorScheme.replicate(build_scheme(random_quadruple(rng, PurityClass.ALL_MIXED)), n)
        for _ in range(max(1, k // 20)):
            rho = random_mixed_state(rng, 2**n)
            worst = max(worst, cmatrix.frobenius_distance(inverse_n(forward_n(rho, ts), ts), rho))
    passed = two.passed and three.passed and abs(w.w.sum() - 4.0) <= 1e-9 and worst <= 1e-9
    return passed, f"N=2 exhaustive {two.passed}, N=3 sampled {three.passed}, Bell error {err:.2e}, worst {worst:.2e}"


def _geometry(rng, k) -> tuple[bool, str]:
    square = PlanarQuadrilateral([[0, 0], [1, 0], [1, 1], [0, 1]])
    q = fold_quadrilateral(square, math.pi / 2)
    closure = float(np.linalg.norm(q.vectors.sum(axis=0)))
    lengths = float(np.max(np.abs(q.lengths - 1.0)))
    rejected = 0
    for angle in (0.0, math.pi):
        try:
            fold_quadrilateral(square, angle)
        except ValueError:
            rejected += 1
    ok = closure <= 1e-12 and lengths <= 1e-12 and abs(q.deltas[0]) > q.tols.coplanar_tol and rejected == 2
    return ok, f"closure {closure:.1e}, |Delta_1| = {abs(q.deltas[0]):.4f}, degenerate folds rejected {rejected}/2"


def _eigensolver(rng, k) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(k):
        x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = x + x.conj().T
        worst = max(worst, float(np.max(np.abs(cmatrix.eig_hermitian(h) - np.array(cmatrix.eig2_hermitian(h))))))
    return worst <= 1e-10, f"max disagreement {worst:.2e}"


def _io(rng, k) -> tuple[bool, str]:
    s = build_scheme(random_quadruple(rng, PurityClass.HETEROGENEOUS))
    back = io.scheme_from_dict(io.scheme_to_dict(s))
    same = bool(np.array_equal(back.vectors, s.vectors) and np.array_equal(back.D, s.D))
    return same, "scheme dict round trip bit-identical" if same else "round trip changed values"


SUITES: list[tuple[str, Callable]] = [
    ("preset reproduction", _presets),
    ("random scheme identities", _random_schemes),
    ("single-qubit round trip", _round_trip),
    ("dual round trip", _dual_round_trip),
    ("purity bound", _purity),
    ("physicality detector", _physicality),
    ("tensor identities", _tensor),
    ("fold geometry", _geometry),
    ("Jacobi vs closed form", _eigensolver),
    ("serialization", _io),
]


def run(seed: int = 0, iterations: int = 200) -> list[Outcome]:
    outcomes = []
    for index, (name, fn) in enumerate(SUITES):
        rng = np.random.default_rng([seed, index])
        start = time.perf_counter()
        try:
            passed, detail = fn(rng, iterations)
        except Exception as exc:  # a crash is a failed check, not an aborted run
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        outcomes.append(Outcome(name, bool(passed), detail, time.perf_counter() - start))
    return outcomes
