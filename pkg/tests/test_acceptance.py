"""Acceptance gate: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even under
capture) or directly with ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from spintomo import cmatrix, io
from spintomo.geometry import PlanarQuadrilateral, PurityClass, fold_quadrilateral, random_quadruple
from spintomo.multiqubit import TensorScheme, forward_n, inverse_n, tensor_component
from spintomo.scheme import (
    build_quantizer_cramer,
    build_quantizer_inverse,
    build_scheme,
    completeness_residual,
    gram,
    orthogonality_residual,
    three_term_residuals,
)
from spintomo.tomography import (
    estimate_state,
    forward,
    inverse,
    is_physical,
    purity,
    random_mixed_state,
    random_pure_state,
    simulate_counts,
    trial_seed,
)

EXAMPLE1 = [(0, 4 / 5, 3 / 5), (4 / 5, 0, -3 / 5), (0, -4 / 5, 3 / 5), (-4 / 5, 0, -3 / 5)]
MODES = (PurityClass.ALL_PURE, PurityClass.ALL_MIXED, PurityClass.HETEROGENEOUS)


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail

    return emit


def _random_schemes(count, seed):
    rng = np.random.default_rng(seed)
    return [build_scheme(random_quadruple(rng, MODES[i % 3])) for i in range(count)]


def _bell():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[0, 3] = rho[3, 0] = rho[3, 3] = 0.5
    return rho


def _ghz3():
    psi = np.zeros(8, dtype=complex)
    psi[0] = psi[7] = 1 / math.sqrt(2)
    return np.outer(psi, psi.conj())


def test_01_example1_reproduction(verdict):
    start = time.perf_counter()
    s = build_scheme(EXAMPLE1, route="cramer")
    s_inv = build_scheme(EXAMPLE1, route="inverse")
    ref_u, ref_d = io.reference_matrices("example1", "U"), io.reference_matrices("example1", "D")
    err = max(
        np.max(np.abs(s.U - ref_u)),
        np.max(np.abs(s.D - ref_d)),
        np.max(np.abs(s_inv.D - ref_d)),
    )
    ms = 1e3 * (time.perf_counter() - start)
    verdict(1, "Example-1 U and D", err <= 1e-14, f"max |entry - exact| = {err:.2e} (tol 1e-14), {ms:.1f} ms")


def test_02_example2_reproduction(verdict):
    vectors = [(0, -2 / 3, 1 / 3), (2 / 3, 0, -1 / 3), (0, 2 / 3, 1 / 3), (-2 / 3, 0, -1 / 3)]
    s = build_scheme(vectors, route="cramer")
    s_inv = build_scheme(vectors, route="inverse")
    ref_u, ref_d = io.reference_matrices("example2", "U"), io.reference_matrices("example2", "D")
    err = max(
        np.max(np.abs(s.U - ref_u)),
        np.max(np.abs(s.D - ref_d)),
        np.max(np.abs(s_inv.D - ref_d)),
    )
    verdict(2, "Example-2 U and D", err <= 1e-14, f"max |entry - exact| = {err:.2e} (tol 1e-14)")


def test_03_orthogonality_completeness_routes(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(303)
    orth = comp = route = 0.0
    for i in range(1000):
        q = random_quadruple(rng, MODES[i % 3])
        u = build_scheme(q).U
        d_cramer = build_quantizer_cramer(q)
        d_inverse = build_quantizer_inverse(q)
        orth = max(orth, orthogonality_residual(u, d_cramer), orthogonality_residual(u, d_inverse))
        comp = max(comp, completeness_residual(u, d_cramer), completeness_residual(u, d_inverse))
        route = max(route, float(np.max(np.abs(d_cramer - d_inverse))))
    elapsed = time.perf_counter() - start
    ok = orth <= 1e-10 and comp <= 1e-10 and route <= 1e-10 and elapsed < 5.0
    verdict(
        3,
        "orthogonality/completeness over 1000 quadruples",
        ok,
        f"orth {orth:.2e}, completeness {comp:.2e}, route gap {route:.2e} (tol 1e-10); {elapsed:.2f} s (< 5 s)",
    )


def test_04_round_trip(verdict):
    rng = np.random.default_rng(404)
    schemes = [io.preset("example1"), io.preset("example2")] + _random_schemes(3, 405)
    single = 0.0
    for s in schemes:
        for i in range(1000):
            rho = random_pure_state(rng) if i % 2 else random_mixed_state(rng)
            single = max(single, cmatrix.frobenius_distance(inverse(forward(rho, s), s), rho))
    multi = 0.0
    bell_err = ghz_err = None
    factors = [io.preset("example1"), io.preset("example2")] + _random_schemes(3, 406)
    for n in (2, 3):
        for k in range(len(factors)):
            ts = TensorScheme(tuple(factors[(k + i) % len(factors)] for i in range(n)))
            states = [random_mixed_state(rng, 2**n) for _ in range(10)] + [random_pure_state(rng, 2**n) for _ in range(10)]
            states.append(_bell() if n == 2 else _ghz3())
            for idx, rho in enumerate(states):
                err = cmatrix.frobenius_distance(inverse_n(forward_n(rho, ts), ts), rho)
                multi = max(multi, err)
                if idx == len(states) - 1 and k == 0:
                    if n == 2:
                        bell_err = err
                    else:
                        ghz_err = err
    ok = single <= 1e-10 and multi <= 1e-9
    verdict(
        4,
        "round trip",
        ok,
        f"single-qubit max {single:.2e} (tol 1e-10, 5 schemes x 1000 states); "
        f"N=2,3 max {multi:.2e} (tol 1e-9; Bell {bell_err:.2e}, GHZ {ghz_err:.2e})",
    )


def test_05_normalization(verdict):
    rng = np.random.default_rng(505)
    schemes = [io.preset("example1"), io.preset("example2")] + _random_schemes(30, 506)
    sum_w = 0.0
    ops = 0.0
    eye = np.eye(2)
    for s in schemes:
        for _ in range(50):
            sum_w = max(sum_w, abs(forward(random_mixed_state(rng), s).w.sum() - 2.0))
        ops = max(
            ops,
            np.max(np.abs(np.trace(s.D, axis1=1, axis2=2) - 0.5)),
            np.max(np.abs(s.D.sum(axis=0) - eye)),
            np.max(np.abs(s.U.sum(axis=0) - 2 * eye)),
            np.max(np.abs(np.trace(s.U, axis1=1, axis2=2) - 1.0)),
        )
    sum_wn = 0.0
    for n in (2, 3):
        ts = TensorScheme(tuple(schemes[i] for i in range(n)))
        for rho in [random_mixed_state(rng, 2**n) for _ in range(20)] + [_bell() if n == 2 else _ghz3()]:
            sum_wn = max(sum_wn, abs(forward_n(rho, ts).w.sum() - 2.0**n))
        for j in range(1, ts.size + 1):
            ops = max(
                ops,
                abs(np.trace(tensor_component(ts, j, "quantizer")) - 2.0**-n),
                abs(np.trace(tensor_component(ts, j, "dequantizer")) - 1.0),
            )
    ok = sum_w <= 1e-9 and sum_wn <= 1e-9 and ops <= 1e-10
    verdict(
        5,
        "normalization",
        ok,
        f"|sum w - 2| {sum_w:.2e}, |sum w - 2^N| {sum_wn:.2e} (tol 1e-9); operator identities {ops:.2e} (tol 1e-10)",
    )


def test_06_quantizer_indefinite(verdict):
    schemes = [io.preset("example1"), io.preset("example2")] + _random_schemes(1000, 606)
    bad = 0
    for s in schemes:
        dets = [cmatrix.det2(m).real for m in s.D]
        eigs = [cmatrix.eig2_hermitian(m) for m in s.D]
        if not all(dt < 0 for dt in dets) or not all(hi > 0 > lo for hi, lo in eigs):
            bad += 1
    # Closed form for D_1 of Example 1, from the bordered minors of (e2, e3, e4).
    e2, e3, e4 = np.array(EXAMPLE1[1:])
    triple = np.array([e2, e3, e4])
    delta = np.linalg.det(triple)
    ones = np.ones((3, 1))
    ab = np.linalg.det(np.hstack([ones, triple[:, [0, 1]]]))
    bg = np.linalg.det(np.hstack([ones, triple[:, [1, 2]]]))
    ag = np.linalg.det(np.hstack([ones, triple[:, [0, 2]]]))
    radius = math.sqrt(ab**2 + bg**2 + ag**2) / (4 * abs(delta))
    closed = np.array([0.25 + radius, 0.25 - radius])
    frozen = np.array([0.25 + math.sqrt(325) / 24, 0.25 - math.sqrt(325) / 24])
    numeric = np.array(cmatrix.eig_hermitian(io.preset("example1").D[0]))
    err = max(np.max(np.abs(numeric - closed)), np.max(np.abs(closed - frozen)))
    ok = bad == 0 and err <= 1e-10
    verdict(
        6,
        "quantizer indefiniteness",
        ok,
        f"{len(schemes) - bad}/{len(schemes)} schemes with det D_k < 0 and opposite-sign eigenvalues; "
        f"Example-1 D_1 eigenvalues {numeric[0]:.6f}, {numeric[1]:.6f}, closed-form gap {err:.2e} (tol 1e-10)",
    )


def test_07_trace_product_identities(verdict):
    schemes = _random_schemes(1000, 707)
    three = max(max(three_term_residuals(gram(s.U, s.U).real)) for s in schemes)
    pair = 0.0
    equal_length_sets = [io.preset("example1"), io.preset("example2")]
    equal_length_sets += [s for s in _random_schemes(300, 708) if np.ptp(s.quadruple.lengths) <= 1e-12]
    for s in equal_length_sets:
        t = gram(s.U, s.U).real
        three = max(three, *three_term_residuals(t))
        pair = max(pair, abs(t[0, 1] - t[2, 3]), abs(t[0, 2] - t[1, 3]), abs(t[1, 2] - t[0, 3]))
    ok = three <= 1e-12 and pair <= 1e-12
    verdict(
        7,
        "trace-product identities",
        ok,
        f"three-term max {three:.2e}; pairwise max {pair:.2e} over {len(equal_length_sets)} equal-length schemes "
        "(tol 1e-12)",
    )


def test_08_purity_bound(verdict):
    rng = np.random.default_rng(808)
    states = [random_mixed_state(rng) for _ in range(5000)] + [random_pure_state(rng) for _ in range(5000)]
    # Mixtures that walk from a pure state to the maximally mixed centre.
    states += [t * np.eye(2) / 2 + (1 - t) * random_pure_state(rng) for t in np.linspace(0, 1, 101)]
    low = min(purity(rho) for rho in states)
    center = purity(np.eye(2) / 2)
    ok = low >= 0.5 - 1e-12 and abs(center - 0.5) <= 1e-15
    verdict(
        8, "purity bound", ok, f"min Tr(rho^2) = {low:.15f} over {len(states)} states (>= 1/2 - 1e-12); I/2 gives {center}"
    )


def test_09_physicality_detector(verdict):
    rng = np.random.default_rng(909)
    s = io.preset("example1")
    accepted = sum(is_physical(forward(random_mixed_state(rng), s), s).passed for _ in range(1000))
    accepted += sum(is_physical(forward(random_pure_state(rng), s), s).passed for _ in range(1000))
    counter = is_physical([1.0, 1.0, 0.0, 0.0], s)
    ok = accepted == 2000 and not counter.passed
    verdict(
        9,
        "physicality detector",
        ok,
        f"accepted {accepted}/2000 physical tomograms; (1,1,0,0) rejected: {not counter.passed} "
        f"(determinant {counter.determinant:.5f})",
    )


def test_10_finite_shot_scaling(verdict):
    start = time.perf_counter()
    s = io.preset("example1")
    rho = random_pure_state(np.random.default_rng(1010))
    shot_counts = (10**2, 10**4, 10**6)
    medians = []
    for m in shot_counts:
        errors = []
        for t in range(100):
            _, metrics = estimate_state(simulate_counts(rho, s, m, trial_seed(10, t)), s, rho)
            errors.append(metrics.frobenius_error)
        medians.append(float(np.median(errors)))
    slope = float(np.polyfit(np.log10(shot_counts), np.log10(medians), 1)[0])
    elapsed = time.perf_counter() - start
    ok = medians[0] > medians[1] > medians[2] and abs(slope + 0.5) <= 0.15 and elapsed < 60
    verdict(
        10,
        "finite-shot scaling",
        ok,
        "medians " + ", ".join(f"{x:.3e}" for x in medians) + f"; slope {slope:.3f} (target -0.5 +/- 0.15); {elapsed:.1f} s",
    )


def test_11_geometry(verdict):
    square = PlanarQuadrilateral([[0, 0], [1, 0], [1, 1], [0, 1]])
    q = fold_quadrilateral(square, math.pi / 2)
    closure = float(np.linalg.norm(q.vectors.sum(axis=0)))
    sides = float(np.max(np.abs(q.lengths - square.side_lengths)))
    rng = np.random.default_rng(1111)
    for _ in range(200):
        theta = rng.uniform(0.3, math.pi - 0.3)
        rhombus = PlanarQuadrilateral([[0, 0], [0.9, 0], [0.9 + 0.9 * math.cos(theta), 0.9 * math.sin(theta)], [0.9 * math.cos(theta), 0.9 * math.sin(theta)]])
        folded = fold_quadrilateral(rhombus, rng.uniform(0.2, math.pi - 0.2))
        closure = max(closure, float(np.linalg.norm(folded.vectors.sum(axis=0))))
        sides = max(sides, float(np.max(np.abs(folded.lengths - rhombus.side_lengths))))
    rejected = []
    for angle in (0.0, math.pi):
        try:
            fold_quadrilateral(square, angle)
            rejected.append(False)
        except ValueError:
            rejected.append(True)
    delta1 = abs(q.deltas[0])
    ok = closure <= 1e-12 and sides <= 1e-12 and delta1 > q.tols.coplanar_tol and all(rejected)
    verdict(
        11,
        "fold geometry",
        ok,
        f"closure {closure:.1e}, side drift {sides:.1e} (tol 1e-12); unit square at pi/2 |Delta_1| = {delta1:.6f}; "
        f"angles 0 and pi rejected: {all(rejected)}",
    )


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
