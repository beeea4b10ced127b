"""Spin-1/2 dequantizer and quantizer built from a Bloch-vector quadruple.

The dequantizer components are the projectors U_k onto the (pure or mixed)
states with Bloch vectors e_k.  Two independent routes produce the dual
quantizer D_k:

* :func:`build_quantizer_cramer` evaluates the closed-form 3x3 determinant
  expressions (the default);
* :func:`build_quantizer_inverse` inverts the 4x4 transfer matrix R whose
  rows hold the entries of U_k.

Both satisfy Tr{U_j D_k} = delta_jk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from . import cmatrix
from .errors import CoplanarQuadruple, LengthExceedsOne, NotPure, SingularTransferMatrix
from .geometry import SchemeQuadruple
from .tolerances import DEFAULT_TOLERANCES, Tolerances

IDENTITY_TOL = 1e-12

# Column order of R: spin-index pairs (11), (21), (12), (22), zero-based below.
R_COLUMNS = ((0, 0), (1, 0), (0, 1), (1, 1))
# Row order of J: (11), (12), (21), (22).
J_ROWS = ((0, 0), (0, 1), (1, 0), (1, 1))


def _bloch(e: npt.ArrayLike) -> np.ndarray:
    v = np.asarray(e, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise ValueError(f"a Bloch vector has three components, got {v.shape}")
    return v


def spinor_from_bloch(e: npt.ArrayLike, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Spin-up spinor along the unit vector ``e``, fixed up to a global phase."""
    a, b, g = _bloch(e)
    n = math.sqrt(a * a + b * b + g * g)
    if abs(n - 1.0) > tols.len_tol:
        raise NotPure(f"spinor needs a unit Bloch vector, |e| = {n:.15g}")
    if g <= -1.0 + tols.pole_tol:
        return np.array([0.0, 1.0], dtype=np.complex128)
    root = math.sqrt(g + 1.0)
    return np.array([root, complex(a, b) / root], dtype=np.complex128) / math.sqrt(2.0)


def projector_from_bloch(e: npt.ArrayLike, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """U = (1/2)[[1 + gamma, alpha - i beta], [alpha + i beta, 1 - gamma]]."""
    a, b, g = _bloch(e)
    n = math.sqrt(a * a + b * b + g * g)
    if n > 1.0 + tols.len_tol:
        raise LengthExceedsOne(f"|e| = {n:.15g} exceeds 1")
    return 0.5 * np.array([[1.0 + g, complex(a, -b)], [complex(a, b), 1.0 - g]], dtype=np.complex128)


def dequantizer_eigenvalues(e: npt.ArrayLike) -> tuple[float, float]:
    """Eigenvalues 1/2 +- |e|/2 of the projector for ``e``, largest first."""
    n = float(np.linalg.norm(_bloch(e)))
    return 0.5 + 0.5 * n, 0.5 - 0.5 * n


def dequantizer_determinant(e: npt.ArrayLike) -> float:
    v = _bloch(e)
    return (1.0 - float(v @ v)) / 4.0


def build_dequantizer(q: SchemeQuadruple) -> np.ndarray:
    """Stack of the four projectors, shape (4, 2, 2)."""
    u = np.array([projector_from_bloch(e, q.tols) for e in q.vectors])
    u.setflags(write=False)
    return u


def _cyclic_triple(vectors: np.ndarray, k: int) -> np.ndarray:
    return vectors[[(k + 1) % 4, (k + 2) % 4, (k + 3) % 4]]


def _cramer_minors(triple: np.ndarray) -> tuple[float, float, float, float]:
    """(Delta, |1 alpha beta|, |1 beta gamma|, |1 alpha gamma|) for three rows."""
    ones = np.ones(3)
    alpha, beta, gamma = triple[:, 0], triple[:, 1], triple[:, 2]
    delta = float(np.linalg.det(triple))
    ab = float(np.linalg.det(np.column_stack([ones, alpha, beta])))
    bg = float(np.linalg.det(np.column_stack([ones, beta, gamma])))
    ag = float(np.linalg.det(np.column_stack([ones, alpha, gamma])))
    return delta, ab, bg, ag


def build_quantizer_cramer(q: SchemeQuadruple) -> np.ndarray:
    """Closed-form quantizer; D_k uses the other three vectors in cyclic order."""
    d = np.empty((4, 2, 2), dtype=np.complex128)
    for k in range(4):
        delta, ab, bg, ag = _cramer_minors(_cyclic_triple(q.vectors, k))
        if abs(delta) < q.tols.coplanar_tol:
            raise CoplanarQuadruple(f"Delta_{k + 1} = {delta:.3e} vanishes")
        scale = 1.0 / (4.0 * delta)
        off = -scale * complex(bg, ag)
        d[k] = [[0.25 - scale * ab, off], [off.conjugate(), 0.25 + scale * ab]]
    d.setflags(write=False)
    return d


@dataclass(frozen=True, eq=False)
class TransferMatrices:
    R: np.ndarray
    J: np.ndarray

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.R @ self.J - np.eye(4))))


def transfer_matrix(u: npt.ArrayLike) -> np.ndarray:
    """R[j] = (U_j(11), U_j(21), U_j(12), U_j(22))."""
    u = np.asarray(u, dtype=np.complex128)
    return np.array([[uj[r, c] for r, c in R_COLUMNS] for uj in u])


def transfer_matrices(q: SchemeQuadruple) -> TransferMatrices:
    r = transfer_matrix(build_dequantizer(q))
    det = complex(np.linalg.det(r))
    if abs(det) < q.tols.coplanar_tol:
        raise SingularTransferMatrix(f"det R = {det:.3e} vanishes")
    return TransferMatrices(R=r, J=np.linalg.inv(r))


def quantizer_from_transfer(j: npt.ArrayLike) -> np.ndarray:
    """Unpack the columns of J (rows ordered (11), (12), (21), (22)) into D_k."""
    j = np.asarray(j, dtype=np.complex128)
    d = np.zeros((4, 2, 2), dtype=np.complex128)
    for row, (a, b) in enumerate(J_ROWS):
        d[:, a, b] = j[row, :]
    return d


def build_quantizer_inverse(q: SchemeQuadruple) -> np.ndarray:
    d = quantizer_from_transfer(transfer_matrices(q).J)
    d.setflags(write=False)
    return d


def quantizer_eigenvalues(q: SchemeQuadruple, k: int) -> tuple[float, float]:
    """Closed-form eigenvalues of D_k (k zero-based), positive one first.

    d = 1/4 +- sqrt(M_ab^2 + M_bg^2 + M_ag^2) / (4 |Delta_k|), where M_xy are
    the bordered 3x3 minors of the three vectors other than e_k.
    """
    if not 0 <= k < 4:
        raise IndexError(f"component index {k} outside 0..3")
    delta, ab, bg, ag = _cramer_minors(_cyclic_triple(q.vectors, k))
    if abs(delta) < q.tols.coplanar_tol:
        raise CoplanarQuadruple(f"Delta_{k + 1} = {delta:.3e} vanishes")
    spread = math.sqrt(ab * ab + bg * bg + ag * ag) / (4.0 * abs(delta))
    return 0.25 + spread, 0.25 - spread


@dataclass(frozen=True, eq=False)
class Spin12Scheme:
    """Immutable dequantizer/quantizer pair for spin 1/2."""

    quadruple: SchemeQuadruple
    U: np.ndarray
    D: np.ndarray
    tols: Tolerances = DEFAULT_TOLERANCES
    label: str = ""
    route: str = "cramer"

    @property
    def vectors(self) -> np.ndarray:
        return self.quadruple.vectors

    @property
    def size(self) -> int:
        return 4

    @property
    def dim(self) -> int:
        return 2


def build_scheme(
    source: SchemeQuadruple | npt.ArrayLike,
    label: str = "",
    tols: Tolerances | None = None,
    route: str = "cramer",
) -> Spin12Scheme:
    """Build a scheme from a quadruple or a (4, 3) array of Bloch vectors."""
    if isinstance(source, SchemeQuadruple):
        q = source if tols is None else SchemeQuadruple.from_vectors(source.vectors, tols)
    else:
        q = SchemeQuadruple.from_vectors(source, tols or DEFAULT_TOLERANCES)
    if route == "cramer":
        d = build_quantizer_cramer(q)
    elif route == "inverse":
        d = build_quantizer_inverse(q)
    else:
        raise ValueError(f"unknown quantizer route {route!r}")
    return Spin12Scheme(quadruple=q, U=build_dequantizer(q), D=d, tols=q.tols, label=label, route=route)


def gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """G[j, k] = Tr{A_j B_k} for stacks of square matrices."""
    return np.einsum("jkl,mlk->jm", a, b)


def orthogonality_residual(u: np.ndarray, d: np.ndarray) -> float:
    return float(np.max(np.abs(gram(u, d) - np.eye(len(u)))))


def completeness_residual(u: np.ndarray, d: np.ndarray) -> float:
    """max |sum_j U_j(kl) D_j(l'k') - delta_kk' delta_ll'|."""
    n = u.shape[1]
    total = np.einsum("jkl,jab->klab", u, d)  # [k, l, l', k']
    expected = np.einsum("ka,lb->klba", np.eye(n), np.eye(n))
    return float(np.max(np.abs(total - expected)))


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    asserted: bool = True

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)


@dataclass(frozen=True, eq=False)
class SchemeDiagnostics:
    checks: tuple[Check, ...]
    dequantizer_eigenvalues: np.ndarray
    quantizer_eigenvalues: np.ndarray
    dequantizer_determinants: np.ndarray
    quantizer_determinants: np.ndarray
    uu_traces: np.ndarray
    dd_traces: np.ndarray
    equal_lengths: bool
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.asserted)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.asserted and not c.passed]

    def residual(self, name: str) -> float:
        for c in self.checks:
            if c.name == name:
                return c.value
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "equal_lengths": self.equal_lengths,
            "checks": [
                {"name": c.name, "value": c.value, "tol": c.tol, "asserted": c.asserted, "passed": c.passed}
                for c in self.checks
            ],
            "dequantizer_eigenvalues": self.dequantizer_eigenvalues.tolist(),
            "quantizer_eigenvalues": self.quantizer_eigenvalues.tolist(),
            "dequantizer_determinants": self.dequantizer_determinants.tolist(),
            "quantizer_determinants": self.quantizer_determinants.tolist(),
            **self.extras,
        }


_THREE_TERM = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((1, 2), (0, 3)))


def three_term_residuals(t: np.ndarray) -> list[float]:
    """Residuals of 2T_ab + T_aa + T_bb = 2T_cd + T_cc + T_dd for the three splits."""
    out = []
    for (a, b), (c, d) in _THREE_TERM:
        lhs = 2 * t[a, b] + t[a, a] + t[b, b]
        rhs = 2 * t[c, d] + t[c, c] + t[d, d]
        out.append(float(abs(lhs - rhs)))
    return out


def scheme_diagnostics(s: Spin12Scheme) -> SchemeDiagnostics:
    """Evaluate every algebraic identity the scheme must satisfy."""
    tols = s.tols
    q = s.quadruple
    u, d = s.U, s.D
    e = q.vectors
    eye = np.eye(2)
    checks: list[Check] = []

    def add(name, value, tol, asserted=True):
        checks.append(Check(name, float(value), tol, asserted))

    report = q.report()
    add("closure", report.closure_residual, tols.closure_tol)
    add("delta_alternation", report.alternation_residual, IDENTITY_TOL)
    add("non_coplanar", max(0.0, tols.coplanar_tol - min(map(abs, report.deltas))), 0.0)

    add("hermitian_U", max(cmatrix.hermitian_residual(m) for m in u), tols.herm_tol)
    add("hermitian_D", max(cmatrix.hermitian_residual(m) for m in d), tols.herm_tol)
    add("trace_U", np.max(np.abs(np.trace(u, axis1=1, axis2=2) - 1.0)), IDENTITY_TOL)
    add("sum_U", np.max(np.abs(u.sum(axis=0) - 2 * eye)), IDENTITY_TOL)
    add("trace_D", np.max(np.abs(np.trace(d, axis1=1, axis2=2) - 0.5)), tols.orth_tol)
    add("sum_D", np.max(np.abs(d.sum(axis=0) - eye)), tols.orth_tol)
    add("orthogonality", orthogonality_residual(u, d), tols.orth_tol)
    add("completeness", completeness_residual(u, d), tols.orth_tol)

    alt = build_quantizer_inverse(q) if s.route == "cramer" else build_quantizer_cramer(q)
    add("route_agreement", np.max(np.abs(alt - d)), tols.orth_tol)
    tm = transfer_matrices(q)
    add("RJ_identity", tm.residual, tols.orth_tol)
    add("detR_equals_i_delta1", abs(complex(np.linalg.det(tm.R)) - 1j * report.deltas[0]), tols.orth_tol)

    u_eigs = np.array([cmatrix.eig2_hermitian(m) for m in u])
    u_closed = np.array([dequantizer_eigenvalues(v) for v in e])
    add("dequantizer_eigenvalues", np.max(np.abs(u_eigs - u_closed)), tols.orth_tol)
    u_dets = np.array([cmatrix.det2(m).real for m in u])
    add("dequantizer_determinants", np.max(np.abs(u_dets - [dequantizer_determinant(v) for v in e])), IDENTITY_TOL)

    d_eigs = np.array([cmatrix.eig2_hermitian(m, tols.orth_tol) for m in d])
    d_closed = np.array([quantizer_eigenvalues(q, k) for k in range(4)])
    add("quantizer_eigenvalues", np.max(np.abs(d_eigs - d_closed)), tols.orth_tol)
    d_dets = np.array([cmatrix.det2(m).real for m in d])
    # det D_k < 0 with one eigenvalue of each sign; value 0 when it holds.
    add("quantizer_indefinite", 0.0 if np.all(d_dets < 0) and np.all(d_eigs[:, 0] > 0) and np.all(d_eigs[:, 1] < 0) else 1.0, 0.0)

    uu = gram(u, u).real
    dd = gram(d, d).real
    add("uu_self_trace", np.max(np.abs(np.diag(uu) - (1 + np.sum(e * e, axis=1)) / 2)), IDENTITY_TOL)
    add("uu_pair_trace", np.max(np.abs(uu - (1 + e @ e.T) / 2)), IDENTITY_TOL)
    for i, r in enumerate(three_term_residuals(uu), start=1):
        add(f"uu_three_term_{i}", r, IDENTITY_TOL)
    # Tr{D_j D_k} grows like 1/Delta^2, so compare relative to its magnitude.
    dd_scale = max(1.0, float(np.max(np.abs(dd))))
    for i, r in enumerate(three_term_residuals(dd), start=1):
        add(f"dd_three_term_{i}", r / dd_scale, tols.orth_tol)

    lengths = q.lengths
    equal = bool(np.ptp(lengths) <= IDENTITY_TOL)
    for (a, b), (c, dd_) in _THREE_TERM:
        add(f"uu_pair_{a + 1}{b + 1}_vs_{c + 1}{dd_ + 1}", abs(uu[a, b] - uu[c, dd_]), IDENTITY_TOL, asserted=equal)

    return SchemeDiagnostics(
        checks=tuple(checks),
        dequantizer_eigenvalues=u_eigs,
        quantizer_eigenvalues=d_eigs,
        dequantizer_determinants=u_dets,
        quantizer_determinants=d_dets,
        uu_traces=uu,
        dd_traces=dd,
        equal_lengths=equal,
        extras={"deltas": list(report.deltas), "lengths": lengths.tolist(), "purity_class": q.purity_class.value},
    )
