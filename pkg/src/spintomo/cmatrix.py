"""Dense complex square matrices: Hermitian checks, traces, spectra, Kronecker products.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every public
function validates its input (square, finite) and returns new arrays, so
callers never observe mutation.
"""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt

from .errors import ConvergenceError, DimensionMismatch, NonFiniteInput, NotHermitian

HERM_TOL = 1e-10
MAX_DIM = 64
MAX_SWEEPS = 64

ComplexMatrix = npt.NDArray[np.complex128]


def as_cmatrix(a: npt.ArrayLike) -> ComplexMatrix:
    """Coerce ``a`` to a square complex128 matrix, rejecting NaN/Inf."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteInput("matrix contains NaN or Inf entries")
    return m


def hermitian_residual(a: npt.ArrayLike) -> float:
    m = as_cmatrix(a)
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(a: npt.ArrayLike, tol: float = HERM_TOL) -> bool:
    return hermitian_residual(a) <= tol


def require_hermitian(a: npt.ArrayLike, tol: float = HERM_TOL) -> ComplexMatrix:
    m = as_cmatrix(a)
    res = float(np.max(np.abs(m - m.conj().T)))
    if res > tol:
        raise NotHermitian(f"max |A - A^H| = {res:.3e} exceeds {tol:.1e}")
    return m


def trace(a: npt.ArrayLike) -> complex:
    return complex(np.trace(as_cmatrix(a)))


def trace_product(a: npt.ArrayLike, b: npt.ArrayLike) -> complex:
    """Tr{AB} = sum_{k,l} A_kl B_lk, without forming the product."""
    ma, mb = as_cmatrix(a), as_cmatrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"trace_product of {ma.shape} and {mb.shape}")
    return complex(np.sum(ma * mb.T))


def det2(a: npt.ArrayLike) -> complex:
    m = as_cmatrix(a)
    if m.shape != (2, 2):
        raise DimensionMismatch(f"det2 needs a 2x2 matrix, got {m.shape}")
    return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Kronecker product with (A x B)[i*nb + k, j*nb + l] = A[i, j] B[k, l]."""
    return np.kron(as_cmatrix(a), as_cmatrix(b))


def kron_all(mats) -> ComplexMatrix:
    out = None
    for m in mats:
        out = as_cmatrix(m) if out is None else kron(out, m)
    if out is None:
        raise DimensionMismatch("kron_all needs at least one factor")
    return out


def eig2_hermitian(a: npt.ArrayLike, tol: float = HERM_TOL) -> tuple[float, float]:
    """Closed-form eigenvalues of a 2x2 Hermitian matrix, largest first.

    lambda = Tr/2 +- sqrt((Tr/2)^2 - det), written in the cancellation-free
    form sqrt(((a - d)/2)^2 + |b|^2).
    """
    m = require_hermitian(a, tol)
    if m.shape != (2, 2):
        raise DimensionMismatch(f"eig2_hermitian needs a 2x2 matrix, got {m.shape}")
    p, q = m[0, 0].real, m[1, 1].real
    half_tr = 0.5 * (p + q)
    radius = math.hypot(0.5 * (p - q), abs(0.5 * (m[0, 1] + m[1, 0].conjugate())))
    return half_tr + radius, half_tr - radius


def _offdiag_norm(m: np.ndarray) -> float:
    # Summed directly: subtracting the diagonal mass from ||m||^2 cancels to ~sqrt(eps).
    return float(np.linalg.norm(m[~np.eye(m.shape[0], dtype=bool)]))


def eig_hermitian(a: npt.ArrayLike, tol: float = HERM_TOL, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each (p, q) rotation first removes the phase of A[p, q] with a diagonal
    unitary, then applies the real symmetric Jacobi rotation.  Sweeps stop
    once the off-diagonal Frobenius norm drops below ``eps * ||A||_F``.
    Returns the spectrum sorted in descending order.
    """
    m = require_hermitian(a, tol)
    n = m.shape[0]
    if n > MAX_DIM:
        raise DimensionMismatch(f"eig_hermitian supports dim <= {MAX_DIM}, got {n}")
    m = 0.5 * (m + m.conj().T)
    scale = float(np.linalg.norm(m))
    if n == 1 or scale == 0.0:
        return np.sort(np.diag(m).real)[::-1].copy()
    target = np.finfo(float).eps * scale

    for _ in range(max_sweeps):
        if _offdiag_norm(m) <= target:
            return np.sort(np.diag(m).real)[::-1].copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                theta = (m[q, q].real - m[p, p].real) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = m[:, [p, q]] @ g
                m[:, p], m[:, q] = cols[:, 0], cols[:, 1]
                rows = g.conj().T @ m[[p, q], :]
                m[p, :], m[q, :] = rows[0], rows[1]
                m[p, q] = m[q, p] = 0.0
                m[p, p] = m[p, p].real
                m[q, q] = m[q, q].real
    if _offdiag_norm(m) <= 16 * target:
        return np.sort(np.diag(m).real)[::-1].copy()
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (dim {n})")


def min_eigenvalue(a: npt.ArrayLike, tol: float = HERM_TOL) -> float:
    m = as_cmatrix(a)
    if m.shape == (2, 2):
        return float(eig2_hermitian(m, tol)[1])
    return float(eig_hermitian(m, tol)[-1])


def is_psd(a: npt.ArrayLike, tol: float = 1e-10, herm_tol: float = HERM_TOL) -> bool:
    """True iff the smallest eigenvalue of Hermitian ``a`` is >= -tol."""
    return min_eigenvalue(a, herm_tol) >= -tol


def frobenius_distance(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    ma, mb = as_cmatrix(a), as_cmatrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"cannot compare {ma.shape} with {mb.shape}")
    return float(np.linalg.norm(ma - mb))
