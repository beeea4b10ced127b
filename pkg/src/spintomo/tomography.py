"""Forward and inverse maps between density matrices and tomograms.

The forward map sends a density matrix rho to the real vector
w_j = Tr{rho U_j}; the inverse map rebuilds rho = sum_j w_j D_j.  On top of
these sit a physicality test for candidate tomograms, a purity helper, and a
finite-shot layer that draws binomial counts and inverts empirical
frequencies linearly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from . import cmatrix
from .errors import DimensionMismatch, NonPhysicalState
from .scheme import Spin12Scheme
from .tolerances import DEFAULT_TOLERANCES, Tolerances

TRACE_TOL = 1e-12
IMAG_TOL = 1e-10
PROB_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Tomogram:
    w: np.ndarray
    scheme_label: str = ""

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    def __len__(self):
        return len(self.w)

    def __eq__(self, other):
        if not isinstance(other, Tomogram):
            return NotImplemented
        return self.scheme_label == other.scheme_label and bool(np.array_equal(self.w, other.w))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CountRecord:
    shots: int
    successes: np.ndarray
    seed: int
    scheme_label: str = ""

    def __post_init__(self):
        s = np.array(self.successes, dtype=np.int64).reshape(-1)
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if np.any(s < 0) or np.any(s > self.shots):
            raise ValueError("successes must lie in [0, shots]")
        s.setflags(write=False)
        object.__setattr__(self, "successes", s)

    @property
    def frequencies(self) -> np.ndarray:
        return self.successes / self.shots

    def __eq__(self, other):
        if not isinstance(other, CountRecord):
            return NotImplemented
        return (
            self.shots == other.shots
            and self.seed == other.seed
            and self.scheme_label == other.scheme_label
            and bool(np.array_equal(self.successes, other.successes))
        )

    __hash__ = None


def _as_w(w: Tomogram | npt.ArrayLike) -> np.ndarray:
    return w.w if isinstance(w, Tomogram) else np.asarray(w, dtype=float).reshape(-1)


def check_density_matrix(rho: npt.ArrayLike, tols: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Return ``rho`` as a complex array after checking it is a physical state."""
    m = cmatrix.require_hermitian(rho, tols.herm_tol)
    tr = np.trace(m)
    if abs(tr - 1.0) > TRACE_TOL:
        raise NonPhysicalState(f"trace {tr.real:.15g} differs from 1")
    lam = cmatrix.min_eigenvalue(m, tols.herm_tol)
    if lam < -tols.psd_tol:
        raise NonPhysicalState(f"minimum eigenvalue {lam:.3e} is negative")
    return m


def forward(rho: npt.ArrayLike, s: Spin12Scheme, check: bool = True) -> Tomogram:
    """w_j = Tr{rho U_j}."""
    m = check_density_matrix(rho, s.tols) if check else cmatrix.as_cmatrix(rho)
    if m.shape != (2, 2):
        raise DimensionMismatch(f"spin-1/2 scheme needs a 2x2 state, got {m.shape}")
    w = np.einsum("kl,jlk->j", m, s.U)
    imag = float(np.max(np.abs(w.imag)))
    if imag > IMAG_TOL:
        raise NonPhysicalState(f"Tr{{rho U}} has imaginary part {imag:.3e}")
    return Tomogram(w.real, s.label)


def inverse(w: Tomogram | npt.ArrayLike, s: Spin12Scheme) -> np.ndarray:
    """rho = sum_j w_j D_j; positivity is not enforced (see :func:`is_physical`)."""
    vec = _as_w(w)
    if vec.shape != (4,):
        raise DimensionMismatch(f"spin-1/2 tomogram has 4 components, got {vec.shape[0]}")
    return np.einsum("j,jkl->kl", vec.astype(np.complex128), s.D)


@dataclass(frozen=True)
class PhysicalityReport:
    diagonal: tuple[float, float]
    determinant: float
    normalization: float
    diagonal_ok: bool
    determinant_ok: bool
    normalization_ok: bool

    @property
    def passed(self) -> bool:
        return self.diagonal_ok and self.determinant_ok and self.normalization_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "diagonal": list(self.diagonal),
            "determinant": self.determinant,
            "normalization": self.normalization,
            "diagonal_ok": self.diagonal_ok,
            "determinant_ok": self.determinant_ok,
            "normalization_ok": self.normalization_ok,
        }


def is_physical(w: Tomogram | npt.ArrayLike, s: Spin12Scheme, tol: float = 1e-10) -> PhysicalityReport:
    """Test whether ``w`` reconstructs a non-negative, unit-trace state.

    Checks (a) both diagonal sums sum_j D_j(kk) w_j are >= -tol and not both
    zero, (b) the 2x2 determinant of the reconstruction is >= -tol, and
    (c) sum_k Tr{D_k} w_k = 1 within tol.
    """
    vec = _as_w(w)
    if vec.shape != (4,):
        raise DimensionMismatch(f"spin-1/2 tomogram has 4 components, got {vec.shape[0]}")
    d11 = float(np.dot(s.D[:, 0, 0].real, vec))
    d22 = float(np.dot(s.D[:, 1, 1].real, vec))
    d12 = complex(np.dot(s.D[:, 0, 1], vec))
    det = d11 * d22 - abs(d12) ** 2
    norm = float(np.dot(np.trace(s.D, axis1=1, axis2=2).real, vec))
    diag_ok = d11 >= -tol and d22 >= -tol and not (abs(d11) <= tol and abs(d22) <= tol)
    return PhysicalityReport(
        diagonal=(d11, d22),
        determinant=det,
        normalization=norm,
        diagonal_ok=diag_ok,
        determinant_ok=det >= -tol,
        normalization_ok=abs(norm - 1.0) <= tol,
    )


def purity(rho: npt.ArrayLike) -> float:
    """Tr{rho^2}."""
    return cmatrix.trace_product(rho, rho).real


def simulate_counts(rho: npt.ArrayLike, s: Spin12Scheme, shots: int, seed: int) -> CountRecord:
    """Binomial success counts with probabilities w_j = Tr{rho U_j}.

    Each component is an independent two-outcome measurement repeated
    ``shots`` times.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    p = forward(rho, s).w
    if np.any(p < -PROB_TOL) or np.any(p > 1.0 + PROB_TOL):
        raise NonPhysicalState(f"probabilities {p.tolist()} fall outside [0, 1]")
    rng = np.random.default_rng(seed)
    successes = rng.binomial(shots, np.clip(p, 0.0, 1.0))
    return CountRecord(shots=int(shots), successes=successes, seed=int(seed), scheme_label=s.label)


@dataclass(frozen=True)
class ErrorMetrics:
    frobenius_error: float | None
    min_eigenvalue: float
    trace: float

    def to_dict(self) -> dict:
        return {"frobenius_error": self.frobenius_error, "min_eigenvalue": self.min_eigenvalue, "trace": self.trace}


def estimate_state(
    c: CountRecord, s: Spin12Scheme, truth: npt.ArrayLike | None = None
) -> tuple[np.ndarray, ErrorMetrics]:
    """Linear-inversion estimate from empirical frequencies.

    Frequencies are rescaled to sum to 2 before inversion, which pins the
    trace of the estimate to 1.  The estimate may be indefinite; that is
    reported through ``min_eigenvalue``, never repaired.  When ``truth`` is
    given, the Frobenius error is measured against the reconstruction from
    its exact tomogram.
    """
    freq = c.frequencies
    total = float(freq.sum())
    w_hat = freq * (2.0 / total) if total > 0 else freq
    rho_hat = inverse(w_hat, s)
    err = None
    if truth is not None:
        err = cmatrix.frobenius_distance(rho_hat, inverse(forward(truth, s), s))
    metrics = ErrorMetrics(
        frobenius_error=err,
        min_eigenvalue=float(cmatrix.min_eigenvalue(rho_hat, s.tols.herm_tol)),
        trace=float(np.trace(rho_hat).real),
    )
    return rho_hat, metrics


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial seed derived from (seed, trial index), independent of run order."""
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int
    shots: int
    metrics: ErrorMetrics


def run_trials(rho: npt.ArrayLike, s: Spin12Scheme, shots: int, seed: int, trials: int) -> list[TrialResult]:
    """Repeat simulate/estimate ``trials`` times; results ordered by trial index."""
    truth = check_density_matrix(rho, s.tols)
    out = []
    for t in range(trials):
        ts = trial_seed(seed, t)
        _, metrics = estimate_state(simulate_counts(truth, s, shots, ts), s, truth)
        out.append(TrialResult(trial=t, seed=ts, shots=int(shots), metrics=metrics))
    return out


def random_pure_state(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-random pure state as a density matrix."""
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_mixed_state(rng: np.random.Generator, dim: int = 2, rank: int | None = None) -> np.ndarray:
    """Convex mixture of random pure states (Ginibre construction)."""
    k = rank or dim
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def bloch_state(e: npt.ArrayLike) -> np.ndarray:
    """Density matrix (I + e . sigma) / 2."""
    a, b, g = np.asarray(e, dtype=float)
    return 0.5 * np.array([[1 + g, complex(a, -b)], [complex(a, b), 1 - g]])
