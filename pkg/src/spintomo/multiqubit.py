"""Tensor-product schemes for spin (2^N - 1)/2, viewed as N qubits.

Component j of the N-qubit scheme is the Kronecker product of one
component from each factor scheme.  Index conventions:

* ``g_map`` splits a spin index k in 1..2^N into qubit indices (k_1..k_N),
  big-endian base 2, matching the row layout of ``numpy.kron``;
* ``f_map`` joins factor indices (j_1..j_N), each in 1..4, into
  j in 1..4^N, big-endian base 4.

Both maps are 1-based; tomogram arrays are ordinary 0-based arrays, so
component j lives at ``w[j - 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import numpy.typing as npt

from . import cmatrix
from .errors import DimensionMismatch, IndexOutOfRange, MaterializeLimitExceeded, NonPhysicalState
from .scheme import Spin12Scheme, completeness_residual, scheme_diagnostics
from .tolerances import Tolerances
from .tomography import IMAG_TOL, Tomogram, check_density_matrix, forward

MATERIALIZE_LIMIT = 5
EXHAUSTIVE_LIMIT = 2


def _digits(value: int, base: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        value, r = divmod(value, base)
        out.append(r + 1)
    return tuple(reversed(out))


def _undigits(digits: Sequence[int], base: int) -> int:
    value = 0
    for d in digits:
        if not 1 <= d <= base:
            raise IndexOutOfRange(f"digit {d} outside 1..{base}")
        value = value * base + (d - 1)
    return value + 1


def g_map(k: int, n: int) -> tuple[int, ...]:
    """Spin index k in 1..2^n -> (k_1, ..., k_n), each in 1..2."""
    if n < 1:
        raise IndexOutOfRange("N must be at least 1")
    if not 1 <= k <= 2**n:
        raise IndexOutOfRange(f"k = {k} outside 1..{2**n}")
    return _digits(k - 1, 2, n)


def g_map_inverse(ks: Sequence[int]) -> int:
    if len(ks) < 1:
        raise IndexOutOfRange("empty index tuple")
    return _undigits(ks, 2)


def f_map(js: Sequence[int]) -> int:
    """(j_1, ..., j_N), each in 1..4 -> j = 1 + sum (j_i - 1) 4^(N - i)."""
    if len(js) < 1:
        raise IndexOutOfRange("empty index tuple")
    return _undigits(js, 4)


def f_map_inverse(j: int, n: int) -> tuple[int, ...]:
    if n < 1:
        raise IndexOutOfRange("N must be at least 1")
    if not 1 <= j <= 4**n:
        raise IndexOutOfRange(f"j = {j} outside 1..{4**n}")
    return _digits(j - 1, 4, n)


@dataclass(frozen=True, eq=False)
class TensorScheme:
    factors: tuple[Spin12Scheme, ...]
    materialize_limit: int = MATERIALIZE_LIMIT

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("a tensor scheme needs at least one factor")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def replicate(cls, scheme: Spin12Scheme, n: int, materialize_limit: int = MATERIALIZE_LIMIT) -> "TensorScheme":
        if n < 1:
            raise ValueError("N must be at least 1")
        return cls((scheme,) * n, materialize_limit)

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def size(self) -> int:
        return 4**self.n

    @property
    def tols(self) -> Tolerances:
        return self.factors[0].tols

    @property
    def label(self) -> str:
        return "(x)".join(f.label or "?" for f in self.factors)

    def _check_materialize(self):
        if self.n > self.materialize_limit:
            raise MaterializeLimitExceeded(f"N = {self.n} exceeds materialize_limit = {self.materialize_limit}")

    def stack(self, which: str = "dequantizer") -> np.ndarray:
        """All 4^N components, shape (4^N, 2^N, 2^N), ordered by f_map."""
        self._check_materialize()
        parts = [_factor_stack(f, which) for f in self.factors]
        out = parts[0]
        for p in parts[1:]:
            a, da = out.shape[0], out.shape[1]
            out = np.einsum("aij,bkl->abikjl", out, p).reshape(a * 4, da * 2, da * 2)
        return out


def _factor_stack(f: Spin12Scheme, which: str) -> np.ndarray:
    if which == "dequantizer":
        return np.asarray(f.U)
    if which == "quantizer":
        return np.asarray(f.D)
    raise ValueError(f"which must be 'dequantizer' or 'quantizer', got {which!r}")


def tensor_component(ts: TensorScheme, j: int, which: str = "dequantizer") -> np.ndarray:
    """Component j (1-based) as an explicit Kronecker product of factor components."""
    ts._check_materialize()
    js = f_map_inverse(j, ts.n)
    return cmatrix.kron_all(_factor_stack(f, which)[ji - 1] for f, ji in zip(ts.factors, js))


def _as_qubit_tensor(rho: np.ndarray, n: int) -> np.ndarray:
    # rho[k, l] -> t[k_1..k_N, l_1..l_N]
    return rho.reshape((2,) * (2 * n))


def forward_n(rho: npt.ArrayLike, ts: TensorScheme, method: str | None = None, check: bool = True) -> Tomogram:
    """w_j = Tr{rho U_j} over the 4^N tensor components.

    ``method`` is "dense" (materialized components, default up to the
    materialize limit) or "factored" (contract one qubit at a time).
    """
    m = check_density_matrix(rho, ts.tols) if check else cmatrix.as_cmatrix(rho)
    if m.shape != (ts.dim, ts.dim):
        raise DimensionMismatch(f"{ts.n}-qubit scheme needs a {ts.dim}x{ts.dim} state, got {m.shape}")
    method = method or ("dense" if ts.n <= ts.materialize_limit else "factored")
    if method == "dense":
        w = np.einsum("kl,jlk->j", m, ts.stack("dequantizer"))
    elif method == "factored":
        n = ts.n
        t = _as_qubit_tensor(m, n)
        # Contract qubit i: sum_{k_i, l_i} t[.., k_i, .., l_i, ..] U_i[j_i, l_i, k_i].
        # The new factor index is appended; after N steps axes are (j_1..j_N).
        for f in ts.factors:
            t = _contract_first(t, np.asarray(f.U), n)
            n -= 1
        w = t.reshape(-1)
    else:
        raise ValueError(f"unknown method {method!r}")
    imag = float(np.max(np.abs(w.imag)))
    if imag > IMAG_TOL:
        raise NonPhysicalState(f"Tr{{rho U}} has imaginary part {imag:.3e}")
    return Tomogram(w.real, ts.label)


def _contract_first(t: np.ndarray, u: np.ndarray, n_left: int) -> np.ndarray:
    """Contract the leading (k, l) qubit pair of ``t`` with factor stack ``u``.

    ``t`` has axes (k_1..k_m, l_1..l_m, j_done...) with m = n_left; the result
    has axes (k_2..k_m, l_2..l_m, j_done..., j_new).
    """
    return np.tensordot(t, u, axes=([0, n_left], [2, 1]))


def forward_separable(states: Sequence[npt.ArrayLike], ts: TensorScheme) -> Tomogram:
    """Tomogram of rho_1 (x) ... (x) rho_N from per-factor traces."""
    if len(states) != ts.n:
        raise DimensionMismatch(f"expected {ts.n} factor states, got {len(states)}")
    w = np.ones(1)
    for rho, f in zip(states, ts.factors):
        w = np.kron(w, forward(rho, f).w)
    return Tomogram(w, ts.label)


def inverse_n(w: Tomogram | npt.ArrayLike, ts: TensorScheme, method: str | None = None) -> np.ndarray:
    """rho = sum_j w_j D_j, dense or by factored accumulation of Kronecker terms."""
    vec = w.w if isinstance(w, Tomogram) else np.asarray(w, dtype=float).reshape(-1)
    if vec.shape != (ts.size,):
        raise DimensionMismatch(f"{ts.n}-qubit tomogram has {ts.size} components, got {vec.shape[0]}")
    method = method or ("dense" if ts.n <= ts.materialize_limit else "factored")
    if method == "dense":
        return np.einsum("j,jkl->kl", vec.astype(np.complex128), ts.stack("quantizer"))
    if method != "factored":
        raise ValueError(f"unknown method {method!r}")
    n = ts.n
    t = vec.astype(np.complex128).reshape((4,) * n)
    # Replace each leading j_i axis by the (k_i, l_i) pair of D_i; pairs are appended.
    for f in ts.factors:
        t = np.tensordot(t, np.asarray(f.D), axes=([0], [0]))
    # Axes now (k_1, l_1, k_2, l_2, ...); reorder to (k_1..k_N, l_1..l_N).
    perm = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    return t.transpose(perm).reshape(2**n, 2**n)


@dataclass(frozen=True)
class TensorIdentityReport:
    n: int
    mode: str
    pairs_checked: int
    orthogonality_residual: float
    completeness_residual: float
    completeness_tuples: int
    sum_u_residual: float
    sum_d_residual: float
    trace_u_residual: float
    trace_d_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return all(
            v <= self.tol
            for v in (
                self.orthogonality_residual,
                self.completeness_residual,
                self.sum_u_residual,
                self.sum_d_residual,
                self.trace_u_residual,
                self.trace_d_residual,
            )
        )

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def _entry(ts: TensorScheme, which: str, js: Sequence[int], k: int, l: int) -> complex:
    """Entry (k, l), 1-based, of component (j_1..j_N), as a product of factor entries."""
    ks, ls = g_map(k, ts.n), g_map(l, ts.n)
    val = 1.0 + 0j
    for f, ji, ki, li in zip(ts.factors, js, ks, ls):
        val *= _factor_stack(f, which)[ji - 1, ki - 1, li - 1]
    return val


def verify_tensor_identities(
    ts: TensorScheme, mode: str = "sampled", samples: int = 1000, seed: int = 0, tol: float | None = None
) -> TensorIdentityReport:
    """Check orthogonality, completeness and both normalizations of the tensor scheme.

    Exhaustive mode (N <= 2) evaluates all (j, j') pairs and all spin-index
    tuples from materialized components.  Sampled mode draws ``samples``
    random pairs and tuples; components come from Kronecker products when
    N is within the materialize limit and from factor-entry products above it.
    """
    tol = ts.tols.orth_tol if tol is None else tol
    n = ts.n
    dim, size = ts.dim, ts.size
    rng = np.random.default_rng(seed)
    if mode == "exhaustive":
        if n > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive verification is limited to N <= {EXHAUSTIVE_LIMIT}")
        u, d = ts.stack("dequantizer"), ts.stack("quantizer")
        gram = np.einsum("jkl,mlk->jm", u, d)
        orth = float(np.max(np.abs(gram - np.eye(size))))
        comp = completeness_residual(u, d)
        pairs, tuples = size * size, dim**4
    elif mode == "sampled":
        materialized = n <= ts.materialize_limit
        if materialized:
            u, d = ts.stack("dequantizer"), ts.stack("quantizer")
        orth = 0.0
        for _ in range(samples):
            j, jp = (int(x) for x in rng.integers(1, size + 1, size=2))
            if rng.random() < 0.25:
                jp = j
            if materialized:
                val = cmatrix.trace_product(u[j - 1], d[jp - 1])
            else:
                js, jps = f_map_inverse(j, n), f_map_inverse(jp, n)
                val = sum(
                    _entry(ts, "dequantizer", js, k, l) * _entry(ts, "quantizer", jps, l, k)
                    for k in range(1, dim + 1)
                    for l in range(1, dim + 1)
                )
            orth = max(orth, abs(val - (1.0 if j == jp else 0.0)))
        comp = 0.0
        tuples = max(1, samples // 10)
        for _ in range(tuples):
            k, l, kp, lp = (int(x) for x in rng.integers(1, dim + 1, size=4))
            if rng.random() < 0.5:
                kp, lp = k, l
            if materialized:
                total = complex(np.dot(u[:, k - 1, l - 1], d[:, lp - 1, kp - 1]))
            else:
                total = sum(
                    _entry(ts, "dequantizer", f_map_inverse(j, n), k, l)
                    * _entry(ts, "quantizer", f_map_inverse(j, n), lp, kp)
                    for j in range(1, size + 1)
                )
            comp = max(comp, abs(total - (1.0 if (k == kp and l == lp) else 0.0)))
        pairs = samples
    else:
        raise ValueError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")

    if n <= ts.materialize_limit:
        u = ts.stack("dequantizer")
        d = ts.stack("quantizer")
        eye = np.eye(dim)
        sum_u = float(np.max(np.abs(u.sum(axis=0) - dim * eye)))
        sum_d = float(np.max(np.abs(d.sum(axis=0) - eye)))
        tr_u = float(np.max(np.abs(np.trace(u, axis1=1, axis2=2) - 1.0)))
        tr_d = float(np.max(np.abs(np.trace(d, axis1=1, axis2=2) - 1.0 / dim)))
    else:
        # Factored: sum over j and traces are products of per-factor values.
        sum_u = sum_d = tr_u = tr_d = 0.0
        su = np.ones(1)
        sd = np.ones(1)
        for f in ts.factors:
            su = np.kron(su, np.asarray(f.U).sum(axis=0).reshape(-1))
            sd = np.kron(sd, np.asarray(f.D).sum(axis=0).reshape(-1))
        # Kron of flattened 2x2 blocks gives qubit-interleaved order; compare against the same layout.
        ident = np.ones(1)
        for _ in range(n):
            ident = np.kron(ident, np.eye(2).reshape(-1))
        sum_u = float(np.max(np.abs(su - dim * ident)))
        sum_d = float(np.max(np.abs(sd - ident)))
        tu = np.ones(1)
        td = np.ones(1)
        for f in ts.factors:
            tu = np.kron(tu, np.trace(f.U, axis1=1, axis2=2))
            td = np.kron(td, np.trace(f.D, axis1=1, axis2=2))
        tr_u = float(np.max(np.abs(tu - 1.0)))
        tr_d = float(np.max(np.abs(td - 1.0 / dim)))

    return TensorIdentityReport(
        n=n,
        mode=mode,
        pairs_checked=pairs,
        orthogonality_residual=float(orth),
        completeness_residual=float(comp),
        completeness_tuples=tuples,
        sum_u_residual=sum_u,
        sum_d_residual=sum_d,
        trace_u_residual=tr_u,
        trace_d_residual=tr_d,
        tol=tol,
    )


def factor_diagnostics_passed(ts: TensorScheme) -> bool:
    return all(scheme_diagnostics(f).passed for f in ts.factors)
