"""Bloch-vector quadruples that seed a normalized four-component scheme.

A quadruple {e_1, ..., e_4} is admissible when the vectors close
(e_1 + e_2 + e_3 + e_4 = 0), each has length at most one, and no three of
them are coplanar.  Geometrically the vectors are the directed edges of a
non-degenerate triangular pyramid obtained by folding a planar
quadrilateral along a diagonal; :func:`fold_quadrilateral` performs that
construction directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from .errors import (
    CoplanarTriple,
    DegenerateFold,
    ExhaustedAttempts,
    FourthVectorTooLong,
    InvalidQuadruple,
    LengthExceedsOne,
    NonFiniteInput,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances


class BlochVector(NamedTuple):
    alpha: float
    beta: float
    gamma: float

    @property
    def length(self) -> float:
        return math.sqrt(self.alpha**2 + self.beta**2 + self.gamma**2)


class PurityClass(str, enum.Enum):
    ALL_PURE = "AllPure"
    ALL_MIXED = "AllMixed"
    HETEROGENEOUS = "Heterogeneous"


class VectorClass(str, enum.Enum):
    PURE = "pure"
    MIXED = "mixed"
    INVALID = "invalid"


def _as_vectors(e: npt.ArrayLike, count: int) -> np.ndarray:
    v = np.array(e, dtype=float)
    if v.shape != (count, 3):
        raise ValueError(f"expected {count} three-component vectors, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput("Bloch vectors must be finite")
    return v


def classify_vector(length: float, tols: Tolerances = DEFAULT_TOLERANCES) -> VectorClass:
    # Lengths within len_tol below 1 count as pure to avoid a knife edge.
    if length > 1.0 + tols.len_tol:
        return VectorClass.INVALID
    if length > 1.0 - tols.len_tol:
        return VectorClass.PURE
    return VectorClass.MIXED


def coplanarity_determinants(e: npt.ArrayLike) -> np.ndarray:
    """Delta_k = det(e_{k+1}, e_{k+2}, e_{k+3}) with indices taken cyclically.

    For a closed quadruple the four values alternate in sign:
    Delta_1 = -Delta_2 = Delta_3 = -Delta_4.
    """
    v = _as_vectors(e, 4)
    return np.array([np.linalg.det(v[[(k + 1) % 4, (k + 2) % 4, (k + 3) % 4]]) for k in range(4)])


def _purity_class(classes: Sequence[VectorClass]) -> PurityClass:
    if all(c is VectorClass.PURE for c in classes):
        return PurityClass.ALL_PURE
    if all(c is VectorClass.MIXED for c in classes):
        return PurityClass.ALL_MIXED
    return PurityClass.HETEROGENEOUS


@dataclass(frozen=True)
class ValidationReport:
    closure_residual: float
    lengths: tuple[float, ...]
    deltas: tuple[float, ...]
    alternation_residual: float
    vector_classes: tuple[VectorClass, ...]
    purity_class: PurityClass
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "closure_residual": self.closure_residual,
            "lengths": list(self.lengths),
            "deltas": list(self.deltas),
            "alternation_residual": self.alternation_residual,
            "vector_classes": [c.value for c in self.vector_classes],
            "purity_class": self.purity_class.value,
            "failures": list(self.failures),
        }


def validate_quadruple(e: npt.ArrayLike, tols: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    """Check closure, lengths and non-coplanarity; never raises on bad geometry."""
    v = _as_vectors(e, 4)
    closure = float(np.linalg.norm(v.sum(axis=0)))
    lengths = tuple(float(x) for x in np.linalg.norm(v, axis=1))
    deltas = coplanarity_determinants(v)
    signs = np.array([1.0, -1.0, 1.0, -1.0])
    alternation = float(np.max(np.abs(deltas * signs - deltas[0])))
    classes = tuple(classify_vector(x, tols) for x in lengths)

    failures = []
    if closure > tols.closure_tol:
        failures.append(f"closure residual |e1+e2+e3+e4| = {closure:.3e} exceeds {tols.closure_tol:.1e}")
    for k, (length, cls) in enumerate(zip(lengths, classes), start=1):
        if cls is VectorClass.INVALID:
            failures.append(f"|e{k}| = {length:.6g} exceeds 1")
    for k, d in enumerate(deltas, start=1):
        if abs(d) < tols.coplanar_tol:
            failures.append(f"Delta_{k} = {d:.3e} vanishes (|Delta| < {tols.coplanar_tol:.1e}): triple is coplanar")

    return ValidationReport(
        closure_residual=closure,
        lengths=lengths,
        deltas=tuple(float(d) for d in deltas),
        alternation_residual=alternation,
        vector_classes=classes,
        purity_class=_purity_class(classes),
        failures=tuple(failures),
    )


@dataclass(frozen=True, eq=False)
class SchemeQuadruple:
    """Four admissible Bloch vectors, stored as a read-only (4, 3) array."""

    vectors: np.ndarray
    tols: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        v = _as_vectors(self.vectors, 4)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def __eq__(self, other):
        if not isinstance(other, SchemeQuadruple):
            return NotImplemented
        return bool(np.array_equal(self.vectors, other.vectors))

    __hash__ = None

    @classmethod
    def from_vectors(cls, e: npt.ArrayLike, tols: Tolerances = DEFAULT_TOLERANCES) -> "SchemeQuadruple":
        """Validate and wrap; raises :class:`InvalidQuadruple` with the report attached."""
        report = validate_quadruple(e, tols)
        if not report.passed:
            raise InvalidQuadruple("; ".join(report.failures), report)
        return cls(np.array(e, dtype=float), tols)

    @property
    def bloch_vectors(self) -> tuple[BlochVector, ...]:
        return tuple(BlochVector(*map(float, row)) for row in self.vectors)

    @property
    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    @property
    def deltas(self) -> np.ndarray:
        return coplanarity_determinants(self.vectors)

    @property
    def purity_class(self) -> PurityClass:
        return _purity_class([classify_vector(x, self.tols) for x in self.lengths])

    def report(self) -> ValidationReport:
        return validate_quadruple(self.vectors, self.tols)


def quadruple_from_triple(
    e1: npt.ArrayLike, e2: npt.ArrayLike, e3: npt.ArrayLike, tols: Tolerances = DEFAULT_TOLERANCES
) -> SchemeQuadruple:
    """Complete three non-coplanar vectors with e4 = -(e1 + e2 + e3)."""
    triple = _as_vectors([e1, e2, e3], 3)
    for k, length in enumerate(np.linalg.norm(triple, axis=1), start=1):
        if length > 1.0 + tols.len_tol:
            raise LengthExceedsOne(f"|e{k}| = {length:.6g} exceeds 1")
    vol = float(np.linalg.det(triple))
    if abs(vol) < tols.coplanar_tol:
        raise CoplanarTriple(f"Delta_4 = det(e1, e2, e3) = {vol:.3e} vanishes: triple is coplanar")
    e4 = -(triple[0] + triple[1] + triple[2])
    n4 = float(np.linalg.norm(e4))
    if n4 > 1.0 + tols.len_tol:
        raise FourthVectorTooLong(f"|e4| = {n4:.6g} exceeds 1")
    return SchemeQuadruple.from_vectors(np.vstack([triple, e4]), tols)


class FoldDiagonal(str, enum.Enum):
    V0V2 = "V0V2"
    V1V3 = "V1V3"


@dataclass(frozen=True, eq=False)
class PlanarQuadrilateral:
    """Four planar vertices listed in traversal order; edges are V_{i+1} - V_i."""

    vertices: np.ndarray
    fold_diagonal: FoldDiagonal = FoldDiagonal.V0V2

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.shape != (4, 2):
            raise ValueError(f"expected 4 planar vertices, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "fold_diagonal", FoldDiagonal(self.fold_diagonal))

    @property
    def side_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1)


def _cross2(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1 = _cross2(q2 - q1, p1 - q1)
    d2 = _cross2(q2 - q1, p2 - q1)
    d3 = _cross2(p2 - p1, q1 - p1)
    d4 = _cross2(p2 - p1, q2 - p1)
    return d1 * d2 < 0 and d3 * d4 < 0


def rotation_about_axis(axis: npt.ArrayLike, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a right-handed turn about ``axis``."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + math.sin(angle) * kx + (1.0 - math.cos(angle)) * (kx @ kx)


def fold_quadrilateral(
    q: PlanarQuadrilateral, fold_angle: float, tols: Tolerances = DEFAULT_TOLERANCES
) -> SchemeQuadruple:
    """Bend ``q`` along its fold diagonal and return the four directed 3D edges.

    The vertex off the diagonal on the V1 side (V1 for a V0V2 fold, V2 for
    a V1V3 fold) is rotated about the diagonal by ``fold_angle``.  Both
    triangles keep their shape, so edge lengths are preserved and the edge
    loop stays closed.
    """
    if not 0.0 <= fold_angle <= math.pi:
        raise ValueError(f"fold_angle must lie in [0, pi], got {fold_angle}")
    sides = q.side_lengths
    if np.any(sides > 1.0 + tols.len_tol):
        raise LengthExceedsOne(f"side lengths {sides.tolist()} must not exceed 1")
    v2d = q.vertices
    if _segments_cross(v2d[0], v2d[1], v2d[2], v2d[3]) or _segments_cross(v2d[1], v2d[2], v2d[3], v2d[0]):
        raise ValueError("quadrilateral is self-intersecting")

    pts = np.hstack([v2d, np.zeros((4, 1))])
    if q.fold_diagonal is FoldDiagonal.V0V2:
        a, b, moving = 0, 2, 1
    else:
        a, b, moving = 1, 3, 2
    axis = pts[b] - pts[a]
    if np.linalg.norm(axis) == 0.0:
        raise DegenerateFold("fold diagonal has zero length")
    rot = rotation_about_axis(axis, fold_angle)
    pts[moving] = pts[a] + rot @ (pts[moving] - pts[a])

    edges = np.roll(pts, -1, axis=0) - pts
    deltas = coplanarity_determinants(edges)
    if np.min(np.abs(deltas)) < tols.coplanar_tol:
        raise DegenerateFold(f"folded pyramid is flat: min |Delta| = {np.min(np.abs(deltas)):.3e}")
    return SchemeQuadruple.from_vectors(edges, tols)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniformly random rotation matrix from a normalized Gaussian quaternion."""
    quat = rng.normal(size=4)
    w, x, y, z = quat / np.linalg.norm(quat)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def _random_pure(rng: np.random.Generator, tols: Tolerances) -> SchemeQuadruple:
    # Unit rhombus, folded and rotated: all four edges keep length 1.
    theta = rng.uniform(0.15, math.pi - 0.15)
    c, s = math.cos(theta), math.sin(theta)
    quad = PlanarQuadrilateral(
        [[0.0, 0.0], [1.0, 0.0], [1.0 + c, s], [c, s]],
        fold_diagonal=FoldDiagonal.V0V2 if rng.random() < 0.5 else FoldDiagonal.V1V3,
    )
    folded = fold_quadrilateral(quad, rng.uniform(0.15, math.pi - 0.15), tols)
    rotated = folded.vectors @ random_rotation(rng).T
    # Rhombus edges are exact unit vectors; renormalize rounding noise away.
    rotated = rotated / np.linalg.norm(rotated, axis=1, keepdims=True)
    rotated[3] = -(rotated[0] + rotated[1] + rotated[2])
    return SchemeQuadruple.from_vectors(rotated, tols)


def _random_ball(rng: np.random.Generator, radius: float) -> np.ndarray:
    d = rng.normal(size=3)
    return d / np.linalg.norm(d) * radius * rng.random() ** (1.0 / 3.0)


def _random_mixed(rng: np.random.Generator, tols: Tolerances, radius: float) -> SchemeQuadruple:
    triple = [_random_ball(rng, radius) for _ in range(3)]
    quad = quadruple_from_triple(*triple, tols=tols)
    if quad.purity_class is not PurityClass.ALL_MIXED:
        raise FourthVectorTooLong("fourth vector is not strictly mixed")
    return quad


def _random_heterogeneous(rng: np.random.Generator, tols: Tolerances) -> SchemeQuadruple:
    # Two unit sides and two shorter ones: two pure and two mixed edges.
    phi = rng.uniform(0.3, 2.2)
    v0, v1 = np.zeros(2), np.array([1.0, 0.0])
    v2 = v1 + np.array([-math.cos(phi), math.sin(phi)])
    for _ in range(1000):
        v3 = rng.uniform(-1.0, 1.0, size=2)
        if np.linalg.norm(v3 - v2) < 0.98 and np.linalg.norm(v3) < 0.98:
            break
    else:
        raise DegenerateFold("no admissible fourth vertex found")
    quad = PlanarQuadrilateral(
        [v0, v1, v2, v3], fold_diagonal=FoldDiagonal.V0V2 if rng.random() < 0.5 else FoldDiagonal.V1V3
    )
    folded = fold_quadrilateral(quad, rng.uniform(0.15, math.pi - 0.15), tols)
    rotated = folded.vectors @ random_rotation(rng).T
    rotated[3] = -(rotated[0] + rotated[1] + rotated[2])
    return SchemeQuadruple.from_vectors(rotated, tols)


def random_quadruple(
    seed: int | np.random.Generator,
    mode: PurityClass | str = PurityClass.ALL_MIXED,
    tols: Tolerances = DEFAULT_TOLERANCES,
    max_attempts: int = 10_000,
    mixed_radius: float = 0.9,
    min_volume: float = 1e-2,
) -> SchemeQuadruple:
    """Draw an admissible quadruple deterministically from ``seed``.

    AllMixed samples three points uniformly in a ball of radius
    ``mixed_radius`` and closes them; AllPure folds a random unit rhombus;
    Heterogeneous folds a quadrilateral with two unit sides.  Candidates
    failing validation, or with min |Delta_k| below ``min_volume``, are
    rejected and redrawn; nearly flat pyramids give quantizers with entries
    of order 1/|Delta| and lose digits accordingly.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    mode = PurityClass(mode)
    if not 0.0 < mixed_radius < 1.0:
        raise ValueError("mixed_radius must lie in (0, 1)")
    for _ in range(max_attempts):
        try:
            if mode is PurityClass.ALL_PURE:
                quad = _random_pure(rng, tols)
            elif mode is PurityClass.ALL_MIXED:
                quad = _random_mixed(rng, tols, mixed_radius)
            else:
                quad = _random_heterogeneous(rng, tols)
        except (InvalidQuadruple, CoplanarTriple, FourthVectorTooLong, DegenerateFold, LengthExceedsOne, ValueError):
            continue
        if quad.purity_class is mode and np.min(np.abs(quad.deltas)) >= max(min_volume, tols.coplanar_tol):
            return quad
    raise ExhaustedAttempts(f"no admissible {mode.value} quadruple after {max_attempts} attempts")
