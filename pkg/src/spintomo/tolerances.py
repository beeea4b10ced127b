from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by the geometry, scheme and tomography layers.

    ``coplanar_tol`` is deliberately looser than the arithmetic tolerances:
    the coplanarity determinant ends up in a denominator.
    """

    herm_tol: float = 1e-10
    closure_tol: float = 1e-10
    coplanar_tol: float = 1e-8
    len_tol: float = 1e-12
    orth_tol: float = 1e-10
    psd_tol: float = 1e-10
    pole_tol: float = 1e-12

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Tolerances":
        known = {f.name for f in fields(cls)}
        return cls(**{k: float(v) for k, v in data.items() if k in known})

    def with_(self, **changes) -> "Tolerances":
        return replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()
