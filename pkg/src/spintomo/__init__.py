"""Four-component qubit tomography from Bloch-vector quadruples."""

from .errors import SpinTomoError
from .geometry import (
    PlanarQuadrilateral,
    PurityClass,
    SchemeQuadruple,
    fold_quadrilateral,
    quadruple_from_triple,
    random_quadruple,
    validate_quadruple,
)
from .io import load_scheme, preset, save_scheme
from .multiqubit import TensorScheme, forward_n, inverse_n, verify_tensor_identities
from .scheme import Spin12Scheme, build_scheme, scheme_diagnostics
from .tolerances import DEFAULT_TOLERANCES, Tolerances
from .tomography import Tomogram, estimate_state, forward, inverse, is_physical, purity, simulate_counts

__version__ = "0.1.0"
