import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from spintomo import io
from spintomo.geometry import PurityClass, random_quadruple
from spintomo.scheme import build_scheme

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
modes = st.sampled_from(list(PurityClass))


@st.composite
def schemes(draw):
    return build_scheme(random_quadruple(draw(seeds), draw(modes)))


@st.composite
def hermitian_matrices(draw, dim=None, scale=10.0):
    n = draw(st.integers(min_value=1, max_value=8)) if dim is None else dim
    x = draw(st.lists(st.floats(-scale, scale), min_size=2 * n * n, max_size=2 * n * n))
    a = np.array(x[: n * n]).reshape(n, n) + 1j * np.array(x[n * n :]).reshape(n, n)
    return a + a.conj().T


@st.composite
def density_matrices(draw, dim=2):
    seed = draw(seeds)
    rng = np.random.default_rng(seed)
    rank = draw(st.integers(min_value=1, max_value=dim))
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture(scope="session")
def example1():
    return io.preset("example1")


@pytest.fixture(scope="session")
def example2():
    return io.preset("example2")
