"""Hypothesis strategies shared by the test modules."""
import numpy as np
from hypothesis import strategies as st

from reinforce_dyn.model import make_model, random_model, random_point

dims = st.tuples(st.integers(2, 3), st.integers(2, 3))


@st.composite
def model_and_point(draw, max_scale=5.0, zero_diagonal=False, dims=dims):
    m, d = draw(dims)
    seed = draw(st.integers(0, 2**32 - 1))
    scale = draw(st.floats(0.0, max_scale))
    rng = np.random.default_rng(seed)
    return random_model(rng, m, d, scale=scale, zero_diagonal=zero_diagonal), random_point(rng, m, d)


def c3_model(rng, m, d, fill):
    """Random symmetric zero-diagonal model scaled to ``fill`` (0 < fill < 1) of the C3 bound."""
    a = rng.uniform(-1, 1, size=(d, m, m))
    a = np.triu(a, 1) + np.triu(a, 1).transpose(0, 2, 1)
    worst = np.abs(a).sum(axis=(0, 2)).max()
    return make_model(m, d, a * (4.0 * fill / worst))


@st.composite
def c3_models(draw, dims=dims):
    m, d = draw(dims)
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    return c3_model(rng, m, d, draw(st.floats(0.05, 0.95)))
