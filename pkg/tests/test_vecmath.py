import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from toolselect.vecmath import (
    DimensionMismatchError,
    ZeroVectorError,
    cosine,
    l2_normalize,
)

finite_vectors = hnp.arrays(
    np.float64,
    st.integers(min_value=1, max_value=16),
    elements=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
).filter(lambda v: np.linalg.norm(v) > 1e-6)


def test_normalize_three_four_five():
    out = l2_normalize([3.0, 4.0, 0.0, 0.0])
    np.testing.assert_allclose(out, [0.6, 0.8, 0.0, 0.0], rtol=0, atol=1e-15)


def test_normalize_rejects_zero_vector():
    with pytest.raises(ZeroVectorError):
        l2_normalize(np.zeros(5))
    with pytest.raises(ZeroVectorError):
        l2_normalize([1e-13, 0.0, 0.0])


def test_normalize_rejects_matrix():
    with pytest.raises(ValueError):
        l2_normalize(np.ones((2, 2)))


@given(finite_vectors)
def test_normalize_gives_unit_norm(v):
    assert abs(np.linalg.norm(l2_normalize(v)) - 1.0) < 1e-9


@given(finite_vectors)
def test_normalize_idempotent(v):
    once = l2_normalize(v)
    np.testing.assert_allclose(l2_normalize(once), once, rtol=0, atol=1e-9)


@given(finite_vectors, st.floats(min_value=1e-3, max_value=1e3))
def test_normalize_scale_invariant(v, scale):
    np.testing.assert_allclose(
        l2_normalize(scale * v), l2_normalize(v), rtol=0, atol=1e-9
    )


def test_cosine_axes():
    assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert cosine([2.0, 0.0], [5.0, 0.0]) == pytest.approx(1.0)
    assert cosine([1.0, 0.0], [-3.0, 0.0]) == pytest.approx(-1.0)


def test_cosine_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        cosine([1.0, 0.0], [1.0, 0.0, 0.0])


def test_cosine_zero_vector():
    with pytest.raises(ZeroVectorError):
        cosine([0.0, 0.0], [1.0, 0.0])


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(1, 32))
def test_cosine_symmetric_and_bounded(seed, d):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(d), rng.standard_normal(d)
    if np.linalg.norm(a) < 1e-6 or np.linalg.norm(b) < 1e-6:
        return
    assert cosine(a, b) == cosine(b, a)
    assert abs(cosine(a, b)) <= 1.0 + 1e-12
    assert cosine(a, a) == pytest.approx(1.0, abs=1e-12)


@given(finite_vectors)
def test_cosine_equals_dot_after_normalization(v):
    u = l2_normalize(v)
    w = l2_normalize(v[::-1].copy())
    assert cosine(u, w) == pytest.approx(float(np.dot(u, w)), abs=1e-12)
