import pytest
from hypothesis import given, strategies as st

from wishart2cut.model import FiniteSize, ModelParams, ParameterError, effective_params, finite_size, validate


def test_validate_interior():
    p = ModelParams(4, 0.3, 0.2)
    assert validate(p) is p


@pytest.mark.parametrize("p, msg", [
    (ModelParams(4, 0.3, 1.0), "c must lie in"),
    (ModelParams(-1, 0.3, 0.2), "a must be positive"),
    (ModelParams(2, 0.0, 0.5), "beta must lie in"),
])
def test_validate_rejects(p, msg):
    with pytest.raises(ParameterError, match=msg):
        validate(p)


def test_degenerate_flag():
    assert ModelParams(1.0, 0.5, 0.5).degenerate
    assert not ModelParams(1.5, 0.5, 0.5).degenerate


def test_finite_size_exact():
    fs = finite_size(ModelParams(4, 0.5, 0.5), 200)
    assert (fs.N, fs.N1) == (100, 50)


def test_finite_size_rounding_bound():
    p = ModelParams(4, 0.5, 0.5)
    fs = finite_size(p, 201)
    assert fs.N in (100, 101)
    assert abs(fs.c_N - p.c) <= 1 / 201


def test_finite_size_too_small():
    with pytest.raises(ParameterError):
        finite_size(ModelParams(4, 0.5, 0.001), 100)


@pytest.mark.parametrize("fs, a, want", [
    (FiniteSize(200, 100, 30), 4, (4, 0.3, 0.5)),
    (FiniteSize(100, 99, 1), 2, (2, 1 / 99, 0.99)),
    (FiniteSize(3, 2, 1), 10, (10, 0.5, 2 / 3)),
])
def test_effective_params(fs, a, want):
    p = effective_params(fs, a)
    assert (p.a, p.beta, p.c) == pytest.approx(want, rel=1e-15)


def test_finite_size_invalid():
    with pytest.raises(ParameterError):
        FiniteSize(5, 6, 2)
    with pytest.raises(ParameterError):
        FiniteSize(10, 5, 5)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_effective_converges(beta, c):
    p = ModelParams(3.0, beta, c)
    for M in (100, 1000, 10000):
        if round(c * M) < 2 or round(beta * round(c * M)) < 1:
            continue
        e = effective_params(finite_size(p, M), p.a)
        assert abs(e.c - c) <= 0.5 / M + 1e-15
        # N1 rounding costs at most 1/(2N) plus any clamp
        assert abs(e.beta - beta) <= 1.0 / round(c * M) + 1e-15


def test_swapped_is_involution():
    p = ModelParams(4.0, 0.3, 0.2)
    q = p.swapped().swapped()
    assert (q.a, q.beta, q.c) == pytest.approx((p.a, p.beta, p.c))
