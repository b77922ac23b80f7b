import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import ridge_ref
from stlf.errors import ConfigError, NumericalError, ShapeError
from stlf.ridge import normal_equation_residual, ridge_solve


def test_identity_example():
    assert np.allclose(ridge_solve(np.eye(2), np.array([1.0, 2.0]), 1.0), [0.5, 1.0], atol=1e-15)


@pytest.mark.parametrize("shape", [(40, 10), (20, 20), (10, 40)])
def test_matches_augmented_lstsq(rng, shape):
    D = rng.normal(size=shape)
    y = rng.normal(size=shape[0])
    for lam in (1e-3, 0.1, 10.0):
        assert np.allclose(ridge_solve(D, y, lam), ridge_ref(D, y, lam), atol=1e-9)


def test_primal_dual_agree(rng):
    D = rng.normal(size=(20, 5))
    y = rng.normal(size=20)
    p = ridge_solve(D, y, 0.1, form="primal")
    d = ridge_solve(D, y, 0.1, form="dual")
    assert np.max(np.abs(p - d)) <= 1e-9


@given(st.integers(0, 2**31), st.integers(2, 40), st.integers(1, 40),
       st.floats(1e-4, 1e2))
def test_residual_bound_any_shape(seed, n, m, lam):
    r = np.random.default_rng(seed)
    D, y = r.normal(size=(n, m)), r.normal(size=n)
    beta = ridge_solve(D, y, lam)
    assert normal_equation_residual(D, y, lam, beta) <= 1e-8


@given(st.integers(0, 2**31), st.integers(3, 30), st.integers(1, 30), st.floats(1e-3, 10.0))
def test_forms_agree_property(seed, n, m, lam):
    r = np.random.default_rng(seed)
    D, y = r.normal(size=(n, m)), r.normal(size=n)
    p = ridge_solve(D, y, lam, form="primal")
    d = ridge_solve(D, y, lam, form="dual")
    assert np.max(np.abs(p - d)) <= 1e-9 * max(1.0, np.max(np.abs(p)))


def test_shrinkage_monotone(rng):
    D, y = rng.normal(size=(30, 8)), rng.normal(size=30)
    norms = [np.linalg.norm(ridge_solve(D, y, lam)) for lam in 10.0 ** np.arange(-4, 3)]
    assert all(a >= b for a, b in zip(norms, norms[1:]))


def test_zero_lambda_full_rank_is_least_squares(rng):
    D, y = rng.normal(size=(30, 4)), rng.normal(size=30)
    assert np.allclose(ridge_solve(D, y, 0.0), np.linalg.lstsq(D, y, rcond=None)[0], atol=1e-12)


def test_zero_lambda_singular_names_pivot():
    D = np.ones((5, 2))
    with pytest.raises(NumericalError, match="pivot"):
        ridge_solve(D, np.arange(5.0), 0.0)


def test_bad_inputs():
    with pytest.raises(ConfigError):
        ridge_solve(np.eye(2), np.ones(2), -1.0)
    with pytest.raises(ShapeError):
        ridge_solve(np.eye(2), np.ones(3), 1.0)
    with pytest.raises(ConfigError):
        ridge_solve(np.eye(2), np.ones(2), 1.0, form="qr")
