import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from collage_mco.basis import (
    LEFT_HALF,
    RIGHT_HALF,
    HatBasis,
    HatFunction,
    Interval,
    build_multiresolution_basis,
)
from collage_mco.errors import ConfigError

UNIT = Interval()


def test_interval_validation():
    with pytest.raises(ConfigError):
        Interval(1.0, 1.0)
    assert Interval(-1, 3).length == 4


@pytest.mark.parametrize("counts,n", [([11, 23], 38), ([11, 23, 47], 87), ([1], 3)])
def test_function_counts(counts, n):
    assert len(build_multiresolution_basis(UNIT, counts, True)) == n


def test_minimal_basis():
    b = build_multiresolution_basis(UNIT, [1], False)
    assert len(b) == 1
    assert b.functions[0].peak == 0.5
    assert b.eval(0, 0.5) == 1.0


def test_empty_or_bad_counts():
    with pytest.raises(ConfigError):
        build_multiresolution_basis(UNIT, [], True)
    with pytest.raises(ConfigError):
        build_multiresolution_basis(UNIT, [3, 0], True)


def test_ordering_and_peaks():
    b = build_multiresolution_basis(Interval(0.0, 2.0), [3, 7], True)
    coarse, fine = b.level_slices()
    np.testing.assert_allclose(b.peaks[coarse], np.linspace(0, 2, 5), atol=1e-15)
    np.testing.assert_allclose(b.peaks[fine], np.linspace(0, 2, 9), atol=1e-15)
    assert b.functions[0].kind == LEFT_HALF and b.functions[4].kind == RIGHT_HALF


def test_hat_values_and_slopes():
    h = HatFunction(0.0, 0.5, 1.0)
    assert h(0.5) == 1.0
    assert h(0.25) == 0.5
    assert h(1.0) == 0.0
    assert h.deriv(0.25) == 2.0
    assert h.deriv(0.75) == -2.0
    # right-hand slope at the peak
    assert h.deriv(0.5) == -2.0


def test_half_hat_slopes_at_ends(basis38):
    # left half hat: right-hand slope at x_a; right half hat: left-hand slope at x_b
    assert basis38.eval_deriv(0, 0.0) == pytest.approx(-12.0)
    assert basis38.eval_deriv(12, 1.0) == pytest.approx(12.0)
    assert basis38.eval(12, 1.0) == 1.0


def test_index_errors(basis38):
    with pytest.raises(IndexError):
        basis38.eval(38, 0.3)
    with pytest.raises(IndexError):
        basis38.eval_deriv(-39, 0.3)


def test_expand_examples(basis38):
    e1 = np.zeros(38)
    e1[0] = 1.0
    assert basis38.expand(e1, 0.0) == 1.0
    assert basis38.expand(np.zeros(38), 0.37) == 0.0
    with pytest.raises(ValueError):
        basis38.expand(np.zeros(37), 0.5)


def test_partition_of_unity_per_level():
    b = build_multiresolution_basis(UNIT, [11, 23, 47], True)
    x = np.random.default_rng(0).uniform(0, 1, 1000)
    for sl in b.level_slices():
        lam = np.zeros(len(b))
        lam[sl] = 1.0
        np.testing.assert_allclose(b.expand(lam, x), 1.0, atol=1e-14)
        lam[sl] = -2.5
        np.testing.assert_allclose(b.expand(lam, x), -2.5, atol=1e-14)


def test_nesting(basis38):
    coarse, fine = basis38.level_slices()
    fp = basis38.peaks[fine]
    for p in basis38.peaks[coarse]:
        assert np.min(np.abs(fp - p)) <= 1e-14


def test_interpolant_reproduces_linear(basis38):
    lam = basis38.interpolant(lambda x: 1 + 3 * x)
    x = np.linspace(0, 1, 777)
    np.testing.assert_allclose(basis38.expand(lam, x), 1 + 3 * x, atol=1e-13)


def test_interior_only(basis38):
    inner = basis38.interior_only()
    assert len(inner) == 34
    assert all(f.left < f.peak < f.right for f in inner.functions)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.floats(1e-9, 1e-3), st.integers(0, 37))
def test_eval_lipschitz(x, h, i):
    b = build_multiresolution_basis(UNIT, [11, 23], True)
    x2 = min(x + h, 1.0)
    slope_max = 24.0
    assert abs(b.eval(i, x2) - b.eval(i, x)) <= slope_max * (x2 - x) + 1e-15


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_expand_linear(seed):
    b = build_multiresolution_basis(UNIT, [11, 23], True)
    rng = np.random.default_rng(seed)
    lam, mu = rng.normal(size=(2, 38))
    x = rng.uniform(0, 1, 50)
    np.testing.assert_allclose(b.expand(lam + mu, x), b.expand(lam, x) + b.expand(mu, x), atol=1e-14)


def test_values_matrix_matches_eval(basis38):
    x = np.array([0.0, 0.013, 0.5, 0.91, 1.0])
    V = basis38.values(x)
    D = basis38.derivs(x)
    for i in range(38):
        np.testing.assert_array_equal(V[:, i], basis38.eval(i, x))
        np.testing.assert_array_equal(D[:, i], basis38.eval_deriv(i, x))


def test_basis_is_immutable(basis38):
    assert isinstance(basis38, HatBasis)
    with pytest.raises(Exception):
        basis38.include_half_hats = False
