import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as sint

from dunklkit.dunkl1d import (
    Grid1D,
    SampledFunction,
    dunkl_inverse,
    dunkl_kernel,
    dunkl_kernel_complex,
    dunkl_transform,
    transform_constant,
    weight,
    weighted_norm_sq,
)
from dunklkit.errors import DomainError
from dunklkit.pwverify import bump_function

K_SET = [0.0, 0.3, 0.5, 1.0, 2.0, 5.0]


def gaussian(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2 / 2)


def gaussian_fn(grid=(-12.0, 12.0, 241)):
    return SampledFunction.from_callable(gaussian, grid)


@pytest.mark.parametrize("k, x, expected", [(1, -3, 9), (0, 5, 1), (0.5, 2, 2)])
def test_weight(k, x, expected):
    assert weight(k, x) == expected


def test_weight_rejects_negative_k():
    with pytest.raises(DomainError):
        weight(-0.1, 1.0)


@pytest.mark.parametrize(
    "k, expected", [(0, math.sqrt(2 * math.pi)), (0.5, 2.0), (1, math.sqrt(2 * math.pi))]
)
def test_transform_constant_values(k, expected):
    assert transform_constant(k) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("k", K_SET)
def test_transform_constant_by_quadrature(k):
    val, _ = sint.quad(lambda x: 2 * math.exp(-x * x / 2) * x ** (2 * k), 0, np.inf,
                       epsabs=0, epsrel=1e-13, limit=200)
    assert transform_constant(k) == pytest.approx(val, rel=1e-10)


@pytest.mark.parametrize("k", K_SET)
def test_kernel_at_origin(k):
    assert dunkl_kernel(k, 0.7, 0.0) == 1.0


def test_kernel_classical():
    xi, x = np.meshgrid(np.linspace(-5, 5, 21), np.linspace(-3, 3, 13))
    assert np.allclose(dunkl_kernel(0.0, xi, x), np.exp(1j * xi * x), atol=1e-14)


@pytest.mark.parametrize("k", K_SET)
def test_kernel_bounded_on_real_axis(k):
    xi, x = np.meshgrid(np.linspace(-10, 10, 50), np.linspace(-10, 10, 50))
    assert np.max(np.abs(dunkl_kernel(k, xi, x))) <= 1 + 1e-13


@given(st.sampled_from(K_SET), st.floats(-30, 30), st.floats(-30, 30))
def test_kernel_conjugate_symmetry(k, xi, x):
    assert dunkl_kernel(k, xi, x) == pytest.approx(np.conj(dunkl_kernel(k, -xi, x)), abs=1e-15)


def test_kernel_complex_reduces_to_real_frequency():
    xi = np.linspace(-6, 6, 25)
    assert np.array_equal(dunkl_kernel_complex(1.5, 1j * xi, 0.8), dunkl_kernel(1.5, xi, 0.8))


def test_kernel_complex_exponential_case():
    assert dunkl_kernel_complex(0.0, 1.0, 1.0) == pytest.approx(math.e, rel=1e-15)


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-5, 5))
def test_kernel_growth_bound(re, im, x):
    val = dunkl_kernel_complex(1.5, complex(re, im), x)
    assert abs(val) <= math.exp(abs(re) * abs(x)) * (1 + 1e-12)


def test_scaled_kernel():
    lam, x = 40.0 - 3.0j, 0.9
    assert dunkl_kernel_complex(1.0, lam, x, scaled=True) == pytest.approx(
        dunkl_kernel_complex(1.0, lam, x) * math.exp(-40.0 * 0.9), rel=1e-12
    )


def test_gaussian_transform_k1():
    h = dunkl_transform(1.0, gaussian_fn(), (-8.0, 8.0, 81))
    ref = gaussian(h.nodes)
    # relative where the value is well above the roundoff of O(1) terms
    core = np.abs(h.nodes) <= 5.0
    assert np.max(np.abs(h.values[core] - ref[core]) / ref[core]) < 1e-8
    assert np.max(np.abs(h.values - ref)) < 1e-14


@pytest.mark.parametrize("k", K_SET)
def test_gaussian_is_fixed(k):
    # the Gaussian is an eigenfunction with eigenvalue 1 at every k
    h = dunkl_transform(k, gaussian_fn(), (-5.0, 5.0, 20))
    assert np.max(np.abs(h.values - gaussian(h.nodes))) < 1e-10


def test_real_even_gives_real_even():
    f = SampledFunction.from_callable(lambda x: np.exp(-np.asarray(x) ** 4), (-6.0, 6.0, 121))
    h = dunkl_transform(0.7, f, (-6.0, 6.0, 61))
    assert np.max(np.abs(h.values.imag)) < 1e-14
    assert np.allclose(h.values, h.values[::-1], atol=1e-14)


@pytest.mark.parametrize("k", [0.0, 0.5, 1.0, 2.0])
def test_plancherel_shifted_gaussian(k):
    f = SampledFunction.from_callable(lambda x: np.exp(-(np.asarray(x) - 0.7) ** 2), (-9.0, 9.0, 361))
    h = dunkl_transform(k, f, (-14.0, 14.0, 281))
    h_wide = SampledFunction(h.grid, h.values, evaluator=h.evaluator, pair_evaluator=h.pair_evaluator)
    lhs = weighted_norm_sq(k, f)
    rhs = weighted_norm_sq(k, h_wide)
    assert rhs == pytest.approx(lhs, rel=1e-7)


def test_gaussian_round_trip_k_half():
    f = gaussian_fn()
    h = dunkl_transform(0.5, f, (-12.0, 12.0, 241))
    g = dunkl_inverse(0.5, h, (-4.0, 4.0, 41))
    assert np.max(np.abs(g.values - gaussian(g.nodes))) < 1e-7
    assert h(0.0) == pytest.approx(1.0, abs=1e-12)


def test_bump_round_trip():
    f = bump_function(1.0, (-1.0, 1.0, 41))
    h = dunkl_transform(0.5, f, (-200.0, 200.0, 401))
    g = dunkl_inverse(0.5, h, (-1.0, 1.0, 41))
    assert np.max(np.abs(g.values - f.values)) < 1e-6


def test_odd_stays_odd():
    f = SampledFunction.from_callable(lambda x: np.asarray(x) * gaussian(x), (-12.0, 12.0, 241))
    h = dunkl_transform(1.0, f, (-12.0, 12.0, 121))
    g = dunkl_inverse(1.0, h, (-3.0, 3.0, 31))
    assert np.allclose(g.values, -g.values[::-1], atol=1e-12)
    assert np.max(np.abs(g.values - f(g.nodes))) < 1e-7


def test_declared_radius_enforced():
    with pytest.raises(DomainError):
        SampledFunction.from_callable(gaussian, (-3.0, 3.0, 7), declared_support_radius=1.0)


def test_values_shape_checked():
    with pytest.raises(DomainError):
        SampledFunction(Grid1D(0.0, 1.0, 3), np.zeros(4))


def test_csv_and_json_round_trip():
    f = dunkl_transform(0.5, gaussian_fn(), (-3.0, 3.0, 13))
    g = SampledFunction.from_csv(__import__("io").StringIO(f.to_csv()))
    assert np.array_equal(g.values, f.values) and np.array_equal(g.nodes, f.nodes)
    assert f.to_csv().splitlines()[0] == "x,re,im"
    h = SampledFunction.from_json(f.to_json())
    assert np.array_equal(h.values, f.values)


def test_spline_interpolation_between_nodes():
    f = SampledFunction(Grid1D(-6.0, 6.0, 241), gaussian(np.linspace(-6, 6, 241)))
    x = np.array([0.123, 1.77, -2.31])
    assert np.allclose(f(x), gaussian(x), atol=1e-6)
    assert f(7.0) == 0.0
