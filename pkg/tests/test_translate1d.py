import io
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy import integrate as sint

from dunklkit.dunkl1d import SampledFunction, dunkl_kernel, dunkl_transform
from dunklkit.errors import DeltaMeasure, DomainError, SingularPointError
from dunklkit.translate1d import (
    KernelFactors,
    KernelScan,
    gamma_density,
    kernel_constant,
    kernel_sample,
    kernel_scan,
    lp_norm_bound,
    rho_factor,
    sharp_constant,
    sigma_factor,
    total_variation,
    total_variation_direct,
    total_variation_theta,
    translate,
    translation_mass,
)

nonzero = st.floats(0.05, 4.0).flatmap(lambda v: st.sampled_from([v, -v]))


def gaussian(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2 / 2)


# -- factors -------------------------------------------------------------------


@pytest.mark.parametrize("x, y, z, expected", [(1, 1, 2, 4.0), (1, 1, math.sqrt(2), 1 + math.sqrt(2))])
def test_sigma_values(x, y, z, expected):
    assert sigma_factor(x, y, z) == pytest.approx(expected, rel=1e-15)


def test_sigma_forms_agree():
    rng = np.random.default_rng(1)
    x, y, z = (rng.uniform(0.1, 3, 1000) * rng.choice([-1, 1], 1000) for _ in range(3))
    summed = (1 - (x**2 + y**2 - z**2) / (2 * x * y) + (z**2 + y**2 - x**2) / (2 * z * y)
              + (x**2 + z**2 - y**2) / (2 * x * z))
    assert np.allclose(sigma_factor(x, y, z), summed, rtol=1e-10, atol=1e-10)


def test_sigma_zero_argument():
    with pytest.raises(DomainError):
        sigma_factor(1.0, 0.0, 1.0)


def test_rho_values():
    assert rho_factor(1, 1, 1, math.sqrt(2)) == pytest.approx(1 / (2 * math.sqrt(2)), rel=1e-15)
    a, b, c = 0.7, 1.9, 1.5
    assert rho_factor(1, a, b, c) == pytest.approx(1 / (2 * a * b * c), rel=1e-15)


def test_rho_forms_agree():
    rng = np.random.default_rng(2)
    a, b = rng.uniform(0.2, 3, 300), rng.uniform(0.2, 3, 300)
    c = rng.uniform(np.abs(a - b), a + b)
    k = 2.5
    expanded = ((2 * b**2 * c**2 + 2 * a**2 * c**2 + 2 * a**2 * b**2 - a**4 - b**4 - c**4) ** (k - 1)
                / (2 * a * b * c) ** (2 * k - 1))
    assert np.allclose(rho_factor(k, a, b, c), expanded, rtol=1e-9)


def test_rho_outside_and_endpoints():
    assert rho_factor(1.5, 1.0, 2.0, 3.5) == 0.0
    assert rho_factor(1.5, 1.0, 2.0, 0.5) == 0.0
    with pytest.raises(SingularPointError):
        rho_factor(0.5, 1.0, 2.0, 3.0)


def test_kernel_constant():
    assert kernel_constant(1.0) == pytest.approx(0.5, rel=1e-15)
    assert KernelFactors(0.5).d == pytest.approx(1 / math.pi, rel=1e-15)
    with pytest.raises(DomainError):
        KernelFactors(0.0)


# -- density -------------------------------------------------------------------


def test_normalization_independent_quadrature():
    k, x, y = 1.0, 0.8, 1.3
    lo, hi = abs(x - y), x + y
    total = 0.0
    for sgn in (1, -1):
        val, _ = sint.quad(lambda c: gamma_density(k, x, y, sgn * c) * c ** (2 * k), lo, hi,
                           epsabs=0, epsrel=1e-12, limit=200)
        total += val
    assert total == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0, 5.0])
def test_normalization_sweep(k):
    pts = [0.5, 1.0, 2.0, -0.5, -1.0, -2.0]
    for x in pts:
        for y in pts:
            assert translation_mass(k, x, y) == pytest.approx(1.0, rel=1e-8)
            assert total_variation_direct(k, x, y, signed=True) == pytest.approx(1.0, rel=1e-8)


@st.composite
def triples(draw):
    x, y = draw(nonzero), draw(nonzero)
    c = draw(st.floats(abs(abs(x) - abs(y)), abs(x) + abs(y)))
    z = c * draw(st.sampled_from([1, -1]))
    assume(abs(z) > 1e-3 and abs(z) - abs(abs(x) - abs(y)) > 1e-6 and abs(x) + abs(y) - abs(z) > 1e-6)
    return x, y, z


@given(st.sampled_from([0.25, 0.5, 1.0, 2.5]), triples())
def test_symmetries(k, xyz):
    x, y, z = xyz
    g = gamma_density(k, x, y, z)
    scale = max(1.0, abs(g))
    for other in ((y, x, z), (-x, -y, -z), (-z, y, -x), (x, -z, -y)):
        assert abs(gamma_density(k, *other) - g) <= 1e-12 * scale


@given(st.sampled_from([0.3, 1.0, 3.0]), triples())
def test_positive_for_opposite_signs(k, xyz):
    x, y, z = xyz
    assume(x * y < 0)
    assert gamma_density(k, x, y, z) >= 0


@given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0, 1))
def test_sign_pattern_same_signs(x, y, t):
    # x, y > 0: the density is <= 0 on z < 0; with y < 0 it is >= 0 there
    lo, hi = abs(x - y), x + y
    c = lo + t * (hi - lo)
    assume(c - lo > 1e-6 and hi - c > 1e-6 and c > 1e-3)
    assert gamma_density(1.3, x, y, -c) <= 0
    assert gamma_density(1.3, x, -y, -c) >= 0


def test_support_vanishes_outside_shell():
    z = np.array([-3.5, -0.6, 0.2, 0.45, 3.01, 5.0])
    assert np.all(gamma_density(1.5, 1.0, 2.0, z) == 0.0)
    sample = kernel_sample(1.5, 1.0, 2.0, 4.0)
    assert sample.weighted_density == 0.0


def test_density_point_mass_and_singularity():
    with pytest.raises(DeltaMeasure) as info:
        gamma_density(1.0, 0.0, 2.5, 1.0)
    assert info.value.atom == 2.5
    with pytest.raises(SingularPointError):
        gamma_density(1.0, 1.0, 1.0, 0.0)


def test_kernel_scan_csv():
    scan = kernel_scan(1.0, 1.0, 1.0)
    assert len(scan.z) == 2000 and not np.isnan(scan.gamma).any()
    text = scan.to_csv()
    assert text.splitlines()[0] == "z,gamma,weighted_gamma"
    back = KernelScan.read_csv(io.StringIO(text))
    assert np.array_equal(back["gamma"], scan.gamma)
    mass = np.trapezoid(scan.weighted_gamma, scan.z)
    assert mass == pytest.approx(1.0, abs=1e-4)


def test_kernel_scan_marks_singular_nodes():
    scan = kernel_scan(1.0, 1.0, 1.0, (-2.0, 2.0, 5))
    assert np.isnan(scan.gamma[2])


# -- translation -----------------------------------------------------------------


def test_translate_by_zero_is_identity():
    f = SampledFunction.from_callable(gaussian, (-5.0, 5.0, 101))
    g = translate(1.0, 0.0, f)
    assert np.array_equal(g.values, f.values)


@pytest.mark.parametrize("x", [0.7, -1.3, 2.0])
def test_translation_intertwines_transform(x):
    k = 1.0
    f = SampledFunction.from_callable(gaussian, (-14.0, 14.0, 281))
    tf = translate(k, x, f, (-16.0, 16.0, 321))
    xi = np.linspace(-3.0, 3.0, 10)
    lhs = dunkl_transform(k, tf, (xi[0], xi[-1], len(xi))).values
    rhs = dunkl_kernel(k, xi, x) * dunkl_transform(k, f, (xi[0], xi[-1], len(xi))).values
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-6


def test_small_k_approaches_shift():
    f = SampledFunction.from_callable(gaussian, (-8.0, 8.0, 161))
    y = np.linspace(-3, 3, 13)
    g = translate(1e-3, 0.8, f, (y[0], y[-1], len(y)))
    assert np.max(np.abs(g.values - gaussian(y + 0.8))) < 5e-3
    exact = translate(0.0, 0.8, f, (y[0], y[-1], len(y)))
    assert np.allclose(exact.values, gaussian(y + 0.8), atol=1e-15)


def test_translate_is_symmetric_in_arguments():
    # tau_x f(y) = tau_y f(x)
    f = SampledFunction.from_callable(lambda t: np.exp(-(np.asarray(t) - 0.3) ** 2), (-8.0, 8.0, 161))
    a = translate(1.5, 0.9, f)(np.array([-1.7]))[0]
    b = translate(1.5, -1.7, f)(np.array([0.9]))[0]
    assert a == pytest.approx(b, rel=1e-9)


def test_translate_needs_coverage():
    f = SampledFunction(SampledFunction.from_callable(gaussian, (-2.0, 2.0, 41)).grid,
                        gaussian(np.linspace(-2, 2, 41)))
    with pytest.raises(DomainError):
        translate(1.0, 1.0, f)


# -- total variation -----------------------------------------------------------


@pytest.mark.parametrize("k", [0.25, 0.5, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("x, y", [(1.0, -2.0), (-0.3, 0.7), (2.0, -2.0)])
def test_tv_opposite_signs_is_one(k, x, y):
    for method in ("direct", "theta"):
        assert total_variation(k, x, y, method) == pytest.approx(1.0, rel=1e-9)


def test_tv_equality_case():
    assert total_variation_direct(1.0, 1.0, 1.0) == pytest.approx(4 / 3, rel=1e-9)
    assert total_variation_theta(1.0, 1.0) == pytest.approx(4 / 3, rel=1e-12)


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_tv_routes_agree(k):
    rng = np.random.default_rng(int(k * 10))
    for _ in range(50):
        x, y = rng.uniform(0.05, 4, 2) * rng.choice([-1, 1], 2)
        assert total_variation(k, x, y, "theta") == pytest.approx(
            total_variation(k, x, y, "direct"), rel=1e-7)


def test_f_decreasing_and_limit():
    s = [1, 1.5, 2, 4, 10]
    vals = [total_variation_theta(2.0, v) for v in s]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert total_variation_theta(2.0, 100.0) == pytest.approx(1.0, abs=2e-2)


def test_f_domain():
    with pytest.raises(DomainError):
        total_variation_theta(1.0, 0.5)


@given(st.sampled_from([0.5, 1.0, 2.0, 5.0]), nonzero, nonzero)
def test_tv_below_sharp_constant(k, x, y):
    assert total_variation(k, x, y) <= sharp_constant(k) + 1e-9


@pytest.mark.parametrize("k, expected", [(0.5, 4 / math.pi), (1.0, 4 / 3), (0.0, 1.0)])
def test_sharp_constant_values(k, expected):
    assert sharp_constant(k) == pytest.approx(expected, rel=1e-13)


def test_sharp_constant_limit():
    a = sharp_constant(100.0)
    assert math.sqrt(2) - 1e-3 < a < math.sqrt(2)


@pytest.mark.parametrize(
    "k, p, expected", [(1.0, 2.0, 1.0), (1.0, 1.0, 4 / 3), (1.0, 4.0, math.sqrt(4 / 3)),
                       (1.0, math.inf, 4 / 3), (0.5, 1.0, 4 / math.pi)]
)
def test_lp_bound(k, p, expected):
    assert lp_norm_bound(k, p) == pytest.approx(expected, rel=1e-13)


def test_lp_bound_domain():
    with pytest.raises(DomainError):
        lp_norm_bound(1.0, 0.5)
