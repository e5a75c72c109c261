"""Unit tests for the Dunkl kernel, operators, transform and translations."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dunkl_lab.base import HyperplaneSingularityError, ParameterError
from dunkl_lab.corpus import constant, dunkl_cosine, gaussian, sqrt_cusp
from dunkl_lab.dunkl_kernel import (
    KernelCache,
    ModeKind,
    SpectralMode,
    dunkl_apply,
    dunkl_convolve,
    dunkl_kernel_E,
    dunkl_kernel_E_imag,
    dunkl_laplacian_apply,
    dunkl_transform,
    l1_norm,
    mode_function,
    normalized_bessel,
    rank_one_E,
    rank_one_E_imag,
    rank_one_log_E,
    rank_one_log_derivatives,
    rank_one_ode_residual,
    rank_one_series_E,
    rosler_measure_nodes,
    translate_radial,
)
from dunkl_lab.root_system import make_product_z2

MULTIPLICITIES = [0.0, 0.25, 0.5, 1.0, 2.5]
# Arguments on both sides of the series/Bessel switch
MODERATE_ARGUMENTS = np.array([-9.0, -5.5, -1.0, 0.3, 3.9, 4.1, 7.0, 12.0])
ODE_ARGUMENTS = np.array([-40.0, -6.0, -0.5, 0.01, 2.0, 4.5, 30.0, 300.0])
WAVE_FREQUENCY = 1.5


def closed_form_k1(z: float) -> float:
    """E_1(z) = sinh(z) / z + (z cosh(z) - sinh(z)) / z**2."""
    return math.sinh(z) / z + (z * math.cosh(z) - math.sinh(z)) / z**2


@pytest.mark.unit
@pytest.mark.parametrize("k", MULTIPLICITIES)
def test_kernel_is_one_at_origin(k: float) -> None:
    """Test E_k(0) = 1."""
    assert rank_one_E(0.0, k) == pytest.approx(1.0)


@pytest.mark.unit
def test_classical_kernel_is_exponential() -> None:
    """Test E_0(z) = exp(z)."""
    assert rank_one_E(MODERATE_ARGUMENTS, 0.0) == pytest.approx(np.exp(MODERATE_ARGUMENTS))


@pytest.mark.unit
@pytest.mark.parametrize("z", [-6.0, -2.5, 0.75, 2.5, 6.0])
def test_closed_form_at_k_one(z: float) -> None:
    """Test the Bessel route against the elementary closed form at k = 1."""
    assert rank_one_E(z, 1.0) == pytest.approx(closed_form_k1(z), rel=1e-10)


@pytest.mark.unit
@pytest.mark.parametrize("k", MULTIPLICITIES[1:])
def test_bessel_route_matches_series(k: float) -> None:
    """Test the Bessel route agrees with the power series oracle."""
    expected = rank_one_series_E(MODERATE_ARGUMENTS, k)
    assert rank_one_E(MODERATE_ARGUMENTS, k) == pytest.approx(expected, rel=1e-9)


@pytest.mark.unit
@pytest.mark.parametrize("k", MULTIPLICITIES[1:])
def test_kernel_equation_residual(k: float) -> None:
    """Test the defining difference-differential equation holds in log form."""
    assert np.max(rank_one_ode_residual(ODE_ARGUMENTS, k)) < 1e-8


@pytest.mark.unit
def test_kernel_equation_undefined_at_zero() -> None:
    """Test the residual rejects z = 0."""
    with pytest.raises(ParameterError):
        rank_one_ode_residual(np.array([0.0, 1.0]), 0.5)


@pytest.mark.unit
def test_log_form_is_finite_for_large_arguments() -> None:
    """Test log E stays finite where E itself overflows."""
    values = rank_one_log_E(np.array([-2000.0, 2000.0]), 0.5)
    assert np.all(np.isfinite(values))
    assert values[1] == pytest.approx(2000.0, rel=1e-2)


@pytest.mark.unit
@pytest.mark.parametrize("z", [0.5, 3.0, 8.0])
def test_log_derivative_matches_finite_difference(z: float) -> None:
    """Test (log E)' against a centered difference."""
    step = 1e-5
    slope = rank_one_log_derivatives(np.array([z]), 1.0, 1)[0, 0]
    difference = (rank_one_log_E(z + step, 1.0) - rank_one_log_E(z - step, 1.0)) / (2 * step)
    assert slope == pytest.approx(difference, rel=1e-6)


@pytest.mark.unit
@pytest.mark.parametrize("z", [-4.5, 4.1, 9.5])
@pytest.mark.parametrize("k", [0.5, 1.0])
def test_second_log_derivative_beyond_series_range(k: float, z: float) -> None:
    """Test (log E)'' against a centered difference of (log E)' on the Bessel route."""
    step = 1e-4
    second = rank_one_log_derivatives(np.array([z]), k, 2)[1, 0]
    first = rank_one_log_derivatives(np.array([z - step, z + step]), k, 1)[0]
    assert second == pytest.approx((first[1] - first[0]) / (2 * step), rel=1e-6, abs=1e-9)


@pytest.mark.unit
@pytest.mark.parametrize("mu", [0.5, 1.25, 3.0])
def test_normalized_bessel_across_switch(mu: float) -> None:
    """Test j_mu on both sides of |z| = 1 against its power series."""
    z = np.array([0.5, 0.999, 1.0, 1.5, 3.0])
    series = sum((-0.25 * z**2) ** n / (math.factorial(n) * math.prod(mu + 1 + i for i in range(n))) for n in range(40))
    assert normalized_bessel(mu, z) == pytest.approx(series, rel=1e-12, abs=1e-15)


@pytest.mark.unit
def test_normalized_bessel_half_orders() -> None:
    """Test j_{-1/2} = cos and j_{1/2}(z) = sin(z) / z."""
    z = np.linspace(0.1, 40.0, 200)
    assert normalized_bessel(-0.5, z) == pytest.approx(np.cos(z), abs=1e-15)
    assert normalized_bessel(0.5, z) == pytest.approx(np.sin(z) / z, abs=1e-14)


@pytest.mark.unit
@given(
    x=st.lists(st.floats(-6.0, 6.0), min_size=2, max_size=2),
    y=st.lists(st.floats(-6.0, 6.0), min_size=2, max_size=2),
)
def test_kernel_is_symmetric(x: list[float], y: list[float]) -> None:
    """Test E(x, y) = E(y, x) in rank two."""
    rs = make_product_z2(2, [0.5, 1.5])
    assert dunkl_kernel_E(rs, x, y) == pytest.approx(dunkl_kernel_E(rs, y, x), rel=1e-12)


@pytest.mark.unit
def test_kernel_with_zero_argument() -> None:
    """Test E(0, y) = 1."""
    rs = make_product_z2(2, 1.0)
    assert dunkl_kernel_E(rs, [0.0, 0.0], [3.0, -2.0]) == pytest.approx(1.0)


@pytest.mark.unit
def test_classical_kernel_is_inner_product_exponential() -> None:
    """Test E(x, y) = exp(<x, y>) when k vanishes."""
    rs = make_product_z2(2, 0.0)
    assert dunkl_kernel_E(rs, [1.0, 2.0], [0.5, 0.25]) == pytest.approx(math.exp(1.0))


@pytest.mark.unit
@pytest.mark.parametrize("k", MULTIPLICITIES)
def test_imaginary_kernel_bounded(k: float) -> None:
    """Test |E(i z)| <= 1 on the real line."""
    values = rank_one_E_imag(np.linspace(-30.0, 30.0, 121), k)
    assert np.max(np.abs(values)) <= 1.0 + 1e-12


@pytest.mark.unit
def test_imaginary_kernel_classical() -> None:
    """Test E_0(i z) = exp(i z)."""
    z = np.linspace(-5.0, 5.0, 11)
    assert rank_one_E_imag(z, 0.0) == pytest.approx(np.exp(1j * z))


@pytest.mark.unit
def test_imaginary_kernel_rank_two_factorizes() -> None:
    """Test the rank-two imaginary kernel is a product of rank-one factors."""
    rs = make_product_z2(2, [0.5, 1.0])
    expected = rank_one_E_imag(2.0, 0.5) * rank_one_E_imag(-0.5, 1.0)
    assert dunkl_kernel_E_imag(rs, [1.0, 0.5], [2.0, -1.0]) == pytest.approx(expected)


@pytest.mark.unit
def test_cache_does_not_change_results() -> None:
    """Test cached and uncached evaluation agree bit for bit."""
    rs = make_product_z2(1, 0.75)
    cached = KernelCache(rs)
    uncached = KernelCache(rs, enabled=False)
    first = rank_one_log_E(MODERATE_ARGUMENTS, 0.75, cached)
    second = rank_one_log_E(MODERATE_ARGUMENTS, 0.75, cached)
    plain = rank_one_log_E(MODERATE_ARGUMENTS, 0.75, uncached)
    assert np.array_equal(first, second)
    assert np.array_equal(first, plain)
    assert len(cached) > 0


@pytest.mark.unit
def test_negative_mode_frequency_rejected() -> None:
    """Test a spectral mode needs a non-negative frequency."""
    with pytest.raises(ParameterError):
        SpectralMode(ModeKind.COS, -1.0)


@pytest.mark.unit
@pytest.mark.parametrize("x", [-1.3, 0.0, 0.7, 4.0])
def test_dunkl_operator_on_cosine_wave(x: float) -> None:
    """Test D cos_k = -lambda sin_k for the even Dunkl wave."""
    rs = make_product_z2(1, 1.0)
    wave = mode_function(rs, [SpectralMode(ModeKind.COS, WAVE_FREQUENCY)], "cos")
    sine = SpectralMode(ModeKind.SIN, WAVE_FREQUENCY, -WAVE_FREQUENCY)
    expected = sine.evaluate(rs, np.array([[x]]))[0]
    assert dunkl_apply(rs, wave, 0, [x]) == pytest.approx(expected, rel=1e-8, abs=1e-12)


@pytest.mark.unit
@pytest.mark.parametrize("x", [0.0, 0.7, -2.2])
def test_dunkl_laplacian_eigenvalue(x: float) -> None:
    """Test Delta_k of a Dunkl wave is -lambda**2 times the wave."""
    rs = make_product_z2(1, 0.5)
    wave = mode_function(rs, [SpectralMode(ModeKind.COS, WAVE_FREQUENCY)], "cos")
    expected = -(WAVE_FREQUENCY**2) * wave([x])
    assert dunkl_laplacian_apply(rs, wave, [x]) == pytest.approx(expected, rel=1e-7, abs=1e-10)


@pytest.mark.unit
def test_hyperplane_needs_derivative_data() -> None:
    """Test D_j on x_j = 0 without derivatives raises."""
    rs = make_product_z2(1, 1.0)
    with pytest.raises(HyperplaneSingularityError):
        dunkl_apply(rs, sqrt_cusp(rs).handle, 0, [0.0])


@pytest.mark.unit
def test_dunkl_operator_index_checked() -> None:
    """Test an out-of-range coordinate index raises."""
    rs = make_product_z2(1, 1.0)
    with pytest.raises(ParameterError):
        dunkl_apply(rs, gaussian(rs).handle, 1, [0.5])


@pytest.mark.unit
@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_rosler_measure_is_probability(k: float) -> None:
    """Test the discretized translation measure has unit mass."""
    rs = make_product_z2(1, k)
    _, weights = rosler_measure_nodes(rs, [1.5], 32)
    assert np.sum(weights) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.unit
@pytest.mark.parametrize(("x", "y"), [(0.8, 1.3), (-0.6, 0.4), (2.0, -1.0)])
def test_gaussian_translation_closed_form(x: float, y: float) -> None:
    """Test tau_x g(-y) = exp(-(x**2 + y**2) / 2) E(x, y) for the Gaussian."""
    rs = make_product_z2(1, 1.0)
    expected = math.exp(-(x * x + y * y) / 2.0) * dunkl_kernel_E(rs, [x], [y])
    assert translate_radial(rs, gaussian(rs).handle, [x], [y], tol=1e-10) == pytest.approx(expected, rel=1e-7)


@pytest.mark.unit
def test_translation_by_origin_is_identity() -> None:
    """Test tau_0 f(-y) = f(y)."""
    rs = make_product_z2(2, 0.5)
    g = gaussian(rs).handle
    assert translate_radial(rs, g, [0.0, 0.0], [1.0, -0.5]) == pytest.approx(g([1.0, -0.5]))


@pytest.mark.unit
def test_translation_requires_radial_function() -> None:
    """Test non-radial functions are rejected."""
    rs = make_product_z2(1, 1.0)
    wave = mode_function(rs, [SpectralMode(ModeKind.SIN, 1.0)], "sin")
    with pytest.raises(ParameterError):
        translate_radial(rs, wave, [1.0], [0.5])


@pytest.mark.unit
def test_gaussian_l1_norm_is_c_k() -> None:
    """Test int exp(-x**2 / 2) dw = c_k."""
    rs = make_product_z2(1, 1.5)
    assert l1_norm(rs, gaussian(rs).handle, tol=1e-9) == pytest.approx(rs.c_k, abs=1e-7)


@pytest.mark.unit
@pytest.mark.parametrize("xi", [0.0, 1.0, 2.5])
def test_gaussian_is_its_own_transform(xi: float) -> None:
    """Test the Dunkl transform of exp(-x**2 / 2) is exp(-xi**2 / 2)."""
    rs = make_product_z2(1, 0.5)
    value = dunkl_transform(rs, gaussian(rs).handle, [xi], tol=1e-9)
    assert value.real == pytest.approx(math.exp(-xi * xi / 2.0), abs=1e-7)
    assert value.imag == pytest.approx(0.0, abs=1e-7)


@pytest.mark.unit
def test_transform_needs_integrable_function() -> None:
    """Test functions without tail data cannot be transformed."""
    rs = make_product_z2(1, 0.5)
    with pytest.raises(ParameterError):
        dunkl_transform(rs, sqrt_cusp(rs).handle, [1.0])


@pytest.mark.unit
def test_convolution_with_constant_is_gaussian_mass() -> None:
    """Test (1 * g)(0) equals the weighted integral of the Gaussian."""
    rs = make_product_z2(1, 0.5)
    value = dunkl_convolve(rs, constant(rs).handle, gaussian(rs).handle, [0.0], tol=1e-8)
    assert value == pytest.approx(rs.c_k, rel=1e-6)


@pytest.mark.unit
def test_convolution_needs_radial_kernel() -> None:
    """Test a non-radial second factor raises ParameterError."""
    rs = make_product_z2(1, 0.5)
    with pytest.raises(ParameterError, match="radial"):
        dunkl_convolve(rs, gaussian(rs).handle, dunkl_cosine(rs).handle, [0.5])


@pytest.mark.unit
def test_convolution_is_rank_one() -> None:
    """Test quadrature convolution refuses rank two."""
    rs = make_product_z2(2, 0.5)
    with pytest.raises(ParameterError, match="rank one"):
        dunkl_convolve(rs, gaussian(rs).handle, gaussian(rs).handle, [0.0, 0.0])
