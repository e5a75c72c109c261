"""Unit tests for matrix generators and their functional calculus."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import linalg

from dunkl_lab.abstract_semigroup import (
    GENERATORS,
    ContourPath,
    DerivativeMethod,
    MatrixGenerator,
    approximate_generator,
    bessel_matrix,
    cauchy_filter_check,
    contour_calculus,
    exponential,
    generator_test_set,
    k_functional_upper,
    lambda_norm_matrix,
    lambda_norm_poisson,
    mild_generator_ratio,
    multiplier_norm,
    omega_convergence,
    poisson_derivative,
    resolvent,
    resolvent_bound,
    resolvent_derivative_residual,
    semigroup_at,
    semigroup_bound_constant,
    smallest_integer_above,
    spectral_bessel_matrix,
    spectral_subordinate,
    subordinate_at,
)
from dunkl_lab.base import BranchError, ParameterError, PathError, SpectrumError

DENSE_TIMES = np.geomspace(1e-3, 1e2, 2001)


@pytest.fixture(scope="module")
def diagonal() -> MatrixGenerator:
    """diag(-1, -4, -9)."""
    (generator,) = generator_test_set(["diag"])
    return generator


@pytest.fixture(scope="module")
def nonnormal() -> MatrixGenerator:
    """The sheared rotation generator with eigenvalues -1 +- 0.5i."""
    (generator,) = generator_test_set(["nonnormal"])
    return generator


def peak(order: float) -> float:
    """max_t t**order e**-t."""
    return order**order * math.exp(-order)


@pytest.mark.unit
def test_test_set_contents() -> None:
    """Test the documented generators are all accepted."""
    generators = generator_test_set()
    assert [generator.name for generator in generators] == list(GENERATORS)
    assert all(generator.zero_in_resolvent for generator in generators)


@pytest.mark.unit
def test_unknown_generator_rejected() -> None:
    """Test an unknown generator name raises ParameterError."""
    with pytest.raises(ParameterError, match="Unknown generator"):
        generator_test_set(["diag", "shift"])


@pytest.mark.unit
def test_non_square_matrix_rejected() -> None:
    """Test a rectangular matrix is not a generator."""
    with pytest.raises(ParameterError, match="square"):
        MatrixGenerator.from_matrix([[1.0, 2.0, 3.0]])


@pytest.mark.unit
def test_right_half_plane_spectrum_rejected() -> None:
    """Test a growing semigroup is not sectorial on the left."""
    with pytest.raises(ParameterError, match="left sector"):
        MatrixGenerator.from_matrix([[1.0]])


@pytest.mark.unit
def test_sector_opening_checked(nonnormal: MatrixGenerator) -> None:
    """Test an explicit opening wider than the spectral margin is rejected."""
    with pytest.raises(ParameterError, match="Sector opening"):
        MatrixGenerator.from_matrix(nonnormal.matrix, "wide", delta=1.5)


@pytest.mark.unit
def test_resolvent_constant_at_least_one(diagonal: MatrixGenerator) -> None:
    """Test |lambda| ||R(lambda)|| tends to one along the positive axis."""
    assert 1.0 <= diagonal.resolvent_constant < math.inf


@pytest.mark.unit
def test_semigroup_of_diagonal(diagonal: MatrixGenerator) -> None:
    """Test e^{tA} on a diagonal generator."""
    assert np.diag(semigroup_at(diagonal, 0.5)) == pytest.approx(np.exp([-0.5, -2.0, -4.5]), rel=1e-12)


@pytest.mark.unit
def test_semigroup_negative_time(diagonal: MatrixGenerator) -> None:
    """Test negative times raise."""
    with pytest.raises(ParameterError):
        semigroup_at(diagonal, -1.0)


@pytest.mark.unit
def test_resolvent_values(diagonal: MatrixGenerator) -> None:
    """Test R(1) = diag(1 / (1 + lambda_j))."""
    assert np.diag(resolvent(diagonal, 1.0)).real == pytest.approx([0.5, 0.2, 0.1], rel=1e-12)


@pytest.mark.unit
def test_resolvent_at_eigenvalue(diagonal: MatrixGenerator) -> None:
    """Test the resolvent refuses points of the spectrum."""
    with pytest.raises(SpectrumError):
        resolvent(diagonal, -4.0)


@pytest.mark.unit
def test_resolvent_identity(nonnormal: MatrixGenerator) -> None:
    """Test d/dlambda R = -R**2 by central differences."""
    assert resolvent_derivative_residual(nonnormal, 1.0 + 1.0j) < 1e-8


@pytest.mark.unit
def test_spectral_subordinate_of_diagonal(diagonal: MatrixGenerator) -> None:
    """Test e^{-t sqrt(-A)} = diag(e**(-t sqrt(lambda_j)))."""
    value = spectral_subordinate(diagonal, 1.0)
    assert np.abs(value - np.diag(np.exp([-1.0, -2.0, -3.0]))).max() < 1e-12


@pytest.mark.unit
@pytest.mark.parametrize("name", ["diag", "nonnormal"])
def test_subordination_matches_square_root(name: str) -> None:
    """Test the subordination integral against the matrix square root."""
    (generator,) = generator_test_set([name])
    difference = subordinate_at(generator, 1.0) - spectral_subordinate(generator, 1.0)
    assert np.abs(difference).max() < 1e-8


@pytest.mark.unit
def test_branch_cut_detected() -> None:
    """Test a zero eigenvalue blocks sqrt(-A)."""
    singular = MatrixGenerator.from_matrix([[0.0]], "zero")
    assert not singular.zero_in_resolvent
    with pytest.raises(BranchError):
        spectral_subordinate(singular, 1.0)
    with pytest.raises(BranchError):
        subordinate_at(singular, 1.0)


@pytest.mark.unit
@pytest.mark.parametrize("name", ["diag", "jordan", "nonnormal"])
def test_contour_calculus_of_exponential(name: str) -> None:
    """Test the resolvent integral of e**z reproduces e**A."""
    (generator,) = generator_test_set([name])
    value = contour_calculus(exponential(), generator)
    assert np.abs(value - linalg.expm(generator.matrix)).max() < 1e-6


@pytest.mark.unit
def test_contour_with_arc(diagonal: MatrixGenerator) -> None:
    """Test a path with a small arc around the origin gives the same e**A."""
    path = ContourPath(theta=2.0, epsilon=0.5)
    value = contour_calculus(exponential(), diagonal, path)
    assert np.abs(value - linalg.expm(diagonal.matrix)).max() < 1e-6


@pytest.mark.unit
def test_contour_outside_sector(nonnormal: MatrixGenerator) -> None:
    """Test rays beyond pi/2 + delta are refused."""
    with pytest.raises(PathError, match="leaves the sector"):
        contour_calculus(exponential(), nonnormal, ContourPath(theta=2.8))


@pytest.mark.unit
def test_contour_arc_reaching_spectrum(diagonal: MatrixGenerator) -> None:
    """Test an arc radius beyond the nearest eigenvalue is refused."""
    with pytest.raises(PathError, match="Arc radius"):
        contour_calculus(exponential(), diagonal, ContourPath(theta=2.0, epsilon=2.0))


@pytest.mark.unit
@pytest.mark.parametrize(("theta", "epsilon"), [(1.0, 0.0), (math.pi, 0.0), (2.0, -0.1)])
def test_contour_path_validation(theta: float, epsilon: float) -> None:
    """Test the ray angle and arc radius are validated."""
    with pytest.raises(ParameterError):
        ContourPath(theta=theta, epsilon=epsilon)


@pytest.mark.unit
def test_cauchy_filter_left_of_path() -> None:
    """Test the Cauchy integral reproduces f at a point left of the rays."""
    result = cauchy_filter_check(exponential(), ContourPath(), -2.0)
    assert result.side == "left"
    assert result.value == pytest.approx(math.exp(-2.0), abs=1e-7)


@pytest.mark.unit
def test_cauchy_filter_right_of_path() -> None:
    """Test the Cauchy integral vanishes at a point right of the rays."""
    result = cauchy_filter_check(exponential(), ContourPath(), 1.0 + 0.5j)
    assert result.side == "right"
    assert abs(result.value) < 1e-7


@pytest.mark.unit
def test_cauchy_filter_on_path() -> None:
    """Test points on the contour are refused."""
    path = ContourPath()
    with pytest.raises(PathError, match="too close"):
        cauchy_filter_check(exponential(), path, 2.0 * complex(np.exp(1j * path.theta)))


@pytest.mark.unit
@pytest.mark.parametrize("n", [1, 2])
def test_poisson_derivative_routes_agree(diagonal: MatrixGenerator, n: int) -> None:
    """Test the transfer formulas against the square-root route."""
    spectral = poisson_derivative(diagonal, n, 0.5)
    transfer = poisson_derivative(diagonal, n, 0.5, DerivativeMethod.TRANSFER)
    assert np.abs(transfer - spectral).max() < 1e-6


@pytest.mark.unit
def test_poisson_derivative_of_diagonal(diagonal: MatrixGenerator) -> None:
    """Test d_t P_t = -sqrt(-A) P_t entrywise."""
    value = poisson_derivative(diagonal, 1, 0.5)
    roots = np.array([1.0, 2.0, 3.0])
    assert np.diag(value).real == pytest.approx(-roots * np.exp(-0.5 * roots), rel=1e-10)


@pytest.mark.unit
def test_poisson_derivative_order_checked(diagonal: MatrixGenerator) -> None:
    """Test negative orders raise."""
    with pytest.raises(ParameterError):
        poisson_derivative(diagonal, -1, 1.0)


@pytest.mark.unit
def test_multiplier_norm_of_diagonal(diagonal: MatrixGenerator) -> None:
    """Test ||m(tA)|| = max_j |m(-t lambda_j)| for a normal generator."""
    times = [0.5, 1.0, 2.0]
    result = multiplier_norm(diagonal, 1, times)
    for t, norm in zip(times, result.norms, strict=True):
        scaled = t * np.array([1.0, 4.0, 9.0])
        expected = np.max(np.sqrt(scaled) * np.exp(-scaled + np.sqrt(scaled)))
        assert norm == pytest.approx(expected, abs=1e-6)
    assert result.sup == pytest.approx(float(np.max(result.norms)))


@pytest.mark.unit
def test_multiplier_norm_at_long_times(diagonal: MatrixGenerator) -> None:
    """Test the multiplier norm stays finite once the symbol underflows along the truncated rays."""
    times = [20.0, 64.938]
    result = multiplier_norm(diagonal, 1, times)
    assert np.all(np.isfinite(result.norms))
    for t, norm in zip(times, result.norms, strict=True):
        scaled = t * np.array([1.0, 4.0, 9.0])
        expected = np.max(np.sqrt(scaled) * np.exp(-scaled + np.sqrt(scaled)))
        assert norm == pytest.approx(expected, abs=1e-9)


@pytest.mark.unit
def test_smallest_integer_above() -> None:
    """Test floor(beta) + 1, including integers."""
    assert [smallest_integer_above(beta) for beta in (0.5, 1.0, 2.7)] == [1, 2, 3]


@pytest.mark.unit
def test_lambda_norm_of_eigenvector(diagonal: MatrixGenerator) -> None:
    """Test the heat norm of an eigenvector is 1 + max t**(m - beta) e**-t."""
    vector = np.array([1.0, 0.0, 0.0])
    assert lambda_norm_matrix(diagonal, vector, 0.5, DENSE_TIMES) == pytest.approx(1.0 + peak(0.5), rel=1e-4)


@pytest.mark.unit
def test_poisson_lambda_norm_of_eigenvector(diagonal: MatrixGenerator) -> None:
    """Test the Poisson norm scales as sqrt(lambda)**beta."""
    vector = np.array([0.0, 1.0, 0.0])
    value = lambda_norm_poisson(diagonal, vector, 0.5, DENSE_TIMES)
    assert value == pytest.approx(1.0 + math.sqrt(2.0) * peak(0.5), rel=1e-4)


@pytest.mark.unit
def test_lambda_norm_order_checked(diagonal: MatrixGenerator) -> None:
    """Test m must exceed beta."""
    with pytest.raises(ParameterError, match="m must exceed beta"):
        lambda_norm_matrix(diagonal, np.ones(3), 1.0, DENSE_TIMES, m=1)


@pytest.mark.unit
def test_semigroup_bound_constant(diagonal: MatrixGenerator) -> None:
    """Test sup_t t ||A e^{tA}|| = 1/e for a negative definite diagonal."""
    assert semigroup_bound_constant(diagonal, DENSE_TIMES) == pytest.approx(math.exp(-1.0), rel=1e-3)


@pytest.mark.unit
def test_bessel_potential_routes_agree(diagonal: MatrixGenerator) -> None:
    """Test the Laguerre integral against the fractional power (I - A)**-gamma."""
    integral = bessel_matrix(diagonal, 0.5)
    assert np.abs(integral - spectral_bessel_matrix(diagonal, 0.5)).max() < 1e-8
    assert np.diag(integral) == pytest.approx(1.0 / np.sqrt([2.0, 5.0, 10.0]), rel=1e-8)


@pytest.mark.unit
def test_k_functional_split_reconstructs(diagonal: MatrixGenerator) -> None:
    """Test x0 + x1 = x and the weighted bound uses t**-theta."""
    times = np.geomspace(1e-4, 1e2, 200)
    split = k_functional_upper(diagonal, np.ones(3), 0.01, 0.5, 1.5, 0.5, times)
    assert split.tau == pytest.approx(0.01)
    assert split.residual < 1e-9
    assert split.weighted == pytest.approx(split.bound / math.sqrt(0.01))


@pytest.mark.unit
def test_k_functional_trivial_split(diagonal: MatrixGenerator) -> None:
    """Test t >= 1 keeps the whole vector in the rough part."""
    split = k_functional_upper(diagonal, np.ones(3), 2.0, 0.5, 1.5, 0.5, DENSE_TIMES)
    assert split.x0 == pytest.approx(np.ones(3))
    assert not split.x1.any()
    assert split.residual == 0.0


@pytest.mark.unit
@pytest.mark.parametrize(("beta0", "beta1", "theta"), [(1.5, 0.5, 0.5), (0.5, 1.5, 1.0)])
def test_k_functional_parameters_checked(
    diagonal: MatrixGenerator, beta0: float, beta1: float, theta: float,
) -> None:
    """Test the exponent order and interpolation parameter are validated."""
    with pytest.raises(ParameterError):
        k_functional_upper(diagonal, np.ones(3), 0.1, beta0, beta1, theta, DENSE_TIMES)


@pytest.mark.unit
def test_approximate_generator_is_invertible() -> None:
    """Test A - omega I moves a zero eigenvalue into the left half-plane."""
    singular = MatrixGenerator.from_matrix([[0.0]], "zero")
    shifted = approximate_generator(singular, 0.1)
    assert shifted.zero_in_resolvent
    assert shifted.eigenvalues.real == pytest.approx([-0.1])


@pytest.mark.unit
def test_omega_convergence(diagonal: MatrixGenerator) -> None:
    """Test e^{A - omega I} approaches e^A as omega decreases."""
    result = omega_convergence(lambda generator: semigroup_at(generator, 1.0), diagonal)
    differences = result.differences
    assert differences[1] < differences[0]
    assert np.abs(result.values[-1] - linalg.expm(diagonal.matrix)).max() < 1e-3


@pytest.mark.unit
def test_resolvent_bound_of_normal_generator() -> None:
    """Test the fitted constant of diag(-1, -4, -9) stays below 1 / cos(delta)."""
    delta = 0.3
    bound = resolvent_bound(np.diag([-1.0, -4.0, -9.0]), delta, samples=400)
    assert 1.0 < bound <= 1.0 / math.cos(delta) + 1e-12


@pytest.mark.unit
def test_mild_generator_ratio_on_eigenvector(diagonal: MatrixGenerator) -> None:
    """Test ||x||_{beta+1} / (||x|| + ||Ax||_beta) for an eigenvector of eigenvalue -1."""
    p = peak(0.5)
    ratio = mild_generator_ratio(diagonal, np.array([1.0, 0.0, 0.0]), 0.5, DENSE_TIMES)
    assert ratio == pytest.approx((1.0 + p) / (2.0 + p), rel=1e-4)
    assert mild_generator_ratio(diagonal, np.zeros(3), 0.5, DENSE_TIMES) == 1.0
