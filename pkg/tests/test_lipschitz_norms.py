"""Unit tests for the Lipschitz-norm estimators and the equivalence report."""

from __future__ import annotations

import math

import numpy as np
import pytest

from dunkl_lab.base import ParameterError
from dunkl_lab.corpus import dunkl_cosine, gaussian, linear_window, sqrt_cusp, weierstrass, xlogx
from dunkl_lab.heat_poisson import KernelEvaluator, TimeGrid
from dunkl_lab.lipschitz_norms import (
    REPORT_COLUMNS,
    EquivalenceSettings,
    NormKind,
    SpaceGrid,
    bessel_potential_apply,
    bessel_potential_function,
    classical_lip_norm,
    convergence_exponent,
    decay_exponent_fit,
    derivative_norm_check,
    dunkl_derivative_function,
    equivalence_report,
    higher_order_classical_norm,
    inclusion_ratio,
    semigroup_norm_heat,
    semigroup_norm_poisson,
    smallest_order_above,
    zygmund_seminorm,
)
from dunkl_lab.root_system import make_product_z2

CLASSICAL = make_product_z2(1, 0.0)
FINE_TIMES = TimeGrid(1e-3, 1e2, 801)
SMALL_SPACE = SpaceGrid(half_width=2.0, points=101, cluster_points=64)
ORIGIN_ONLY = SpaceGrid(half_width=1.0, points=3, cluster_points=0)


def peak(order: float) -> float:
    """max_t t**order e**-t, attained at t = order."""
    return order**order * math.exp(-order)


@pytest.mark.unit
def test_space_grid_contains_origin_and_is_symmetric() -> None:
    """Test the nodes are sorted, symmetric and include 0."""
    nodes = SpaceGrid(half_width=1.0, points=10, cluster_points=8).nodes()
    assert 0.0 in nodes
    assert np.all(np.diff(nodes) > 0)
    assert nodes == pytest.approx(-nodes[::-1])


@pytest.mark.unit
def test_refined_space_grid_contains_coarse_grid() -> None:
    """Test every coarse node survives refinement."""
    grid = SpaceGrid(half_width=2.0, points=9, cluster_points=4)
    assert set(grid.nodes()) <= set(grid.refined().nodes())


@pytest.mark.unit
def test_rank_two_samples_cover_axis_and_diagonal() -> None:
    """Test rank-two samples lie along e_1 and the diagonal."""
    samples = SpaceGrid(half_width=1.0, points=5, cluster_points=0).samples(2)
    on_axis = samples[:, 1] == 0.0
    on_diagonal = np.isclose(samples[:, 0], samples[:, 1])
    assert np.all(on_axis | on_diagonal)


@pytest.mark.unit
def test_space_grid_rejects_odd_cluster() -> None:
    """Test cluster_points must be even."""
    with pytest.raises(ParameterError):
        SpaceGrid(cluster_points=3)


@pytest.mark.unit
@pytest.mark.parametrize(("beta", "order"), [(0.3, 1), (1.0, 2), (1.7, 2), (2.0, 3)])
def test_smallest_order_above(beta: float, order: int) -> None:
    """Test the smallest integer strictly above beta."""
    assert smallest_order_above(beta) == order


@pytest.mark.unit
def test_sqrt_cusp_half_holder_constant() -> None:
    """Test the classical quotient of min(1, |x|**(1/2)) at beta = 1/2 is one."""
    estimate = classical_lip_norm(sqrt_cusp(CLASSICAL).handle, 0.5, SMALL_SPACE)
    assert estimate.kind is NormKind.CLASSICAL
    assert estimate.seminorm == pytest.approx(1.0, rel=1e-9)
    assert estimate.value == pytest.approx(2.0, rel=1e-9)


@pytest.mark.unit
def test_sqrt_cusp_blows_up_above_half() -> None:
    """Test the quotient at beta = 0.7 grows with the origin cluster."""
    estimate = classical_lip_norm(sqrt_cusp(CLASSICAL).handle, 0.7, SMALL_SPACE)
    assert estimate.seminorm > 10.0


@pytest.mark.unit
def test_lipschitz_constant_of_window() -> None:
    """Test the beta = 1 quotient of width * tanh(x / width) approaches one."""
    estimate = classical_lip_norm(linear_window(CLASSICAL).handle, 1.0, SMALL_SPACE)
    assert 0.99 < estimate.seminorm <= 1.0 + 1e-12


@pytest.mark.unit
@pytest.mark.parametrize("beta", [0.0, 1.5])
def test_classical_quotient_range(beta: float) -> None:
    """Test beta outside (0, 1] is rejected."""
    with pytest.raises(ParameterError):
        classical_lip_norm(sqrt_cusp(CLASSICAL).handle, beta, SMALL_SPACE)


@pytest.mark.unit
def test_xlogx_is_zygmund_but_not_lipschitz() -> None:
    """Test the second difference stays small where the first difference grows."""
    f = xlogx(CLASSICAL).handle
    lipschitz = classical_lip_norm(f, 1.0, SMALL_SPACE)
    zygmund = zygmund_seminorm(f, 1.0, SMALL_SPACE)
    assert lipschitz.seminorm > 3.0 * zygmund.seminorm


@pytest.mark.unit
def test_zygmund_range() -> None:
    """Test beta = 2 is outside the Zygmund quotient range."""
    with pytest.raises(ParameterError):
        zygmund_seminorm(gaussian(CLASSICAL).handle, 2.0, SMALL_SPACE)


@pytest.mark.unit
def test_derivative_split_of_gaussian() -> None:
    """Test the derivative split is finite and exceeds the sup norm for beta = 1.5."""
    estimate = higher_order_classical_norm(gaussian(CLASSICAL).handle, 1.5, SMALL_SPACE)
    assert estimate.kind is NormKind.DERIVATIVE_SPLIT
    assert estimate.m == 1
    assert estimate.sup_norm == pytest.approx(1.0)
    assert 1.0 < estimate.value < 10.0


@pytest.mark.unit
def test_derivative_split_needs_beta_above_one() -> None:
    """Test beta <= 1 is rejected by the derivative split."""
    with pytest.raises(ParameterError):
        higher_order_classical_norm(gaussian(CLASSICAL).handle, 1.0, SMALL_SPACE)


@pytest.mark.unit
@pytest.mark.parametrize(("beta", "m"), [(0.5, 1), (0.5, 2), (1.5, 2)])
def test_poisson_norm_of_cosine(beta: float, m: int) -> None:
    """Test max_t t**(m - beta) |d_t**m P_t cos| = (m - beta)**(m - beta) e**(beta - m)."""
    ke = KernelEvaluator(CLASSICAL)
    estimate = semigroup_norm_poisson(ke, dunkl_cosine(CLASSICAL).handle, beta, FINE_TIMES, ORIGIN_ONLY, m=m)
    assert estimate.seminorm == pytest.approx(peak(m - beta), rel=1e-3)
    assert estimate.sup_norm == pytest.approx(1.0)
    assert not estimate.attained_at_t_min


@pytest.mark.unit
def test_heat_norm_of_cosine() -> None:
    """Test the heat form uses t**(m - beta/2) and the eigenvalue -lambda**2."""
    ke = KernelEvaluator(CLASSICAL)
    frequency = 2.0
    f = dunkl_cosine(CLASSICAL, frequency).handle
    estimate = semigroup_norm_heat(ke, f, 0.5, FINE_TIMES, ORIGIN_ONLY)
    assert estimate.kind is NormKind.HEAT
    assert estimate.seminorm == pytest.approx(frequency**0.5 * peak(0.75), rel=1e-3)


@pytest.mark.unit
def test_poisson_norm_needs_order_above_beta() -> None:
    """Test m <= beta raises ParameterError."""
    ke = KernelEvaluator(CLASSICAL)
    with pytest.raises(ParameterError):
        semigroup_norm_poisson(ke, dunkl_cosine(CLASSICAL).handle, 1.0, FINE_TIMES, ORIGIN_ONLY, m=1)


@pytest.mark.unit
def test_divergent_norm_is_flagged_at_t_min() -> None:
    """Test a Weierstrass function measured above its exponent peaks at t_min."""
    ke = KernelEvaluator(CLASSICAL)
    f = weierstrass(CLASSICAL, 0.3).handle
    estimate = semigroup_norm_poisson(ke, f, 0.9, TimeGrid(1e-3, 1e1, 41), ORIGIN_ONLY)
    assert estimate.attained_at_t_min


@pytest.mark.unit
@pytest.mark.parametrize("k", [0.0, 1.0])
@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7])
def test_weierstrass_decay_exponent(k: float, beta: float) -> None:
    """Test max_x |d_t P_t W_beta| decays like t**(beta - 1) for both multiplicities."""
    rs = make_product_z2(1, k)
    f = weierstrass(rs, beta).handle
    fit = decay_exponent_fit(KernelEvaluator(rs), f, 1, TimeGrid(), SpaceGrid())
    assert not fit.degenerate
    assert fit.slope == pytest.approx(beta - 1.0, abs=0.05)


@pytest.mark.unit
def test_decay_fit_needs_samples_in_window() -> None:
    """Test a window with fewer than three times raises."""
    ke = KernelEvaluator(CLASSICAL)
    with pytest.raises(ParameterError):
        decay_exponent_fit(ke, dunkl_cosine(CLASSICAL).handle, 1, TimeGrid(1.0, 10.0, 5), ORIGIN_ONLY)


@pytest.mark.unit
def test_convergence_exponent_of_smooth_wave() -> None:
    """Test max_x |P_t f - f| of a smooth wave decays like t."""
    ke = KernelEvaluator(CLASSICAL)
    fit = convergence_exponent(ke, dunkl_cosine(CLASSICAL).handle, TimeGrid(1e-4, 1e1, 101), ORIGIN_ONLY)
    assert fit.raw_slope == pytest.approx(1.0, abs=0.05)


@pytest.mark.unit
def test_derivative_check_needs_beta_above_one() -> None:
    """Test derivative comparisons are refused for beta <= 1."""
    ke = KernelEvaluator(CLASSICAL)
    with pytest.raises(ParameterError, match="beta > 1"):
        derivative_norm_check(ke, dunkl_cosine(CLASSICAL).handle, 0.5, FINE_TIMES, ORIGIN_ONLY)


@pytest.mark.unit
def test_spectral_bessel_potential() -> None:
    """Test J**gamma scales a wave of frequency lambda by (1 + lambda**2)**(-gamma/2)."""
    rs = make_product_z2(1, 0.5)
    ke = KernelEvaluator(rs)
    potential = bessel_potential_function(ke, dunkl_cosine(rs, 2.0).handle, 0.8)
    assert potential([0.0]) == pytest.approx(5.0**-0.4, rel=1e-12)
    assert bessel_potential_apply(ke, dunkl_cosine(rs, 2.0).handle, 0.8, [1.0]) == pytest.approx(potential([1.0]))


@pytest.mark.unit
def test_spectral_dunkl_derivative() -> None:
    """Test D_0 of the even wave is -lambda times the odd wave."""
    rs = make_product_z2(1, 1.0)
    ke = KernelEvaluator(rs)
    derivative = dunkl_derivative_function(ke, dunkl_cosine(rs, 1.5).handle, 0)
    assert derivative.modes is not None
    assert derivative.sup_norm == pytest.approx(1.5)


@pytest.mark.unit
def test_inclusion_ratio_below_one_for_lower_exponent() -> None:
    """Test the beta_low norm is controlled by the beta_high norm."""
    ke = KernelEvaluator(CLASSICAL)
    ratio = inclusion_ratio(ke, weierstrass(CLASSICAL, 0.7).handle, 0.3, 0.6, FINE_TIMES, ORIGIN_ONLY)
    assert 0.0 < ratio < 10.0


@pytest.mark.unit
def test_inclusion_ratio_order_checked() -> None:
    """Test beta_low must be below beta_high."""
    ke = KernelEvaluator(CLASSICAL)
    with pytest.raises(ParameterError):
        inclusion_ratio(ke, dunkl_cosine(CLASSICAL).handle, 0.6, 0.3, FINE_TIMES, ORIGIN_ONLY)


@pytest.fixture
def settings() -> EquivalenceSettings:
    """Small grids for fast reports."""
    return EquivalenceSettings(
        time_grid=TimeGrid(1e-3, 1e2, 41),
        space_grid=SpaceGrid(half_width=math.pi, points=33, cluster_points=8),
    )


@pytest.mark.unit
def test_equivalence_report_rows(settings: EquivalenceSettings) -> None:
    """Test one row per (k, function, beta) with four estimators below beta = 1."""
    rows = equivalence_report(["dunkl_cosine"], [0.5], [0.0], settings)
    assert len(rows) == 1
    row = rows[0]
    assert set(row.estimates) == {NormKind.POISSON, NormKind.HEAT, NormKind.CLASSICAL, NormKind.ZYGMUND}
    assert not row.flagged
    records = row.to_records()
    assert len(records) == 4
    assert all(set(record) == set(REPORT_COLUMNS) for record in records)


@pytest.mark.unit
def test_equivalence_report_order_independent_of_threads(settings: EquivalenceSettings) -> None:
    """Test rows come back ordered by k, member and beta for any thread count."""
    names = ["constant", "dunkl_cosine"]
    serial = equivalence_report(names, [0.3, 1.2], [0.0, 0.5], settings)
    settings.threads = 3
    threaded = equivalence_report(names, [0.3, 1.2], [0.0, 0.5], settings)
    keys = [(row.k, row.function, row.beta) for row in serial]
    assert keys == [(row.k, row.function, row.beta) for row in threaded]
    assert keys[0] == (0.0, "constant(1)", 0.3)
    assert [row.ratios for row in serial] == [row.ratios for row in threaded]


@pytest.mark.unit
def test_equivalence_report_needs_betas(settings: EquivalenceSettings) -> None:
    """Test an empty beta list raises ParameterError."""
    with pytest.raises(ParameterError, match="beta"):
        equivalence_report(["constant"], [], [0.0], settings)
