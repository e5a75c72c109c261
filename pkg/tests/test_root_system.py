"""Unit tests for the Z2^N root system and its weight measure."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dunkl_lab.base import ParameterError
from dunkl_lab.root_system import (
    RootSystem,
    ball_volume,
    ball_volume_model,
    comparability_ratio,
    group_elements,
    make_product_z2,
    orbit_distance,
    reflect,
    weight,
)

# Homogeneous dimension of Z2^2 with k = 1/2: 2 + 4 * 0.5
HOMOGENEOUS_DIMENSION_HALF = 4.0
# w(B(0, 1)) for k = 1 in rank one: int_{-1}^{1} 2 x**2 dx
UNIT_BALL_K1 = 4.0 / 3.0

coordinates = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


@pytest.mark.unit
def test_product_roots_and_multiplicity() -> None:
    """Test roots are ±sqrt(2) e_j with one multiplicity per root."""
    rs = make_product_z2(2, 0.5)
    assert rs.roots.shape == (4, 2)
    assert np.allclose(np.sum(rs.roots**2, axis=1), 2.0)
    assert rs.multiplicity.tolist() == [0.5, 0.5, 0.5, 0.5]
    assert rs.homogeneous_dimension == HOMOGENEOUS_DIMENSION_HALF


@pytest.mark.unit
def test_per_coordinate_multiplicities() -> None:
    """Test a sequence of multiplicities is kept per coordinate."""
    rs = make_product_z2(2, [0.0, 1.5])
    assert rs.k == (0.0, 1.5)
    assert rs.homogeneous_dimension == pytest.approx(5.0)
    assert not rs.is_classical


@pytest.mark.unit
def test_negative_multiplicity_rejected() -> None:
    """Test a negative multiplicity raises ParameterError."""
    with pytest.raises(ParameterError):
        make_product_z2(1, -0.25)


@pytest.mark.unit
def test_other_groups_rejected() -> None:
    """Test only the product group is constructible."""
    with pytest.raises(ParameterError):
        RootSystem(dimension=1, k=(0.0,), group="A1")


@pytest.mark.unit
def test_from_config_round_trip() -> None:
    """Test the configuration block reproduces the root system."""
    rs = make_product_z2(2, [0.5, 1.0])
    assert RootSystem.from_config(rs.to_config()) == rs


@pytest.mark.unit
def test_from_config_unknown_key() -> None:
    """Test unknown root system keys are rejected."""
    with pytest.raises(ParameterError, match="Unknown"):
        RootSystem.from_config({"group": "z2^N", "N": 1, "k": [0.0], "rank": 1})


@pytest.mark.unit
def test_c_k_matches_gaussian_integrals() -> None:
    """Test c_k for k = 0 and k = 1 in rank one."""
    assert make_product_z2(1, 0.0).c_k == pytest.approx(math.sqrt(2 * math.pi))
    # int exp(-x**2 / 2) 2 x**2 dx = 2 sqrt(2 pi)
    assert make_product_z2(1, 1.0).c_k == pytest.approx(2 * math.sqrt(2 * math.pi))


@pytest.mark.unit
def test_c_k_factorizes() -> None:
    """Test c_k of a product system is the product of rank-one constants."""
    rs = make_product_z2(2, [0.5, 1.0])
    expected = make_product_z2(1, 0.5).c_k * make_product_z2(1, 1.0).c_k
    assert rs.c_k == pytest.approx(expected)


@pytest.mark.unit
@given(x=coordinates, y=coordinates)
def test_reflection_is_an_involution(x: float, y: float) -> None:
    """Test reflecting twice returns the input exactly."""
    rs = make_product_z2(2, 1.0)
    alpha = [0.0, -math.sqrt(2)]
    twice = reflect(rs, alpha, reflect(rs, alpha, [x, y]))
    assert twice.tolist() == [x, y]


@pytest.mark.unit
def test_reflect_rejects_non_roots() -> None:
    """Test reflecting in a vector that is not a root raises."""
    rs = make_product_z2(2, 1.0)
    with pytest.raises(ParameterError):
        reflect(rs, [1.0, 1.0], [1.0, 2.0])


@pytest.mark.unit
def test_group_has_two_to_the_n_elements() -> None:
    """Test Z2^3 has eight sign vectors."""
    assert len(group_elements(make_product_z2(3, 0.0))) == 8


@pytest.mark.unit
@given(x=coordinates, y=coordinates)
def test_weight_is_group_invariant(x: float, y: float) -> None:
    """Test w(sigma x) = w(x) for every sign flip."""
    rs = make_product_z2(2, [0.5, 1.5])
    base = weight(rs, [x, y])
    for signs in group_elements(rs):
        assert weight(rs, signs * np.array([x, y])) == pytest.approx(base)


@pytest.mark.unit
def test_orbit_distance_ignores_signs() -> None:
    """Test points in one orbit are at distance zero."""
    rs = make_product_z2(2, 1.0)
    assert orbit_distance(rs, [1.0, 2.0], [-1.0, -2.0]) == 0.0
    assert orbit_distance(rs, [1.0, 0.0], [-3.0, 0.0]) == pytest.approx(2.0)


@pytest.mark.unit
def test_ball_volume_rank_one() -> None:
    """Test w(B(0, 1)) for k = 1."""
    assert ball_volume(make_product_z2(1, 1.0), [0.0], 1.0) == pytest.approx(UNIT_BALL_K1, rel=1e-7)


@pytest.mark.unit
def test_ball_volume_classical_disc() -> None:
    """Test the k = 0 weighted volume of the unit disc is pi."""
    assert ball_volume(make_product_z2(2, 0.0), [0.0, 0.0], 1.0) == pytest.approx(math.pi, rel=1e-6)


@pytest.mark.unit
def test_ball_volume_requires_positive_radius() -> None:
    """Test a zero radius raises ParameterError."""
    with pytest.raises(ParameterError):
        ball_volume(make_product_z2(1, 1.0), [0.0], 0.0)


@pytest.mark.unit
@pytest.mark.parametrize("center", [0.0, 0.3, 3.0, 40.0])
@pytest.mark.parametrize("radius", [0.01, 1.0, 25.0])
def test_volume_comparable_to_model(center: float, radius: float) -> None:
    """Test w(B(x, r)) stays within fixed factors of its model quantity."""
    ratio = comparability_ratio(make_product_z2(1, 1.0), [center], radius)
    assert 0.05 < ratio < 20.0


@pytest.mark.unit
def test_model_at_origin_is_power_of_radius() -> None:
    """Test the model reduces to r**(N + 2k) at the origin."""
    rs = make_product_z2(1, 0.5)
    assert ball_volume_model(rs, [0.0], 2.0) == pytest.approx(2.0**2)
