"""Normalized root systems of product type Z2^N and their weight measure."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import integrate, special

from .base import (
    FloatArray,
    IntegrationError,
    ParameterError,
    PointLike,
    as_point,
    require_positive,
)
from .quadrature import adaptive_integrate, call_quadpack

logger = logging.getLogger(__name__)

PRODUCT_Z2 = "z2^N"
ROOT_NORM_SQUARED = 2.0


@dataclass(frozen=True)
class RootSystem:
    """A normalized root system with a multiplicity function.

    Only the product group Z2^N is constructible (see :func:`make_product_z2`);
    the roots are then ``±sqrt(2) e_j`` and the multiplicity is constant on each
    pair ``±sqrt(2) e_j``.

    Attributes:
        dimension: The rank ``N``.
        k: Multiplicity of the pair ``±sqrt(2) e_j``, one value per coordinate.
        group: Group label, currently always ``"z2^N"``.
        roots: Array of shape ``(2N, N)``; row ``2j`` is ``+sqrt(2) e_j``,
            row ``2j + 1`` is ``-sqrt(2) e_j``.
        multiplicity: ``k(alpha)`` for each row of ``roots``.
        homogeneous_dimension: ``N + sum over roots of k(alpha)``.
        c_k: ``int exp(-|x|^2 / 2) dw(x)``.
    """

    dimension: int
    k: tuple[float, ...]
    group: str = PRODUCT_Z2
    roots: FloatArray = field(init=False, repr=False, compare=False)
    multiplicity: FloatArray = field(init=False, repr=False, compare=False)
    homogeneous_dimension: float = field(init=False, compare=False)
    c_k: float = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if self.group != PRODUCT_Z2:
            raise ParameterError(
                f"Only product Z2^N root systems are supported, got {self.group!r}",
            )
        if self.dimension < 1:
            raise ParameterError(f"Dimension must be positive, got {self.dimension}")
        if len(self.k) != self.dimension:
            raise ParameterError(
                f"Expected {self.dimension} multiplicities, got {len(self.k)}",
            )
        negative = [value for value in self.k if not value >= 0]
        if negative:
            raise ParameterError(
                f"Multiplicities must be non-negative, got {', '.join(map(str, negative))}",
            )
        roots = np.zeros((2 * self.dimension, self.dimension))
        for j in range(self.dimension):
            roots[2 * j, j] = np.sqrt(ROOT_NORM_SQUARED)
            roots[2 * j + 1, j] = -np.sqrt(ROOT_NORM_SQUARED)
        roots.setflags(write=False)
        multiplicity = np.repeat(np.asarray(self.k, dtype=np.float64), 2)
        multiplicity.setflags(write=False)
        k = np.asarray(self.k, dtype=np.float64)
        log_c = np.sum((2 * k + 0.5) * np.log(2.0) + special.gammaln(k + 0.5))
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "multiplicity", multiplicity)
        object.__setattr__(
            self,
            "homogeneous_dimension",
            float(self.dimension + multiplicity.sum()),
        )
        object.__setattr__(self, "c_k", float(np.exp(log_c)))

    @property
    def k_array(self) -> FloatArray:
        """Per-coordinate multiplicities as an array."""

        return np.asarray(self.k, dtype=np.float64)

    @property
    def coordinate_dimensions(self) -> FloatArray:
        """Homogeneous dimension ``1 + 2 k_j`` of each rank-one factor."""

        return 1.0 + 2.0 * self.k_array

    @property
    def is_classical(self) -> bool:
        """Whether ``k`` vanishes identically."""

        return all(value == 0 for value in self.k)

    def root_axis(self, alpha: PointLike) -> int:
        """Return the coordinate index ``j`` of a root ``±sqrt(2) e_j``.

        Raises:
            ParameterError: If ``alpha`` is not a root.
        """

        alpha_vector = as_point(alpha, self.dimension)
        matches = np.flatnonzero(np.all(np.isclose(self.roots, alpha_vector), axis=1))
        if matches.size == 0:
            raise ParameterError(f"{alpha_vector} is not a root of this system")
        return int(matches[0] // 2)

    def to_config(self) -> dict[str, Any]:
        """Serialize to the ``{"group", "N", "k"}`` configuration block."""

        return {"group": self.group, "N": self.dimension, "k": list(self.k)}

    @classmethod
    def from_config(cls, block: Mapping[str, Any]) -> RootSystem:
        """Build a root system from a configuration block.

        Raises:
            ParameterError: On unknown keys or an unsupported group.
        """

        unknown = sorted(set(block) - {"group", "N", "k"})
        if unknown:
            raise ParameterError(f"Unknown root system key(s): {', '.join(unknown)}")
        group = block.get("group", PRODUCT_Z2)
        if group != PRODUCT_Z2:
            raise ParameterError(f"Unsupported group {group!r}")
        k = block.get("k", [0.0])
        dimension = int(block.get("N", len(k)))
        return make_product_z2(dimension, k)


def make_product_z2(N: int, k: Sequence[float] | float) -> RootSystem:
    """Instantiate the product root system ``{±sqrt(2) e_j}`` of rank ``N``.

    Args:
        N: The rank.
        k: One multiplicity per coordinate, or a single value used for all.

    Returns:
        The immutable root system.

    Raises:
        ParameterError: If a multiplicity is negative.
    """

    values = [float(k)] * N if np.isscalar(k) else [float(value) for value in k]  # type: ignore[arg-type]
    return RootSystem(dimension=int(N), k=tuple(values))


def reflect(rs: RootSystem, alpha: PointLike, x: PointLike) -> FloatArray:
    """Apply the reflection ``sigma_alpha`` to ``x``.

    For Z2^N the reflection is a sign flip of one coordinate, performed
    exactly so that reflecting twice returns the input bit for bit.
    """

    axis = rs.root_axis(alpha)
    point = as_point(x, rs.dimension).copy()
    point[axis] = -point[axis]
    return point


def group_elements(rs: RootSystem) -> list[FloatArray]:
    """Enumerate Z2^N as sign vectors acting by coordinatewise multiplication."""

    return [
        np.asarray(signs, dtype=np.float64)
        for signs in itertools.product((1.0, -1.0), repeat=rs.dimension)
    ]


def weight(rs: RootSystem, x: PointLike) -> float:
    """Evaluate ``w(x) = prod over roots |<x, alpha>|**k(alpha)``."""

    return float(weight_array(rs, as_point(x, rs.dimension)[None, :])[0])


def weight_array(rs: RootSystem, points: np.ndarray) -> FloatArray:
    """Vectorized weight for points of shape ``(..., N)``."""

    k = rs.k_array
    # Each coordinate carries the pair ±sqrt(2) e_j: (sqrt(2)|x_j|)**(2 k_j).
    factors = np.power(2.0, k) * np.power(np.abs(points), 2.0 * k)
    return np.prod(factors, axis=-1)


def orbit_distance(rs: RootSystem, x: PointLike, y: PointLike) -> float:
    """Distance from the group orbit of ``x`` to ``y``."""

    point_x = as_point(x, rs.dimension)
    point_y = as_point(y, rs.dimension)
    return min(
        float(np.linalg.norm(signs * point_x - point_y)) for signs in group_elements(rs)
    )


def orbit_distance_array(x: np.ndarray, y: np.ndarray) -> FloatArray:
    """Vectorized orbit distance for Z2^N, ``|| |x| - |y| ||``."""

    return np.linalg.norm(np.abs(x) - np.abs(y), axis=-1)


def ball_volume(rs: RootSystem, x: PointLike, r: float, tol: float = 1e-8) -> float:
    """Weighted volume ``w(B(x, r))`` by adaptive quadrature.

    Args:
        rs: The root system.
        x: Ball center.
        r: Ball radius.
        tol: Relative error target.

    Raises:
        IntegrationError: If the nested rule cannot reach ``tol``.
    """

    require_positive("radius", r)
    require_positive("tolerance", tol)
    center = as_point(x, rs.dimension)
    k = rs.k_array
    if rs.dimension == 1:
        scale = 2.0 ** k[0]

        def density(y: float) -> float:
            return float(scale * abs(y) ** (2 * k[0]))

        lower, upper = center[0] - r, center[0] + r
        result = adaptive_integrate(
            density, [(lower, upper)], tol, points=[0.0], relative=True,
        )
        return result.value

    def integrand(*coordinates: float) -> float:
        return float(np.prod(2.0**k * np.abs(coordinates) ** (2 * k)))

    def bounds(index: int) -> Any:
        def limits(*outer: float) -> tuple[float, float]:
            used = sum((value - center[index + 1 + j]) ** 2 for j, value in enumerate(outer))
            half = np.sqrt(max(r * r - used, 0.0))
            return center[index] - half, center[index] + half

        return limits

    def options(index: int) -> Any:
        def opts(*outer: float) -> dict[str, Any]:
            lower, upper = bounds(index)(*outer)
            chosen: dict[str, Any] = {"epsrel": tol, "epsabs": 0.0, "limit": 100}
            if lower < 0.0 < upper:
                chosen["points"] = [0.0]
            return chosen

        return opts

    ranges = [bounds(index) for index in range(rs.dimension)]
    opts = [options(index) for index in range(rs.dimension)]
    value, error = call_quadpack(integrate.nquad, integrand, ranges, opts=opts)
    if error > 10 * tol * abs(value):
        raise IntegrationError("Ball volume quadrature missed its tolerance", value, error)
    logger.debug("w(B(%s, %g)) = %.6g (error %.2g)", center, r, value, error)
    return float(value)


def ball_volume_model(rs: RootSystem, x: PointLike, r: float) -> float:
    """Comparison quantity ``r**N prod over roots (|<x, alpha>| + r)**k(alpha)``."""

    center = as_point(x, rs.dimension)
    inner = np.abs(rs.roots @ center)
    return float(r**rs.dimension * np.prod((inner + r) ** rs.multiplicity))


def comparability_ratio(rs: RootSystem, x: PointLike, r: float, tol: float = 1e-8) -> float:
    """Ratio of ``w(B(x, r))`` to its two-sided comparison quantity."""

    return ball_volume(rs, x, r, tol) / ball_volume_model(rs, x, r)


__all__ = [
    "PRODUCT_Z2",
    "RootSystem",
    "ball_volume",
    "ball_volume_model",
    "comparability_ratio",
    "group_elements",
    "make_product_z2",
    "orbit_distance",
    "orbit_distance_array",
    "reflect",
    "weight",
    "weight_array",
]
