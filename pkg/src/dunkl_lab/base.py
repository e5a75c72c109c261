"""Shared types, point coercion and the exception hierarchy."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]
PointLike = ArrayLike


class DunklLabError(Exception):
    """Root of every error raised by ``dunkl_lab``."""


class ParameterError(DunklLabError, ValueError):
    """An argument is outside the documented domain of an operation."""


class ConfigError(ParameterError):
    """A configuration document is malformed.

    Attributes:
        path: Dotted key path of the offending entry, ``""`` for the root.
    """

    def __init__(self, message: str, path: str = "") -> None:
        self.path = path
        prefix = f"{path}: " if path else ""
        super().__init__(f"{prefix}{message}")


class HyperplaneSingularityError(DunklLabError):
    """A Dunkl difference quotient was requested on a reflection hyperplane
    for a function without derivative data."""


class IntegrationError(DunklLabError):
    """A quadrature did not reach its tolerance.

    Attributes:
        value: Best value obtained before giving up.
        error_estimate: Achieved error estimate for ``value``.
    """

    def __init__(self, message: str, value: complex, error_estimate: float) -> None:
        self.value = value
        self.error_estimate = error_estimate
        super().__init__(
            f"{message} (best value {value!r}, achieved error {error_estimate:.3g})",
        )


class TruncationError(IntegrationError):
    """A truncated infinite integral could not bound its tail."""


class UnsupportedOrderError(DunklLabError):
    """A derivative order above the supported maximum was requested."""


class SpectrumError(DunklLabError):
    """A resolvent was requested at a point of the spectrum."""


class BranchError(DunklLabError):
    """The spectrum meets the branch cut of the principal square root."""


class PathError(DunklLabError):
    """A contour leaves the region where the resolvent is controlled."""


def as_point(x: PointLike, dimension: int | None = None) -> FloatArray:
    """Coerce ``x`` to a one-dimensional float array.

    Args:
        x: A scalar (rank one) or a sequence of coordinates.
        dimension: Expected number of coordinates, if known.

    Returns:
        The coordinates as a ``float64`` vector.

    Raises:
        ParameterError: If the number of coordinates does not match.
    """

    point = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if point.ndim != 1:
        raise ParameterError(f"Expected a point, got an array of shape {point.shape}")
    if dimension is not None and point.shape[0] != dimension:
        raise ParameterError(
            f"Expected a point with {dimension} coordinates, got {point.shape[0]}",
        )
    return point


def as_points(xs: ArrayLike, dimension: int) -> FloatArray:
    """Coerce a batch of points to shape ``(P, dimension)``.

    Rank-one batches may be given as a flat sequence of scalars.
    """

    points = np.asarray(xs, dtype=np.float64)
    if points.ndim == 0:
        points = points.reshape(1, 1)
    elif points.ndim == 1:
        points = points.reshape(-1, 1) if dimension == 1 else points.reshape(1, -1)
    if points.shape[-1] != dimension:
        raise ParameterError(
            f"Expected points with {dimension} coordinates, got shape {points.shape}",
        )
    return points


def require_positive(name: str, value: float) -> float:
    """Return ``value`` if it is a finite positive number."""

    if not np.isfinite(value) or value <= 0:
        raise ParameterError(f"{name} must be positive, got {value!r}")
    return float(value)


def require_order(n: int, maximum: int) -> int:
    """Validate a derivative order against ``maximum``."""

    if n < 0:
        raise ParameterError(f"Derivative order must be non-negative, got {n}")
    if n > maximum:
        raise UnsupportedOrderError(
            f"Derivative order {n} exceeds the supported maximum {maximum}",
        )
    return n


def log_spaced(lower: float, upper: float, count: int) -> FloatArray:
    """Return ``count`` logarithmically spaced values between the bounds."""

    return np.geomspace(lower, upper, count)


__all__ = [
    "BranchError",
    "ComplexArray",
    "ConfigError",
    "DunklLabError",
    "FloatArray",
    "HyperplaneSingularityError",
    "IntegrationError",
    "ParameterError",
    "PathError",
    "PointLike",
    "SpectrumError",
    "TruncationError",
    "UnsupportedOrderError",
    "as_point",
    "as_points",
    "log_spaced",
    "require_order",
    "require_positive",
]
