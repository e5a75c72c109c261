"""Numerical integration engines with error control.

Three families are provided:

* Gaussian rules (Laguerre with weight ``u**alpha * exp(-u)``, Jacobi, composite
  Legendre panels) returned as immutable :class:`QuadratureRule` values.
* Adaptive integration over intervals and boxes, delegated to QUADPACK's nested
  Gauss-Kronrod pairs through :mod:`scipy.integrate`.
* Contour integration along piecewise parameterized paths, with the error
  estimated by node doubling.
"""

from __future__ import annotations

import logging
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any

import numpy as np
from scipy import integrate, special

from .base import (
    ComplexArray,
    FloatArray,
    IntegrationError,
    ParameterError,
)

logger = logging.getLogger(__name__)

DEFAULT_QUAD_LIMIT = 200
# Integrals whose error estimate is this small have underflowed; nothing is left to resolve.
UNDERFLOW_FLOOR = 1e-280


class RuleKind(Enum):
    """Families of quadrature rules."""

    GAUSS_LAGUERRE = "gauss_laguerre"
    GAUSS_JACOBI = "gauss_jacobi"
    GAUSS_LEGENDRE_PANELS = "gauss_legendre_panels"
    LOG_PANELS = "log_panels"
    ADAPTIVE_NESTED = "adaptive_nested"


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a fixed quadrature rule.

    Attributes:
        kind: The family the rule belongs to.
        nodes: Sorted nodes.
        weights: Weights matching ``nodes``.
        order: Polynomial degree integrated exactly against the rule's weight.
        parameters: Family parameters, for example ``{"alpha": -0.5}``.
    """

    kind: RuleKind
    nodes: FloatArray
    weights: FloatArray
    order: int
    parameters: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.nodes.shape != self.weights.shape:
            raise ParameterError("Quadrature nodes and weights differ in shape")
        if np.any(np.diff(self.nodes) < 0):
            raise ParameterError("Quadrature nodes must be sorted")

    @property
    def size(self) -> int:
        """Number of nodes."""

        return int(self.nodes.shape[0])

    def integrate(self, values: np.ndarray) -> Any:
        """Contract sampled values against the weights along the first axis.

        Args:
            values: Samples at ``nodes``; extra trailing axes are carried.

        Returns:
            The weighted sum, with the trailing shape of ``values``.
        """

        return np.tensordot(self.weights, values, axes=(0, 0))


@dataclass(frozen=True)
class QuadratureResult:
    """Value of an integral together with its error estimate."""

    value: Any
    error: float
    evaluations: int
    kind: RuleKind


def _frozen(array: np.ndarray) -> FloatArray:
    array = np.ascontiguousarray(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@lru_cache(maxsize=64)
def gauss_laguerre(alpha: float, n: int) -> QuadratureRule:
    """Generalized Gauss-Laguerre rule for ``int_0^inf u**alpha e**-u g(u) du``.

    Args:
        alpha: Exponent of the weight, ``alpha > -1``.
        n: Number of nodes, at least two.

    Returns:
        A rule exact for polynomials of degree ``2n - 1``.
    """

    if alpha <= -1:
        raise ParameterError(f"Laguerre exponent must exceed -1, got {alpha}")
    if n < 2:
        raise ParameterError(f"Gauss-Laguerre needs at least 2 nodes, got {n}")
    nodes, weights = special.roots_genlaguerre(n, alpha)
    return QuadratureRule(
        kind=RuleKind.GAUSS_LAGUERRE,
        nodes=_frozen(nodes),
        weights=_frozen(weights),
        order=2 * n - 1,
        parameters={"alpha": float(alpha)},
    )


@lru_cache(maxsize=64)
def gauss_jacobi(alpha: float, beta: float, n: int) -> QuadratureRule:
    """Gauss-Jacobi rule for the weight ``(1 - s)**alpha (1 + s)**beta`` on [-1, 1]."""

    if alpha <= -1 or beta <= -1:
        raise ParameterError(f"Jacobi exponents must exceed -1, got {alpha}, {beta}")
    if n < 1:
        raise ParameterError(f"Gauss-Jacobi needs at least 1 node, got {n}")
    nodes, weights = special.roots_jacobi(n, alpha, beta)
    return QuadratureRule(
        kind=RuleKind.GAUSS_JACOBI,
        nodes=_frozen(nodes),
        weights=_frozen(weights),
        order=2 * n - 1,
        parameters={"alpha": float(alpha), "beta": float(beta)},
    )


def gauss_legendre_panels(edges: Sequence[float], n: int) -> QuadratureRule:
    """Composite Gauss-Legendre rule with ``n`` nodes on each panel."""

    edges_array = np.asarray(edges, dtype=np.float64)
    if edges_array.ndim != 1 or edges_array.size < 2:
        raise ParameterError("Panel edges need at least two points")
    if np.any(np.diff(edges_array) <= 0):
        raise ParameterError("Panel edges must be strictly increasing")
    reference_nodes, reference_weights = _legendre(n)
    lower, upper = edges_array[:-1, None], edges_array[1:, None]
    half = 0.5 * (upper - lower)
    nodes = (lower + upper) * 0.5 + half * reference_nodes[None, :]
    weights = half * reference_weights[None, :]
    return QuadratureRule(
        kind=RuleKind.GAUSS_LEGENDRE_PANELS,
        nodes=_frozen(nodes.ravel()),
        weights=_frozen(weights.ravel()),
        order=2 * n - 1,
        parameters={"panels": float(edges_array.size - 1)},
    )


@lru_cache(maxsize=32)
def _legendre(n: int) -> tuple[FloatArray, FloatArray]:
    if n < 1:
        raise ParameterError(f"Gauss-Legendre needs at least 1 node, got {n}")
    nodes, weights = special.roots_legendre(n)
    return _frozen(nodes), _frozen(weights)


def laguerre_integrate(
    integrand: Callable[[FloatArray], np.ndarray],
    alpha: float,
    n: int,
    scale: float = 1.0,
) -> Any:
    """Integrate ``u**alpha e**-u g(u)`` over ``(0, inf)`` with ``n`` nodes.

    With ``scale = c > 1`` the rule is applied after the change of variables
    ``u = v / c``, which resolves integrands that behave like ``e**(-c u)``.

    Args:
        integrand: Vectorized ``g``; called with the node array, returns samples
            with the nodes on the first axis.
        alpha: Weight exponent.
        n: Node count.
        scale: Change-of-variables factor ``c >= 1``.
    """

    if scale < 1:
        raise ParameterError(f"Laguerre scale must be at least 1, got {scale}")
    rule = gauss_laguerre(alpha, n)
    with np.errstate(divide="ignore", under="ignore"):
        log_weights = np.log(rule.weights) + rule.nodes * (1.0 - 1.0 / scale)
        weights = np.exp(log_weights) * scale ** (-(alpha + 1.0))
    samples = integrand(rule.nodes / scale)
    return np.tensordot(weights, samples, axes=(0, 0))


def adaptive_laguerre(
    integrand: Callable[[FloatArray], np.ndarray],
    alpha: float,
    tol: float,
    start_nodes: int = 64,
    max_nodes: int = 512,
    scale: float = 1.0,
) -> QuadratureResult:
    """Gauss-Laguerre integration, doubling the node count until stable.

    The error estimate is the change between the last two node counts,
    relative to the magnitude of the result.

    Raises:
        IntegrationError: If ``max_nodes`` is reached before the tolerance.
    """

    n = start_nodes
    previous = laguerre_integrate(integrand, alpha, n, scale)
    evaluations = n
    while True:
        n *= 2
        current = laguerre_integrate(integrand, alpha, n, scale)
        evaluations += n
        magnitude = max(float(np.max(np.abs(current))), np.finfo(float).tiny)
        error = float(np.max(np.abs(current - previous))) / magnitude
        if error <= tol:
            return QuadratureResult(current, error, evaluations, RuleKind.GAUSS_LAGUERRE)
        if 2 * n > max_nodes:
            raise IntegrationError(
                f"Gauss-Laguerre did not converge with {n} nodes",
                complex(np.ravel(current)[0]),
                error,
            )
        logger.debug("Doubling Laguerre nodes to %d (relative change %.3g)", 2 * n, error)
        previous = current


def log_panel_integrate(
    integrand: Callable[[FloatArray], np.ndarray],
    lower: float,
    upper: float,
    tol: float,
    nodes: int = 8,
    max_nodes: int = 64,
    panel_width: float = 1.0,
    normwise: bool = False,
) -> QuadratureResult:
    """Integrate over ``[lower, upper]`` with Gauss-Legendre panels in ``log u``.

    The substitution ``u = e**s`` turns features at every scale of ``u`` into
    features of unit width in ``s``, so equal panels in ``s`` resolve integrands
    that vary over many decades. The node count per panel doubles until the
    change is below ``tol`` relative to the sum of absolute contributions.

    Args:
        integrand: Vectorized ``g(u)`` returning samples with the nodes on the
            first axis.
        lower: Positive lower bound.
        upper: Upper bound.
        tol: Relative tolerance.
        nodes: Initial nodes per panel.
        max_nodes: Largest node count per panel.
        panel_width: Panel width in ``log u``.
        normwise: Measure the change against the largest component instead
            of componentwise (for matrix-valued integrands).

    Raises:
        IntegrationError: If ``max_nodes`` is reached first.
    """

    if not 0 < lower < upper:
        raise ParameterError(f"Log panels need 0 < lower < upper, got {lower}, {upper}")
    span = np.log(upper) - np.log(lower)
    count = max(1, int(np.ceil(span / panel_width)))
    edges = np.linspace(np.log(lower), np.log(upper), count + 1)

    def evaluate(n: int) -> tuple[np.ndarray, np.ndarray]:
        rule = gauss_legendre_panels(edges, n)
        u = np.exp(rule.nodes)
        samples = np.asarray(integrand(u))
        weights = rule.weights * u
        value = np.tensordot(weights, samples, axes=(0, 0))
        magnitude = np.tensordot(weights, np.abs(samples), axes=(0, 0))
        return value, magnitude

    previous, _ = evaluate(nodes)
    evaluations = count * nodes
    while True:
        nodes *= 2
        current, magnitude = evaluate(nodes)
        evaluations += count * nodes
        scale = np.maximum(np.max(magnitude) if normwise else magnitude, np.finfo(float).tiny)
        error = float(np.max(np.abs(current - previous) / scale))
        if error <= tol:
            return QuadratureResult(current, error, evaluations, RuleKind.LOG_PANELS)
        if 2 * nodes > max_nodes:
            raise IntegrationError(
                f"Log-panel quadrature did not converge with {nodes} nodes per panel",
                complex(np.ravel(current)[0]),
                error,
            )
        logger.debug("Doubling log-panel nodes to %d (relative change %.3g)", 2 * nodes, error)
        previous = current


def call_quadpack(
    routine: Callable[..., tuple[Any, ...]],
    *args: Any,
    **kwargs: Any,
) -> tuple[Any, ...]:
    """Call a QUADPACK routine, logging its warnings instead of raising them."""

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        result = routine(*args, **kwargs)
    if caught:
        logger.debug("QUADPACK warning: %s", caught[-1].message)
    return result


def adaptive_integrate(
    integrand: Callable[..., float],
    region: Sequence[tuple[float, float]],
    tol: float,
    points: Sequence[float] | None = None,
    limit: int = DEFAULT_QUAD_LIMIT,
    relative: bool = False,
    algebraic_weight: tuple[float, float] | None = None,
    floor: float = 0.0,
) -> QuadratureResult:
    """Integrate a scalar function over an interval or a box.

    Infinite bounds are allowed. ``integrand`` receives one positional argument
    per dimension of ``region``.

    Args:
        integrand: The function to integrate.
        region: One ``(lower, upper)`` pair per dimension.
        tol: Target error, absolute unless ``relative`` is set.
        points: Interior break points (one-dimensional finite regions only).
        limit: Subdivision budget of the nested rule.
        relative: Interpret ``tol`` relative to the result.
        algebraic_weight: Exponents ``(a, b)`` of a weight
            ``(s - lower)**a (upper - s)**b`` applied by the rule itself
            (one-dimensional finite regions only).
        floor: Absolute error that is always accepted, also in relative mode.
            Errors below ``UNDERFLOW_FLOOR`` are accepted regardless.

    Raises:
        IntegrationError: If the error estimate exceeds the tolerance.
    """

    if tol <= 0:
        raise ParameterError(f"Tolerance must be positive, got {tol}")
    if floor < 0:
        raise ParameterError(f"Absolute floor must be nonnegative, got {floor}")
    if not region:
        raise ParameterError("Integration region is empty")
    epsabs, epsrel = (floor, tol) if relative else (max(tol, floor), 0.0)
    if len(region) == 1:
        lower, upper = region[0]
        options: dict[str, Any] = {"epsabs": epsabs, "epsrel": epsrel, "limit": limit}
        if algebraic_weight is not None:
            options["weight"] = "alg"
            options["wvar"] = algebraic_weight
        elif points is not None and np.isfinite(lower) and np.isfinite(upper):
            inside = sorted({p for p in points if lower < p < upper})
            if inside:
                options["points"] = inside
        value, error, info = call_quadpack(
            integrate.quad, integrand, lower, upper, full_output=1, **options,
        )[:3]
        evaluations = int(info.get("neval", 0)) if isinstance(info, dict) else 0
    else:
        value, error, info = call_quadpack(
            integrate.nquad,
            integrand,
            list(region),
            opts={"epsabs": epsabs, "epsrel": epsrel, "limit": limit},
            full_output=True,
        )
        evaluations = int(info.get("neval", 0))
    bound = tol * abs(value) if relative else tol
    bound = max(bound, floor, UNDERFLOW_FLOOR)
    if error > bound and error > 10 * np.finfo(float).eps * abs(value):
        raise IntegrationError("Adaptive quadrature missed its tolerance", value, error)
    return QuadratureResult(float(value), float(error), evaluations, RuleKind.ADAPTIVE_NESTED)


def adaptive_integrate_vector(
    integrand: Callable[[float], np.ndarray],
    lower: float,
    upper: float,
    tol: float,
    points: Sequence[float] | None = None,
    limit: int = 2000,
) -> QuadratureResult:
    """Integrate an array-valued function of one variable.

    All components share the adaptive subdivision; the error is measured in
    the max norm.
    """

    if tol <= 0:
        raise ParameterError(f"Tolerance must be positive, got {tol}")
    options: dict[str, Any] = {"epsabs": tol, "epsrel": 0.0, "norm": "max", "limit": limit}
    if points is not None and np.isfinite(lower) and np.isfinite(upper):
        inside = sorted({p for p in points if lower < p < upper})
        if inside:
            options["points"] = inside
    value, error, info = integrate.quad_vec(
        integrand, lower, upper, full_output=True, **options,
    )
    if not info.success and error > tol:
        raise IntegrationError(
            f"Vector quadrature failed: {info.message}",
            complex(np.ravel(value)[0]),
            float(error),
        )
    return QuadratureResult(value, float(error), int(info.neval), RuleKind.ADAPTIVE_NESTED)


@dataclass(frozen=True)
class Segment:
    """A smooth piece of a contour.

    Attributes:
        point: Parameterization ``s -> z(s)``, vectorized.
        velocity: Derivative ``s -> z'(s)``, vectorized.
        edges: Panel edges in the parameter ``s``.
    """

    point: Callable[[FloatArray], ComplexArray]
    velocity: Callable[[FloatArray], ComplexArray]
    edges: tuple[float, ...]


def line_segment(start: complex, end: complex, panels: int = 1) -> Segment:
    """Straight segment from ``start`` to ``end``."""

    direction = end - start
    return Segment(
        point=lambda s: start + s * direction,
        velocity=lambda s: np.full(np.shape(s), direction, dtype=np.complex128),
        edges=tuple(np.linspace(0.0, 1.0, panels + 1)),
    )


def circle_segment(
    center: complex,
    radius: float,
    start_angle: float = -np.pi,
    end_angle: float = np.pi,
    panels: int = 8,
) -> Segment:
    """Counter-clockwise circular arc."""

    return Segment(
        point=lambda s: center + radius * np.exp(1j * s),
        velocity=lambda s: 1j * radius * np.exp(1j * s),
        edges=tuple(np.linspace(start_angle, end_angle, panels + 1)),
    )


def _contour_sum(
    segments: Sequence[Segment],
    integrand: Callable[[complex], np.ndarray],
    nodes: int,
) -> tuple[np.ndarray, int]:
    total: np.ndarray | None = None
    count = 0
    for segment in segments:
        rule = gauss_legendre_panels(segment.edges, nodes)
        z = segment.point(rule.nodes)
        dz = segment.velocity(rule.nodes) * rule.weights
        for z_i, dz_i in zip(z, dz, strict=True):
            term = np.asarray(integrand(complex(z_i)), dtype=np.complex128) * dz_i
            total = term if total is None else total + term
        count += rule.size
    if total is None:
        raise ParameterError("Contour has no segments")
    return total, count


def contour_integrate(
    segments: Sequence[Segment],
    integrand: Callable[[complex], np.ndarray],
    tol: float,
    nodes: int = 8,
    max_nodes: int = 128,
) -> QuadratureResult:
    """Integrate ``integrand(z) dz`` along a piecewise path.

    Each panel uses a Gauss-Legendre rule; the node count per panel doubles
    until two successive sums agree within ``tol`` in the max norm.

    Raises:
        IntegrationError: If ``max_nodes`` is reached first.
    """

    previous, evaluations = _contour_sum(segments, integrand, nodes)
    while True:
        nodes *= 2
        current, count = _contour_sum(segments, integrand, nodes)
        evaluations += count
        error = float(np.max(np.abs(current - previous)))
        if error <= tol:
            return QuadratureResult(current, error, evaluations, RuleKind.GAUSS_LEGENDRE_PANELS)
        if 2 * nodes > max_nodes:
            raise IntegrationError(
                f"Contour quadrature did not converge with {nodes} nodes per panel",
                complex(np.ravel(current)[0]),
                error,
            )
        logger.debug("Doubling contour nodes to %d (change %.3g)", 2 * nodes, error)
        previous = current


__all__ = [
    "DEFAULT_QUAD_LIMIT",
    "QuadratureResult",
    "QuadratureRule",
    "RuleKind",
    "Segment",
    "adaptive_integrate",
    "adaptive_integrate_vector",
    "adaptive_laguerre",
    "call_quadpack",
    "circle_segment",
    "contour_integrate",
    "gauss_jacobi",
    "gauss_laguerre",
    "gauss_legendre_panels",
    "laguerre_integrate",
    "line_segment",
    "log_panel_integrate",
]
