"""Dunkl heat and Poisson kernels, their time derivatives and semigroup actions.

The heat kernel is evaluated in closed form through the rank-one factors of
the Dunkl kernel. Time derivatives come from the derivatives of ``log h`` in
the variable ``u = 1/t``, assembled with complete Bell polynomials and turned
back into ``t``-derivatives with Lah numbers. The Poisson kernel and its time
derivatives are obtained from the heat kernel by subordination::

    p_t = pi**-1/2 int_0^inf e**-u h_{t**2 / 4u} u**-1/2 du

with even and odd derivatives transferred as

    d_t**(2n) p_t   = (-1)**n pi**-1/2 int e**-u phi^(n)(t**2 / 4u) u**-1/2 du
    d_t**(2n+1) p_t = (-1)**n pi**-1/2 int e**-u (t / 2u) phi^(n+1)(t**2 / 4u) u**-1/2 du

where ``phi^(n)`` is the ``n``-th time derivative of the heat kernel.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from scipy import special

from .base import (
    FloatArray,
    IntegrationError,
    ParameterError,
    PointLike,
    TruncationError,
    UnsupportedOrderError,
    as_point,
    as_points,
    log_spaced,
    require_order,
    require_positive,
)
from .dunkl_kernel import (
    FunctionHandle,
    KernelCache,
    SpectralMode,
    mode_function,
    rank_one_log_derivatives,
    rank_one_log_E_scaled,
)
from .quadrature import (
    adaptive_integrate_vector,
    gauss_laguerre,
    log_panel_integrate,
)
from .root_system import RootSystem, ball_volume, orbit_distance, weight_array

logger = logging.getLogger(__name__)

DEFAULT_N_MAX = 3
RICHARDSON_STEP = 1e-3
FD_EXTRA_ORDERS = 2
MAX_POISSON_RADIUS = 1e9
POISSON_QUAD_LIMIT = 20000


class KernelMode(Enum):
    """Which semigroup a kernel evaluator or an action refers to."""

    HEAT = "heat"
    POISSON = "poisson"


class SubordinationRule(Enum):
    """Quadrature used for the subordination integral."""

    LOG_PANELS = "log_panels"
    GAUSS_LAGUERRE = "gauss_laguerre"


@dataclass(frozen=True)
class TimeGrid:
    """Log-spaced sample times discretizing ``sup_{t > 0}``."""

    t_min: float = 1e-3
    t_max: float = 10.0
    points: int = 60

    def __post_init__(self) -> None:
        require_positive("t_min", self.t_min)
        if not self.t_max > self.t_min:
            raise ParameterError(f"t_max must exceed t_min, got {self.t_min} and {self.t_max}")
        if self.points < 2:
            raise ParameterError(f"A time grid needs at least 2 points, got {self.points}")

    @property
    def times(self) -> FloatArray:
        """The strictly increasing sample times."""

        return log_spaced(self.t_min, self.t_max, self.points)

    def refined(self) -> TimeGrid:
        """Grid with every gap halved (the original times are kept)."""

        return TimeGrid(self.t_min, self.t_max, 2 * self.points - 1)

    def window(self, lower: float, upper: float) -> FloatArray:
        """Sample times inside ``[lower, upper]``."""

        times = self.times
        return times[(times >= lower * (1 - 1e-12)) & (times <= upper * (1 + 1e-12))]

    def to_config(self) -> dict[str, Any]:
        """Serialize to a configuration block."""

        return {"t_min": self.t_min, "t_max": self.t_max, "points": self.points}

    @classmethod
    def from_config(cls, block: Mapping[str, Any]) -> TimeGrid:
        """Build a time grid from a configuration block."""

        return cls(
            t_min=float(block.get("t_min", 1e-3)),
            t_max=float(block.get("t_max", 10.0)),
            points=int(block.get("points", 60)),
        )


@dataclass
class KernelEvaluator:
    """Evaluates heat and Poisson kernels and their time derivatives.

    Attributes:
        rs: The root system.
        mode: Default semigroup for :func:`apply_semigroup`.
        n_max: Highest analytic time derivative of the heat kernel.
        tol: Relative tolerance of the subordination quadrature.
        subordination: Rule used for the subordination integral.
        laguerre_nodes: Initial Gauss-Laguerre node count.
        max_laguerre_nodes: Largest Gauss-Laguerre node count.
        panel_nodes: Initial nodes per log panel.
        max_panel_nodes: Largest node count per log panel.
        cache: Shared coefficient cache.
    """

    rs: RootSystem
    mode: KernelMode = KernelMode.POISSON
    n_max: int = DEFAULT_N_MAX
    tol: float = 1e-10
    subordination: SubordinationRule = SubordinationRule.LOG_PANELS
    laguerre_nodes: int = 64
    max_laguerre_nodes: int = 512
    panel_nodes: int = 8
    max_panel_nodes: int = 64
    cache: KernelCache = field(default_factory=KernelCache)

    def __post_init__(self) -> None:
        if self.n_max < DEFAULT_N_MAX:
            raise ParameterError(f"n_max must be at least {DEFAULT_N_MAX}, got {self.n_max}")
        require_positive("tolerance", self.tol)

    @property
    def max_poisson_order(self) -> int:
        """Highest Poisson time derivative with an analytic transfer formula."""

        return 2 * self.n_max

    def heat_values(self, t: float, xs: np.ndarray, ys: np.ndarray, order: int = 0) -> FloatArray:
        """``d_t**order h_t(x, y)`` for broadcastable point arrays ``(..., N)``."""

        require_positive("t", t)
        require_order(order, self.n_max)
        xs_array, ys_array = _pair_arrays(self.rs, xs, ys)
        log_h = _log_heat(self.rs, np.asarray(t, dtype=np.float64), xs_array, ys_array, self.cache)
        values = np.exp(log_h)
        if order == 0:
            return values
        ratio = _time_ratios(self.rs, np.asarray(t, dtype=np.float64), xs_array, ys_array, order, self.cache)
        return values * ratio

    def poisson_values(
        self,
        t: float,
        xs: np.ndarray,
        ys: np.ndarray,
        order: int = 0,
        tol: float | None = None,
    ) -> FloatArray:
        """``d_t**order p_t(x, y)`` for broadcastable point arrays ``(..., N)``.

        Raises:
            UnsupportedOrderError: Above ``2 * n_max + 2``.
            IntegrationError: If the subordination quadrature misses ``tol``.
        """

        require_positive("t", t)
        require_order(order, self.max_poisson_order + FD_EXTRA_ORDERS)
        xs_array, ys_array = _pair_arrays(self.rs, xs, ys)
        if order > self.max_poisson_order:
            extra = order - self.max_poisson_order
            logger.debug("Poisson order %d: finite differences on top of order %d", order, order - extra)
            return richardson_derivative(
                lambda s: self.poisson_values(s, xs_array, ys_array, order - extra, tol),
                t,
                extra,
            )
        shape = np.broadcast_shapes(xs_array.shape, ys_array.shape)
        flat_x = np.broadcast_to(xs_array, shape).reshape(-1, self.rs.dimension)
        flat_y = np.broadcast_to(ys_array, shape).reshape(-1, self.rs.dimension)
        target = self.tol if tol is None else tol
        if self.subordination is SubordinationRule.GAUSS_LAGUERRE:
            values = _subordinate_laguerre(self, t, flat_x, flat_y, order, target)
        else:
            values = _subordinate_panels(self, t, flat_x, flat_y, order, target)
        return values.reshape(shape[:-1])


def _pair_arrays(rs: RootSystem, xs: PointLike, ys: PointLike) -> tuple[FloatArray, FloatArray]:
    xs_array = np.asarray(xs, dtype=np.float64)
    ys_array = np.asarray(ys, dtype=np.float64)
    if rs.dimension == 1:
        if xs_array.ndim == 0 or xs_array.shape[-1] != 1:
            xs_array = xs_array[..., None]
        if ys_array.ndim == 0 or ys_array.shape[-1] != 1:
            ys_array = ys_array[..., None]
    if xs_array.shape[-1] != rs.dimension or ys_array.shape[-1] != rs.dimension:
        raise ParameterError(f"Kernel arguments need {rs.dimension} coordinates")
    return xs_array, ys_array


def _envelope(rs: RootSystem, xs: np.ndarray, ys: np.ndarray) -> FloatArray:
    """Squared distance in the Gaussian factor that survives the kernel split."""

    total = np.zeros(np.broadcast_shapes(xs.shape, ys.shape)[:-1])
    for j, k_j in enumerate(rs.k):
        if k_j == 0:
            total = total + (xs[..., j] - ys[..., j]) ** 2
        else:
            total = total + (np.abs(xs[..., j]) - np.abs(ys[..., j])) ** 2
    return total


def _log_heat(
    rs: RootSystem,
    s: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    cache: KernelCache | None,
) -> FloatArray:
    log_h = (
        -np.log(rs.c_k)
        - 0.5 * rs.homogeneous_dimension * np.log(2.0 * s)
        - _envelope(rs, xs, ys) / (4.0 * s)
    )
    for j, k_j in enumerate(rs.k):
        if k_j != 0:
            log_h = log_h + rank_one_log_E_scaled(xs[..., j] * ys[..., j] / (2.0 * s), k_j, cache)
    return log_h


def _lah(n: int, j: int) -> int:
    return math.comb(n - 1, j - 1) * math.factorial(n) // math.factorial(j)


def _time_ratios(
    rs: RootSystem,
    s: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    order: int,
    cache: KernelCache | None,
) -> FloatArray:
    """``d_s**order h_s / h_s`` through derivatives of ``log h`` in ``u = 1/s``."""

    p = 0.5 * rs.homogeneous_dimension
    shape = np.broadcast_shapes(s.shape, xs.shape[:-1], ys.shape[:-1])
    psi = [np.zeros(shape) for _ in range(order)]
    psi[0] = psi[0] + p * s
    for n in range(2, order + 1):
        psi[n - 1] = psi[n - 1] + (-1) ** (n - 1) * math.factorial(n - 1) * p * s**n
    for j, k_j in enumerate(rs.k):
        x_j, y_j = xs[..., j], ys[..., j]
        if k_j == 0:
            psi[0] = psi[0] - 0.25 * (x_j - y_j) ** 2
            continue
        b = 0.5 * x_j * y_j
        z = b / s
        logs = rank_one_log_derivatives(z, k_j, order, cache)
        psi[0] = psi[0] - 0.25 * (np.abs(x_j) - np.abs(y_j)) ** 2 + b * (logs[0] - np.sign(z))
        for n in range(2, order + 1):
            psi[n - 1] = psi[n - 1] + b**n * logs[n - 1]
    bell: list[np.ndarray] = [np.ones(shape)]
    for n in range(order):
        bell.append(sum(math.comb(n, i) * bell[n - i] * psi[i] for i in range(n + 1)))
    total = np.zeros(shape)
    for j in range(1, order + 1):
        total = total + _lah(order, j) * s ** (-order - j) * bell[j]
    return (-1) ** order * total


def _transfer_factor(order: int, t: float, u: np.ndarray) -> tuple[int, float, np.ndarray | float]:
    """Heat order, sign and extra factor of the Poisson derivative transfer."""

    n, odd = divmod(order, 2)
    sign = -1.0 if n % 2 else 1.0
    if odd:
        return n + 1, sign, t / (2.0 * u)
    return n, sign, 1.0


def _subordinate_panels(
    ke: KernelEvaluator,
    t: float,
    xs: FloatArray,
    ys: FloatArray,
    order: int,
    tol: float,
) -> FloatArray:
    rs = ke.rs
    dimension = rs.homogeneous_dimension
    radius_squared = float(np.max(np.sum(xs**2, axis=-1) + np.sum(ys**2, axis=-1))) + t * t
    lower = t * t / radius_squared * (1e-2 * tol) ** (2.0 / (dimension + 1.0))
    upper = 50.0 + 5.0 * order + dimension

    def integrand(u: FloatArray) -> FloatArray:
        column = u[:, None]
        s = t * t / (4.0 * column)
        heat_order, sign, extra = _transfer_factor(order, t, column)
        log_terms = -column - 0.5 * np.log(column) + _log_heat(rs, s, xs[None], ys[None], ke.cache)
        values = sign * np.exp(log_terms) * extra
        if heat_order:
            values = values * _time_ratios(rs, s, xs[None], ys[None], heat_order, ke.cache)
        return values / np.sqrt(np.pi)

    result = log_panel_integrate(
        integrand, lower, upper, tol, nodes=ke.panel_nodes, max_nodes=ke.max_panel_nodes,
    )
    return np.asarray(result.value)


def _subordinate_laguerre(
    ke: KernelEvaluator,
    t: float,
    xs: FloatArray,
    ys: FloatArray,
    order: int,
    tol: float,
) -> FloatArray:
    """Scaled Gauss-Laguerre rule with weight ``u**((N - 1) / 2) e**-u``.

    Each pair uses ``u = v / c`` with ``c = 1 + d**2 / t**2``; for ``k = 0``
    the rule then integrates the kernel exactly.
    """

    rs = ke.rs
    alpha = 0.5 * (rs.homogeneous_dimension - 1.0)
    scale = 1.0 + _envelope(rs, xs, ys) / (t * t)

    def evaluate(n: int) -> tuple[FloatArray, FloatArray]:
        rule = gauss_laguerre(alpha, n)
        v = np.asarray(rule.nodes)[:, None]
        u = v / scale[None, :]
        s = t * t / (4.0 * u)
        heat_order, sign, extra = _transfer_factor(order, t, u)
        with np.errstate(divide="ignore"):
            log_terms = (
                np.log(np.asarray(rule.weights))[:, None]
                + (v - u)
                - 0.5 * rs.homogeneous_dimension * np.log(u)
                + _log_heat(rs, s, xs[None], ys[None], ke.cache)
                - (alpha + 1.0) * np.log(scale)[None, :]
            )
        terms = np.exp(log_terms) * extra
        if heat_order:
            terms = terms * _time_ratios(rs, s, xs[None], ys[None], heat_order, ke.cache)
        return sign * terms.sum(axis=0) / np.sqrt(np.pi), np.abs(terms).sum(axis=0) / np.sqrt(np.pi)

    n = ke.laguerre_nodes
    previous, _ = evaluate(n)
    while True:
        n *= 2
        current, magnitude = evaluate(n)
        error = float(np.max(np.abs(current - previous) / np.maximum(magnitude, np.finfo(float).tiny)))
        if error <= tol:
            return current
        if 2 * n > ke.max_laguerre_nodes:
            raise IntegrationError(
                f"Subordination did not converge with {n} Gauss-Laguerre nodes",
                float(current.ravel()[0]),
                error,
            )
        logger.debug("Subordination: doubling Laguerre nodes to %d (change %.3g)", 2 * n, error)
        previous = current


def richardson_derivative(
    func: Callable[[float], Any],
    t: float,
    order: int,
    step: float | None = None,
) -> Any:
    """Central finite difference of order 1 or 2 with one Richardson level.

    The step defaults to ``t * 1e-3``.
    """

    if order not in (1, 2):
        raise UnsupportedOrderError(f"Finite differences are provided for orders 1 and 2, got {order}")
    h = t * RICHARDSON_STEP if step is None else step

    def central(width: float) -> Any:
        if order == 1:
            return (np.asarray(func(t + width)) - np.asarray(func(t - width))) / (2.0 * width)
        return (
            np.asarray(func(t + width)) - 2.0 * np.asarray(func(t)) + np.asarray(func(t - width))
        ) / width**2

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


# ---------------------------------------------------------------------------
# Point operations
# ---------------------------------------------------------------------------


def heat_kernel(ke: KernelEvaluator, t: float, x: PointLike, y: PointLike) -> float:
    """Heat kernel ``h_t(x, y)``, strictly positive and symmetric."""

    return float(ke.heat_values(t, as_point(x, ke.rs.dimension), as_point(y, ke.rs.dimension)))


def heat_time_derivative(ke: KernelEvaluator, n: int, t: float, x: PointLike, y: PointLike) -> float:
    """``d_t**n h_t(x, y)`` for ``0 <= n <= ke.n_max``.

    Raises:
        UnsupportedOrderError: If ``n > ke.n_max``.
    """

    require_order(n, ke.n_max)
    return float(
        ke.heat_values(t, as_point(x, ke.rs.dimension), as_point(y, ke.rs.dimension), order=n),
    )


def poisson_kernel(
    ke: KernelEvaluator,
    t: float,
    x: PointLike,
    y: PointLike,
    tol: float | None = None,
) -> float:
    """Poisson kernel ``p_t(x, y)`` by subordination of the heat kernel."""

    return float(
        ke.poisson_values(t, as_point(x, ke.rs.dimension), as_point(y, ke.rs.dimension), 0, tol),
    )


def poisson_time_derivative(
    ke: KernelEvaluator,
    m: int,
    t: float,
    x: PointLike,
    y: PointLike,
    tol: float | None = None,
) -> float:
    """``d_t**m p_t(x, y)``.

    Orders up to ``2 * n_max`` use the even/odd transfer formulas; the next
    two orders add Richardson-extrapolated finite differences in ``t``.
    """

    return float(
        ke.poisson_values(t, as_point(x, ke.rs.dimension), as_point(y, ke.rs.dimension), m, tol),
    )


def heat_function(ke: KernelEvaluator, t: float) -> FunctionHandle:
    """The radial function ``x -> h_t(x, 0)`` with its integrability data."""

    require_positive("t", t)
    rs = ke.rs
    peak = float(np.exp(-np.log(rs.c_k) - 0.5 * rs.homogeneous_dimension * np.log(2.0 * t)))

    def profile(r: FloatArray) -> FloatArray:
        radius = np.asarray(r, dtype=np.float64)
        return peak * np.exp(-(radius**2) / (4.0 * t))

    def evaluator(points: FloatArray) -> FloatArray:
        return profile(np.linalg.norm(points, axis=-1))

    def tail_radius(tol: float) -> float:
        tail = min(0.5 * tol, 0.5)
        return float(np.sqrt(4.0 * t * special.gammainccinv(0.5 * rs.homogeneous_dimension, tail)))

    return FunctionHandle(
        name=f"heat_kernel(t={t:g})",
        dimension=rs.dimension,
        evaluator=evaluator,
        is_radial=True,
        sup_norm=peak,
        radial_profile=profile,
        tail_radius=tail_radius,
    )


# ---------------------------------------------------------------------------
# Semigroup actions
# ---------------------------------------------------------------------------


def _spectral_action(
    rs: RootSystem,
    f: FunctionHandle,
    m: int,
    t: float,
    points: FloatArray,
    mode: KernelMode,
) -> FloatArray:
    total = np.zeros(points.shape[0])
    for item in f.spectral_for(rs) or ():
        lam = item.frequency
        if mode is KernelMode.POISSON:
            multiplier = (-lam) ** m * np.exp(-t * lam)
        else:
            multiplier = (-(lam**2)) ** m * np.exp(-t * lam**2)
        if multiplier != 0.0:
            total = total + multiplier * item.evaluate(rs, points)
    return total


def _quadrature_action(
    ke: KernelEvaluator,
    f: FunctionHandle,
    m: int,
    t: float,
    points: FloatArray,
    mode: KernelMode,
    tol: float,
) -> FloatArray:
    rs = ke.rs
    xs = points[:, 0]
    kernel_tol = min(ke.tol, 1e-2 * tol)

    def integrand(y: float) -> FloatArray:
        column = np.full((xs.size, 1), y)
        if mode is KernelMode.HEAT:
            kernel = ke.heat_values(t, points, column, order=m)
        else:
            kernel = ke.poisson_values(t, points, column, order=m, tol=kernel_tol)
        density = f.evaluate(np.array([[y]]))[0] * weight_array(rs, np.array([[y]]))[0]
        return kernel * density

    width = np.sqrt(t) if mode is KernelMode.HEAT else t
    radius = float(np.max(np.abs(xs))) + 10.0 * width + 1.0
    if mode is KernelMode.HEAT:
        pieces = [(-np.inf, -radius), (-radius, radius), (radius, np.inf)]
        budget = tol * (1.0 + (f.sup_norm or 0.0) * t ** (-m)) / len(pieces)
        limit = 2000
    else:
        # Oscillating tails against an algebraically decaying kernel never settle; cut them off.
        outer = _poisson_truncation_radius(rs.k[0], m, t, xs, radius, (f.sup_norm or 0.0), tol / 2.0)
        pieces = [(-outer, -radius), (-radius, radius), (radius, outer)]
        budget = tol / (2.0 * len(pieces))
        limit = POISSON_QUAD_LIMIT
    total = np.zeros(xs.size)
    for lower, upper in pieces:
        if upper <= lower:
            continue
        result = adaptive_integrate_vector(integrand, lower, upper, budget, points=[0.0], limit=limit)
        total = total + np.asarray(result.value)
    return total


def poisson_tail_mass(k: float, m: int, t: float, x: float, radius: float) -> float:
    """Bound on ``int_{|y| > radius} |d_t**m p_t(x, y)| dw(y)`` in rank one.

    ``|E_k(x, y)| <= e**(|x| |y|)`` gives ``p_t(x, y) <= p_t(0, |y| - |x|)``,
    and the tail of ``p_t(0, .)`` is the regularized incomplete beta function
    ``I_{t**2 / (t**2 + rho**2)}(1/2, k + 1/2)`` with ``rho = radius - |x|``.
    Time derivatives add the Cauchy factor ``m! (4/t)**m A_k`` from the disc
    ``|tau - t| <= t/4``, on which ``|p_tau| <= A_k p_t(0, .)``.

    Raises:
        ParameterError: Unless ``radius > |x|``.
    """

    require_positive("t", t)
    rho = radius - abs(x)
    if rho <= 0:
        raise ParameterError(f"Tail radius {radius:g} must exceed |x| = {abs(x):g}")
    mass = float(special.betainc(0.5, k + 0.5, t * t / (t * t + rho * rho)))
    mass *= (1.0 + abs(x) / rho) ** (2.0 * k)
    if m > 0:
        cauchy = 1.25 * math.sqrt(2.0) * 1.25 * 2.0 ** (k + 1.0)
        mass *= math.factorial(m) * (4.0 / t) ** m * cauchy
    return mass


def _poisson_truncation_radius(
    k: float,
    m: int,
    t: float,
    xs: FloatArray,
    start: float,
    sup_norm: float,
    budget: float,
) -> float:
    """Smallest doubling of ``start`` whose Poisson tail stays within ``budget``."""

    x_max = float(np.max(np.abs(xs)))
    radius = start
    bound = math.inf
    while radius <= MAX_POISSON_RADIUS:
        bound = sup_norm * poisson_tail_mass(k, m, t, x_max, radius)
        if bound <= budget:
            logger.debug("Poisson action truncated at R=%.3g (tail bound %.3g)", radius, bound)
            return radius
        radius *= 2.0
    raise TruncationError(
        f"Poisson tails do not fall below {budget:.3g} before R={MAX_POISSON_RADIUS:g}",
        0.0,
        float(bound),
    )


def apply_semigroup_grid(
    ke: KernelEvaluator,
    f: FunctionHandle,
    m: int,
    t: float,
    xs: np.ndarray,
    tol: float = 1e-8,
    mode: KernelMode | None = None,
) -> FloatArray:
    """``d_t**m`` of the Poisson (or heat) extension of ``f`` on a batch of points.

    Functions carrying spectral data for ``ke.rs`` are handled exactly through
    the multipliers ``(-lambda)**m e**(-t lambda)`` (Poisson) and
    ``(-lambda**2)**m e**(-t lambda**2)`` (heat). Other functions are
    integrated against the kernel over the line (rank one only); Poisson
    integrals stop at the radius where :func:`poisson_tail_mass` times the
    sup norm of ``f`` uses up half of ``tol``.

    Raises:
        ParameterError: If ``f`` is unbounded or lacks a sup-norm bound, or if a
            non-spectral ``f`` is given in rank above one.
        UnsupportedOrderError: If ``m`` exceeds the supported order.
        TruncationError: If no radius below ``MAX_POISSON_RADIUS`` bounds the tails.
    """

    chosen = ke.mode if mode is None else mode
    if not f.is_bounded or f.sup_norm is None:
        raise ParameterError(f"{f.name} must be bounded with a known sup norm")
    require_positive("t", t)
    limit = ke.n_max if chosen is KernelMode.HEAT else ke.max_poisson_order + FD_EXTRA_ORDERS
    require_order(m, limit)
    points = as_points(xs, ke.rs.dimension)
    if f.spectral_for(ke.rs) is not None:
        return _spectral_action(ke.rs, f, m, t, points, chosen)
    if ke.rs.dimension != 1:
        raise ParameterError(f"{f.name}: quadrature semigroup actions are implemented in rank one")
    return _quadrature_action(ke, f, m, t, points, chosen, tol)


def apply_semigroup(
    ke: KernelEvaluator,
    f: FunctionHandle,
    m: int,
    t: float,
    x: PointLike,
    tol: float = 1e-8,
    mode: KernelMode | None = None,
) -> float:
    """``d_t**m P_t f(x)`` (or the heat analogue when ``mode`` is heat)."""

    point = as_point(x, ke.rs.dimension)
    return float(apply_semigroup_grid(ke, f, m, t, point[None, :], tol, mode)[0])


def semigroup_function(
    ke: KernelEvaluator,
    f: FunctionHandle,
    t: float,
    tol: float = 1e-8,
    mode: KernelMode | None = None,
) -> FunctionHandle:
    """``P_t f`` (or ``H_t f``) as a function handle, so that actions compose."""

    chosen = ke.mode if mode is None else mode
    modes = f.spectral_for(ke.rs)
    if modes is not None:
        scaled = []
        for item in modes:
            lam = item.frequency
            exponent = lam if chosen is KernelMode.POISSON else lam**2
            scaled.append(SpectralMode(item.kind, lam, item.amplitude * np.exp(-t * exponent), item.axis))
        return mode_function(ke.rs, scaled, f"{chosen.value}_{t:g}({f.name})", f.tail_radius)

    def evaluator(points: FloatArray) -> FloatArray:
        return apply_semigroup_grid(ke, f, 0, t, points, tol, chosen)

    return FunctionHandle(
        name=f"{chosen.value}_{t:g}({f.name})",
        dimension=f.dimension,
        evaluator=evaluator,
        is_radial=f.is_radial,
        sup_norm=f.sup_norm,
    )


def convergence_rate(
    ke: KernelEvaluator,
    f: FunctionHandle,
    times: Sequence[float],
    xs: np.ndarray,
    tol: float = 1e-8,
) -> FloatArray:
    """``max_x |P_t f(x) - f(x)|`` for each sample time."""

    points = as_points(xs, ke.rs.dimension)
    values = f.evaluate(points)
    return np.array(
        [float(np.max(np.abs(apply_semigroup_grid(ke, f, 0, t, points, tol) - values))) for t in times],
    )


def gaussian_envelope(rs: RootSystem, t: float, x: PointLike, y: PointLike, tol: float = 1e-8) -> float:
    """``V(x, y, sqrt t)**-1 exp(-d(x, y)**2 / t)`` with ``V`` the larger ball volume."""

    require_positive("t", t)
    radius = float(np.sqrt(t))
    volume = max(ball_volume(rs, x, radius, tol), ball_volume(rs, y, radius, tol))
    return float(np.exp(-orbit_distance(rs, x, y) ** 2 / t) / volume)


EXPORT_COLUMNS = ("k", "t", "x", "y", "h", "dh1", "dh2", "p", "dp1", "dp2")


def export_kernel_rows(
    ke: KernelEvaluator,
    times: Sequence[float],
    xs: Sequence[float],
    ys: Sequence[float],
    tol: float | None = None,
) -> list[dict[str, float]]:
    """Kernel table rows for every ``(t, x, y)`` in rank one.

    Columns are :data:`EXPORT_COLUMNS`.
    """

    if ke.rs.dimension != 1:
        raise ParameterError("Kernel export is defined for rank one")
    k = ke.rs.k[0]
    x_grid, y_grid = np.meshgrid(np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64), indexing="ij")
    x_flat, y_flat = x_grid.ravel(), y_grid.ravel()
    rows: list[dict[str, float]] = []
    for t in times:
        # One coordinate per row, so a lone pair is not read as a single point of length one.
        heat = [ke.heat_values(t, x_flat[:, None], y_flat[:, None], order=n) for n in range(3)]
        poisson = [ke.poisson_values(t, x_flat[:, None], y_flat[:, None], order=n, tol=tol) for n in range(3)]
        for index in range(x_flat.size):
            rows.append(
                {
                    "k": k,
                    "t": float(t),
                    "x": float(x_flat[index]),
                    "y": float(y_flat[index]),
                    "h": float(heat[0][index]),
                    "dh1": float(heat[1][index]),
                    "dh2": float(heat[2][index]),
                    "p": float(poisson[0][index]),
                    "dp1": float(poisson[1][index]),
                    "dp2": float(poisson[2][index]),
                },
            )
    logger.info("Exported %d kernel rows for k=%g", len(rows), k)
    return rows


__all__ = [
    "EXPORT_COLUMNS",
    "KernelEvaluator",
    "KernelMode",
    "SubordinationRule",
    "TimeGrid",
    "apply_semigroup",
    "apply_semigroup_grid",
    "convergence_rate",
    "export_kernel_rows",
    "gaussian_envelope",
    "heat_function",
    "heat_kernel",
    "heat_time_derivative",
    "poisson_kernel",
    "poisson_tail_mass",
    "poisson_time_derivative",
    "richardson_derivative",
    "semigroup_function",
]
