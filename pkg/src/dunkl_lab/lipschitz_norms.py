"""Estimators of inhomogeneous Lipschitz norms and their comparison reports.

All suprema are maxima over explicit grids, so every estimate is a lower bound
of the norm it approximates. Four estimators are provided:

* classical difference quotients ``|f(x) - f(x')| / |x - x'|**beta``;
* Zygmund second differences ``|f(x + y) + f(x - y) - 2 f(x)| / |y|**beta``;
* the Poisson semigroup form ``sup_t t**(m - beta) sup_x |d_t**m P_t f(x)|``;
* the heat semigroup form ``sup_t t**(m - beta/2) sup_x |d_t**m H_t f(x)|``.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from scipy import special
from scipy.spatial.distance import pdist

from .base import FloatArray, ParameterError, require_positive
from .corpus import CorpusFunction, build_corpus
from .dunkl_kernel import FunctionHandle, SpectralMode, dunkl_apply, mode_function
from .heat_poisson import (
    KernelEvaluator,
    KernelMode,
    TimeGrid,
    apply_semigroup_grid,
    convergence_rate,
)
from .quadrature import adaptive_laguerre
from .root_system import make_product_z2

logger = logging.getLogger(__name__)

DEFAULT_BAND = (1.0 / 50.0, 50.0)
FIT_WINDOW = (1e-3, 1e-1)
NOISE_FLOOR = 1e-12


class NormKind(Enum):
    """Estimator families."""

    CLASSICAL = "classical"
    ZYGMUND = "zygmund"
    POISSON = "poisson_semigroup"
    HEAT = "heat_semigroup"
    DERIVATIVE_SPLIT = "derivative_split"


@dataclass(frozen=True)
class SpaceGrid:
    """Sample points on ``[-half_width, half_width]``.

    The uniform part has ``points`` nodes; ``cluster_points`` more nodes sit at
    ``±half_width * 2**-j`` and one at the origin to resolve cusps there. Each
    refinement inserts the midpoints of the uniform part, so refined grids
    contain the coarse ones exactly. In rank ``N > 1`` the nodes are laid out
    along the first axis and along the diagonal.
    """

    half_width: float = math.pi
    points: int = 512
    cluster_points: int = 64
    refinements: int = 0

    def __post_init__(self) -> None:
        require_positive("half_width", self.half_width)
        if self.points < 2:
            raise ParameterError(f"A space grid needs at least 2 points, got {self.points}")
        if self.cluster_points < 0 or self.cluster_points % 2:
            raise ParameterError(f"cluster_points must be even and non-negative, got {self.cluster_points}")

    def nodes(self) -> FloatArray:
        """Sorted one-dimensional nodes."""

        uniform = np.linspace(-self.half_width, self.half_width, self.points)
        for _ in range(self.refinements):
            midpoints = 0.5 * (uniform[:-1] + uniform[1:])
            merged = np.empty(uniform.size + midpoints.size)
            merged[0::2] = uniform
            merged[1::2] = midpoints
            uniform = merged
        depth = self.cluster_points // 2
        cluster = self.half_width * 2.0 ** -np.arange(1, depth + 1)
        return np.unique(np.concatenate([uniform, cluster, -cluster, [0.0]]))

    def offsets(self) -> FloatArray:
        """Positive nodes, used as second-difference steps."""

        nodes = self.nodes()
        return nodes[nodes > 0]

    def directions(self, dimension: int) -> FloatArray:
        """Unit directions the nodes are laid out along."""

        if dimension == 1:
            return np.ones((1, 1))
        axis = np.zeros(dimension)
        axis[0] = 1.0
        return np.stack([axis, np.full(dimension, 1.0 / np.sqrt(dimension))])

    def samples(self, dimension: int) -> FloatArray:
        """Sample points of shape ``(P, dimension)``."""

        nodes = self.nodes()
        points = np.concatenate([nodes[:, None] * d[None, :] for d in self.directions(dimension)])
        return np.unique(points, axis=0)

    def refined(self) -> SpaceGrid:
        """Grid with the uniform spacing halved."""

        return SpaceGrid(self.half_width, self.points, self.cluster_points, self.refinements + 1)

    def size(self, dimension: int = 1) -> int:
        """Number of sample points."""

        return int(self.samples(dimension).shape[0])

    def to_config(self) -> dict[str, Any]:
        """Serialize to a configuration block."""

        return {"half_width": self.half_width, "points": self.points, "cluster_points": self.cluster_points}

    @classmethod
    def from_config(cls, block: Mapping[str, Any]) -> SpaceGrid:
        """Build a space grid from a configuration block."""

        return cls(
            half_width=float(block.get("half_width", math.pi)),
            points=int(block.get("points", 512)),
            cluster_points=int(block.get("cluster_points", 64)),
        )


@dataclass(frozen=True)
class NormEstimate:
    """One grid estimate of an inhomogeneous Lipschitz norm.

    Attributes:
        kind: Estimator family.
        value: ``sup_norm + seminorm``.
        sup_norm: Grid maximum of ``|f|``.
        seminorm: The difference or semigroup part.
        beta: Smoothness exponent.
        m: Derivative order used by semigroup kinds, ``0`` otherwise.
        grid_points: Number of space samples.
        pairs: Number of difference pairs or ``(t, x)`` samples.
        t_min: Smallest sample time (semigroup kinds).
        t_max: Largest sample time (semigroup kinds).
        tolerance: Quadrature tolerance of the semigroup actions.
        attained_at_t_min: The time supremum sits on the smallest sample
            time, the indicator of a divergent norm.
    """

    kind: NormKind
    value: float
    sup_norm: float
    seminorm: float
    beta: float
    m: int = 0
    grid_points: int = 0
    pairs: int = 0
    t_min: float | None = None
    t_max: float | None = None
    tolerance: float | None = None
    attained_at_t_min: bool = False


def smallest_order_above(beta: float) -> int:
    """``floor(beta) + 1``, the smallest integer exceeding ``beta``."""

    return int(math.floor(beta)) + 1


def _grid_sup(f: FunctionHandle, points: FloatArray) -> float:
    return float(np.max(np.abs(f.evaluate(points))))


def classical_lip_norm(f: FunctionHandle, beta: float, grid: SpaceGrid) -> NormEstimate:
    """``sup|f| + max |f(x) - f(x')| / |x - x'|**beta`` over grid pairs.

    ``beta = 1`` gives the Lipschitz quotient, used to exhibit functions that
    are Zygmund but not Lipschitz.

    Raises:
        ParameterError: Unless ``0 < beta <= 1``.
    """

    if not 0 < beta <= 1:
        raise ParameterError(f"Classical quotients need 0 < beta <= 1, got {beta}")
    points = grid.samples(f.dimension)
    if points.shape[0] < 2:
        raise ParameterError("The space grid is empty")
    values = f.evaluate(points)
    distances = pdist(points)
    differences = pdist(values[:, None])
    seminorm = float(np.max(differences / distances**beta))
    sup = float(np.max(np.abs(values)))
    return NormEstimate(
        NormKind.CLASSICAL,
        sup + seminorm,
        sup,
        seminorm,
        beta,
        grid_points=points.shape[0],
        pairs=distances.size,
    )


def zygmund_seminorm(f: FunctionHandle, beta: float, grid: SpaceGrid) -> NormEstimate:
    """``sup|f| + max |f(x + y) + f(x - y) - 2 f(x)| / |y|**beta``.

    ``x`` runs over the grid samples and ``y`` over the positive grid nodes
    along each layout direction.

    Raises:
        ParameterError: Unless ``0 < beta < 2``.
    """

    if not 0 < beta < 2:
        raise ParameterError(f"Zygmund quotients need 0 < beta < 2, got {beta}")
    points = grid.samples(f.dimension)
    offsets = grid.offsets()
    if points.shape[0] == 0 or offsets.size == 0:
        raise ParameterError("The space grid is empty")
    center = f.evaluate(points)
    seminorm = 0.0
    pairs = 0
    for direction in grid.directions(f.dimension):
        steps = offsets[:, None] * direction[None, :]
        forward = f.evaluate((points[:, None, :] + steps[None, :, :]).reshape(-1, f.dimension))
        backward = f.evaluate((points[:, None, :] - steps[None, :, :]).reshape(-1, f.dimension))
        second = (forward + backward).reshape(points.shape[0], offsets.size) - 2.0 * center[:, None]
        seminorm = max(seminorm, float(np.max(np.abs(second) / offsets[None, :] ** beta)))
        pairs += second.size
    sup = float(np.max(np.abs(center)))
    return NormEstimate(
        NormKind.ZYGMUND,
        sup + seminorm,
        sup,
        seminorm,
        beta,
        grid_points=points.shape[0],
        pairs=pairs,
    )


def _partial_handle(f: FunctionHandle, axes: tuple[int, ...]) -> FunctionHandle:
    derivative = f.partial(axes)
    if derivative is None:
        raise ParameterError(f"{f.name} has no derivative data along {axes}")
    return FunctionHandle(name=f"d{axes}({f.name})", dimension=f.dimension, evaluator=derivative)


def higher_order_classical_norm(
    f: FunctionHandle,
    beta: float,
    grid: SpaceGrid,
    n: int | None = None,
) -> NormEstimate:
    """Derivative-split norm for ``beta > 1``.

    ``sum_{|g| < n} sup|d^g f| + sum_{|g| = n} ||d^g f||`` where the top
    derivatives are measured with difference quotients at ``beta - n``
    (classical below one, Zygmund at exactly one). ``n`` defaults to
    ``floor(beta)``, or ``beta - 1`` for integer ``beta``.

    Raises:
        ParameterError: If ``beta <= 1`` or derivative data is missing.
    """

    if beta <= 1:
        raise ParameterError(f"The derivative split needs beta > 1, got {beta}")
    order = n if n is not None else (int(beta) - 1 if float(beta).is_integer() else int(math.floor(beta)))
    remainder = beta - order
    if order < 1 or not 0 < remainder <= 1:
        raise ParameterError(f"Order {order} does not split beta={beta}")
    if order > 2:
        raise ParameterError("Derivative data is available up to order two")
    points = grid.samples(f.dimension)
    sup_part = _grid_sup(f, points)
    total = sup_part
    pairs = 0
    for level in range(1, order + 1):
        for axes in itertools.combinations_with_replacement(range(f.dimension), level):
            derivative = _partial_handle(f, axes)
            if level < order:
                total += _grid_sup(derivative, points)
                continue
            if remainder < 1:
                estimate = classical_lip_norm(derivative, remainder, grid)
            else:
                estimate = zygmund_seminorm(derivative, remainder, grid)
            total += estimate.value
            pairs += estimate.pairs
    return NormEstimate(
        NormKind.DERIVATIVE_SPLIT,
        total,
        sup_part,
        total - sup_part,
        beta,
        m=order,
        grid_points=points.shape[0],
        pairs=pairs,
    )


def derivative_profile(
    ke: KernelEvaluator,
    f: FunctionHandle,
    m: int,
    times: Sequence[float],
    grid: SpaceGrid,
    tol: float,
    mode: KernelMode = KernelMode.POISSON,
) -> FloatArray:
    """``F(t) = max_x |d_t**m S_t f(x)|`` for each time, ``S`` heat or Poisson."""

    points = grid.samples(ke.rs.dimension)
    return np.array(
        [float(np.max(np.abs(apply_semigroup_grid(ke, f, m, t, points, tol, mode)))) for t in times],
    )


def _semigroup_norm(
    ke: KernelEvaluator,
    f: FunctionHandle,
    beta: float,
    scale: float,
    m: int,
    time_grid: TimeGrid,
    grid: SpaceGrid,
    tol: float,
    mode: KernelMode,
    profile: FloatArray | None,
) -> NormEstimate:
    times = time_grid.times
    values = derivative_profile(ke, f, m, times, grid, tol, mode) if profile is None else profile
    weighted = times ** (m - scale) * values
    best = int(np.argmax(weighted))
    points = grid.samples(ke.rs.dimension)
    sup = _grid_sup(f, points)
    seminorm = float(weighted[best])
    kind = NormKind.POISSON if mode is KernelMode.POISSON else NormKind.HEAT
    return NormEstimate(
        kind,
        sup + seminorm,
        sup,
        seminorm,
        beta,
        m=m,
        grid_points=points.shape[0],
        pairs=points.shape[0] * times.size,
        t_min=time_grid.t_min,
        t_max=time_grid.t_max,
        tolerance=tol,
        attained_at_t_min=best == 0 and seminorm > NOISE_FLOOR,
    )


def semigroup_norm_poisson(
    ke: KernelEvaluator,
    f: FunctionHandle,
    beta: float,
    time_grid: TimeGrid,
    grid: SpaceGrid,
    tol: float = 1e-8,
    m: int | None = None,
    profile: FloatArray | None = None,
) -> NormEstimate:
    """``sup|f| + max_t t**(m - beta) max_x |d_t**m P_t f(x)|``.

    Args:
        ke: Kernel evaluator for the root system.
        f: Bounded function.
        beta: Smoothness exponent.
        time_grid: Sample times.
        grid: Sample points.
        tol: Tolerance of each semigroup action.
        m: Derivative order, any integer above ``beta``; defaults to the
            smallest one.
        profile: Precomputed ``max_x |d_t**m P_t f|`` on ``time_grid``.

    Raises:
        ParameterError: If ``m <= beta``.
    """

    require_positive("beta", beta)
    order = smallest_order_above(beta) if m is None else m
    if order <= beta:
        raise ParameterError(f"The derivative order must exceed beta, got m={order}, beta={beta}")
    return _semigroup_norm(ke, f, beta, beta, order, time_grid, grid, tol, KernelMode.POISSON, profile)


def semigroup_norm_heat(
    ke: KernelEvaluator,
    f: FunctionHandle,
    beta: float,
    time_grid: TimeGrid,
    grid: SpaceGrid,
    tol: float = 1e-8,
    m: int | None = None,
    profile: FloatArray | None = None,
) -> NormEstimate:
    """``sup|f| + max_t t**(m - beta/2) max_x |d_t**m H_t f(x)|``, ``m > beta / 2``."""

    require_positive("beta", beta)
    order = smallest_order_above(beta / 2.0) if m is None else m
    if order <= beta / 2.0:
        raise ParameterError(f"The derivative order must exceed beta/2, got m={order}, beta={beta}")
    return _semigroup_norm(ke, f, beta, beta / 2.0, order, time_grid, grid, tol, KernelMode.HEAT, profile)


@dataclass(frozen=True)
class DecayFit:
    """Least-squares power law fitted to a sampled profile.

    Attributes:
        slope: Exponent fitted to the dyadic increments ``|F(t) - F(2t)|``.
        intercept: Intercept of that fit in log-log scale.
        residual: Root mean square residual of the fit.
        raw_slope: Exponent fitted to ``F`` itself.
        degenerate: All increments were below the noise floor.
        samples: Number of sample times used.
    """

    slope: float
    intercept: float
    residual: float
    raw_slope: float
    degenerate: bool
    samples: int


def _fit_power(times: FloatArray, values: FloatArray, increments: FloatArray) -> DecayFit:
    positive = increments > NOISE_FLOOR * max(float(np.max(np.abs(values))), NOISE_FLOOR)
    log_t = np.log(times)
    raw = np.polyfit(log_t, np.log(np.maximum(np.abs(values), np.finfo(float).tiny)), 1)
    if positive.sum() < 2:
        logger.warning("Decay fit is degenerate: increments below the noise floor")
        return DecayFit(math.nan, math.nan, math.nan, float(raw[0]), True, int(times.size))
    coefficients, residuals, *_ = np.polyfit(log_t[positive], np.log(increments[positive]), 1, full=True)
    rms = float(np.sqrt(residuals[0] / positive.sum())) if residuals.size else 0.0
    return DecayFit(
        float(coefficients[0]),
        float(coefficients[1]),
        rms,
        float(raw[0]),
        False,
        int(positive.sum()),
    )


def decay_exponent_fit(
    ke: KernelEvaluator,
    f: FunctionHandle,
    m: int,
    time_grid: TimeGrid,
    grid: SpaceGrid,
    tol: float = 1e-8,
    window: tuple[float, float] = FIT_WINDOW,
) -> DecayFit:
    """Fit ``max_x |d_t**m P_t f| ~ t**(beta - m)`` for ``t`` in ``window``.

    The slope is read from ``|F(t) - F(2t)|``, which removes the bounded part
    that low frequencies contribute; the raw slope of ``F`` is kept alongside.

    Raises:
        ParameterError: If ``m < 1`` or the window holds fewer than 3 times.
    """

    if m < 1:
        raise ParameterError(f"Decay fits need m >= 1, got {m}")
    times = time_grid.window(*window)
    if times.size < 3:
        raise ParameterError(f"Only {times.size} sample times fall in {window}")
    values = derivative_profile(ke, f, m, times, grid, tol)
    doubled = derivative_profile(ke, f, m, 2.0 * times, grid, tol)
    fit = _fit_power(times, values, np.abs(values - doubled))
    logger.debug("Decay fit for %s, m=%d: slope %.4f (raw %.4f)", f.name, m, fit.slope, fit.raw_slope)
    return fit


def convergence_exponent(
    ke: KernelEvaluator,
    f: FunctionHandle,
    time_grid: TimeGrid,
    grid: SpaceGrid,
    tol: float = 1e-8,
    window: tuple[float, float] = FIT_WINDOW,
) -> DecayFit:
    """Fit ``max_x |P_t f - f| ~ t**beta`` for ``t`` in ``window``."""

    times = time_grid.window(*window)
    if times.size < 3:
        raise ParameterError(f"Only {times.size} sample times fall in {window}")
    points = grid.samples(ke.rs.dimension)
    values = convergence_rate(ke, f, times, points, tol)
    return _fit_power(times, values, values)


# ---------------------------------------------------------------------------
# Bessel potentials
# ---------------------------------------------------------------------------


def bessel_potential_function(
    ke: KernelEvaluator,
    f: FunctionHandle,
    gamma: float,
    tol: float = 1e-8,
) -> FunctionHandle:
    """``J**gamma f = (I - Delta_k)**(-gamma/2) f`` as a function handle.

    Spectral inputs are scaled mode by mode with ``(1 + lambda**2)**(-gamma/2)``.
    Other inputs are integrated as
    ``Gamma(gamma/2)**-1 int t**(gamma/2 - 1) e**-t H_t f dt``
    with an adaptive Gauss-Laguerre rule (rank one).
    """

    require_positive("gamma", gamma)
    modes = f.spectral_for(ke.rs)
    name = f"bessel_{gamma:g}({f.name})"
    if modes is not None:
        scaled = [
            SpectralMode(mode.kind, mode.frequency, mode.amplitude * (1.0 + mode.frequency**2) ** (-gamma / 2.0), mode.axis)
            for mode in modes
        ]
        return mode_function(ke.rs, scaled, name, f.tail_radius)
    if ke.rs.dimension != 1:
        raise ParameterError(f"{f.name}: quadrature Bessel potentials are implemented in rank one")
    alpha = gamma / 2.0 - 1.0
    normalization = special.gamma(gamma / 2.0)

    def evaluator(points: np.ndarray) -> FloatArray:
        def integrand(nodes: FloatArray) -> FloatArray:
            return np.stack(
                [apply_semigroup_grid(ke, f, 0, float(t), points, tol, KernelMode.HEAT) for t in nodes],
            )

        result = adaptive_laguerre(integrand, alpha, tol, start_nodes=16, max_nodes=256)
        return np.asarray(result.value) / normalization

    return FunctionHandle(name=name, dimension=f.dimension, evaluator=evaluator, sup_norm=f.sup_norm)


def bessel_potential_apply(
    ke: KernelEvaluator,
    f: FunctionHandle,
    gamma: float,
    x: Any,
    tol: float = 1e-8,
) -> float:
    """``(J**gamma f)(x)``, the Dunkl convolution of ``f`` with the Bessel kernel."""

    return bessel_potential_function(ke, f, gamma, tol)(x)


# ---------------------------------------------------------------------------
# Derivative and equivalence reports
# ---------------------------------------------------------------------------


def dunkl_derivative_function(
    ke: KernelEvaluator,
    f: FunctionHandle,
    j: int,
    grid: SpaceGrid | None = None,
) -> FunctionHandle:
    """``D_j f`` as a function handle.

    Spectral inputs map mode by mode. Otherwise every evaluation goes through
    :func:`dunkl_apply` and the declared bound is the maximum over ``grid``.
    """

    modes = f.spectral_for(ke.rs)
    name = f"D{j}({f.name})"
    if modes is not None and all(mode.dunkl_derivative(j) is not None for mode in modes):
        derived = [mode.dunkl_derivative(j) for mode in modes]
        return mode_function(ke.rs, [mode for mode in derived if mode is not None], name)

    def evaluator(points: np.ndarray) -> FloatArray:
        return np.array([dunkl_apply(ke.rs, f, j, point) for point in points])

    handle = FunctionHandle(name=name, dimension=f.dimension, evaluator=evaluator)
    bound = _grid_sup(handle, (grid or SpaceGrid()).samples(f.dimension))
    return FunctionHandle(name=name, dimension=f.dimension, evaluator=evaluator, sup_norm=bound)


@dataclass(frozen=True)
class DerivativeReport:
    """Norms of ``f`` and of its Dunkl derivatives one order lower."""

    base: NormEstimate
    poisson: tuple[NormEstimate, ...]
    heat: tuple[NormEstimate, ...]

    @property
    def ratios(self) -> dict[str, float]:
        """Each derivative norm divided by the norm of ``f``."""

        result = {}
        for j, (poisson, heat) in enumerate(zip(self.poisson, self.heat, strict=True)):
            result[f"poisson_D{j}"] = _ratio(poisson, self.base)
            result[f"heat_D{j}"] = _ratio(heat, self.base)
        return result


def derivative_norm_check(
    ke: KernelEvaluator,
    f: FunctionHandle,
    beta: float,
    time_grid: TimeGrid,
    grid: SpaceGrid,
    tol: float = 1e-8,
) -> DerivativeReport:
    """Compare ``||D_j f||`` at ``beta - 1`` with ``||f||`` at ``beta``.

    Raises:
        ParameterError: If ``beta <= 1``.
        HyperplaneSingularityError: From :func:`dunkl_apply`.
    """

    if beta <= 1:
        raise ParameterError(f"Derivative checks need beta > 1, got {beta}")
    base = semigroup_norm_poisson(ke, f, beta, time_grid, grid, tol)
    poisson = []
    heat = []
    for j in range(ke.rs.dimension):
        derivative = dunkl_derivative_function(ke, f, j, grid)
        poisson.append(semigroup_norm_poisson(ke, derivative, beta - 1.0, time_grid, grid, tol))
        heat.append(semigroup_norm_heat(ke, derivative, beta - 1.0, time_grid, grid, tol))
    return DerivativeReport(base, tuple(poisson), tuple(heat))


def _ratio(numerator: NormEstimate, denominator: NormEstimate) -> float:
    if denominator.value == 0.0:
        return 1.0 if numerator.value == 0.0 else math.inf
    return numerator.value / denominator.value


@dataclass(frozen=True)
class EquivalenceRow:
    """All estimates for one ``(function, k, beta)`` and their ratios to Poisson."""

    function: str
    k: float
    beta: float
    estimates: Mapping[NormKind, NormEstimate]
    ratios: Mapping[str, float]
    band: tuple[float, float] = DEFAULT_BAND
    flagged: bool = False

    def to_records(self) -> list[dict[str, Any]]:
        """Flat report records, one per estimator."""

        records = []
        for kind, estimate in self.estimates.items():
            records.append(
                {
                    "function": self.function,
                    "k": self.k,
                    "beta": self.beta,
                    "estimator": kind.value,
                    "value": estimate.value,
                    "m": estimate.m,
                    "t_min": estimate.t_min if estimate.t_min is not None else "",
                    "t_max": estimate.t_max if estimate.t_max is not None else "",
                    "grid_points": estimate.grid_points,
                    "flag": int(self.flagged),
                },
            )
        return records


REPORT_COLUMNS = ("function", "k", "beta", "estimator", "value", "m", "t_min", "t_max", "grid_points", "flag")


@dataclass
class EquivalenceSettings:
    """Grids, tolerances and evaluator options shared by a report."""

    time_grid: TimeGrid = field(default_factory=TimeGrid)
    space_grid: SpaceGrid = field(default_factory=SpaceGrid)
    tol: float = 1e-8
    band: tuple[float, float] = DEFAULT_BAND
    dimension: int = 1
    n_max: int = 3
    threads: int = 1


def _rows_for_function(
    ke: KernelEvaluator,
    member: CorpusFunction,
    betas: Sequence[float],
    settings: EquivalenceSettings,
) -> list[EquivalenceRow]:
    f = member.handle
    k = ke.rs.k[0]
    profiles: dict[tuple[KernelMode, int], FloatArray] = {}
    times = settings.time_grid.times

    def profile(mode: KernelMode, m: int) -> FloatArray:
        if (mode, m) not in profiles:
            profiles[(mode, m)] = derivative_profile(ke, f, m, times, settings.space_grid, settings.tol, mode)
        return profiles[(mode, m)]

    rows = []
    for beta in betas:
        m_poisson = smallest_order_above(beta)
        m_heat = smallest_order_above(beta / 2.0)
        poisson = semigroup_norm_poisson(
            ke, f, beta, settings.time_grid, settings.space_grid, settings.tol,
            profile=profile(KernelMode.POISSON, m_poisson),
        )
        estimates: dict[NormKind, NormEstimate] = {NormKind.POISSON: poisson}
        estimates[NormKind.HEAT] = semigroup_norm_heat(
            ke, f, beta, settings.time_grid, settings.space_grid, settings.tol,
            profile=profile(KernelMode.HEAT, m_heat),
        )
        if beta < 1:
            estimates[NormKind.CLASSICAL] = classical_lip_norm(f, beta, settings.space_grid)
        if beta < 2:
            estimates[NormKind.ZYGMUND] = zygmund_seminorm(f, beta, settings.space_grid)
        ratios = {
            f"{kind.value}/{NormKind.POISSON.value}": _ratio(estimate, poisson)
            for kind, estimate in estimates.items()
            if kind is not NormKind.POISSON
        }
        lower, upper = settings.band
        flagged = any(not lower <= ratio <= upper for ratio in ratios.values())
        if flagged:
            logger.warning("%s at k=%g, beta=%g: ratio outside [%g, %g]: %s", f.name, k, beta, lower, upper, ratios)
        rows.append(EquivalenceRow(f.name, k, beta, estimates, ratios, settings.band, flagged))
    return rows


def equivalence_report(
    corpus: Sequence[str] | Callable[[Any], Sequence[CorpusFunction]],
    betas: Sequence[float],
    k_values: Sequence[float],
    settings: EquivalenceSettings | None = None,
    params: Mapping[str, Mapping[str, Any]] | None = None,
) -> list[EquivalenceRow]:
    """Cross-compare the four estimators over ``corpus x beta x k``.

    Out-of-band ratios are flagged, never raised. Rows come back ordered by
    ``k``, then corpus member, then ``beta``, whatever the thread count.

    Args:
        corpus: Corpus member names, or a callable building members for a
            root system.
        betas: Smoothness exponents.
        k_values: Multiplicities, one rank-``settings.dimension`` system each.
        settings: Grids and tolerances.
        params: Member parameters for :func:`build_corpus`.

    Raises:
        ParameterError: If ``betas`` is empty.
    """

    if not betas:
        raise ParameterError("The beta list is empty")
    settings = settings or EquivalenceSettings()
    tasks = []
    for k in k_values:
        rs = make_product_z2(settings.dimension, k)
        ke = KernelEvaluator(rs, n_max=settings.n_max)
        members = build_corpus(rs, corpus, params) if not callable(corpus) else list(corpus(rs))
        tasks.extend((ke, member) for member in members)
    logger.info("Equivalence report: %d functions x %d exponents", len(tasks), len(betas))
    with ThreadPoolExecutor(max_workers=max(1, settings.threads)) as executor:
        chunks = list(executor.map(lambda task: _rows_for_function(task[0], task[1], betas, settings), tasks))
    return [row for chunk in chunks for row in chunk]


def inclusion_ratio(
    ke: KernelEvaluator,
    f: FunctionHandle,
    beta_low: float,
    beta_high: float,
    time_grid: TimeGrid,
    grid: SpaceGrid,
    tol: float = 1e-8,
) -> float:
    """``||f||_{beta_low} / ||f||_{beta_high}`` in the Poisson form, bounded for ``beta_low < beta_high``."""

    if not beta_low < beta_high:
        raise ParameterError(f"Expected beta_low < beta_high, got {beta_low}, {beta_high}")
    low = semigroup_norm_poisson(ke, f, beta_low, time_grid, grid, tol)
    high = semigroup_norm_poisson(ke, f, beta_high, time_grid, grid, tol)
    return _ratio(low, high)


__all__ = [
    "DEFAULT_BAND",
    "FIT_WINDOW",
    "REPORT_COLUMNS",
    "DecayFit",
    "DerivativeReport",
    "EquivalenceRow",
    "EquivalenceSettings",
    "NormEstimate",
    "NormKind",
    "SpaceGrid",
    "bessel_potential_apply",
    "bessel_potential_function",
    "classical_lip_norm",
    "convergence_exponent",
    "decay_exponent_fit",
    "derivative_norm_check",
    "derivative_profile",
    "dunkl_derivative_function",
    "equivalence_report",
    "higher_order_classical_norm",
    "inclusion_ratio",
    "semigroup_norm_heat",
    "semigroup_norm_poisson",
    "smallest_order_above",
    "zygmund_seminorm",
]
