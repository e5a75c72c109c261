"""Dunkl operators, the Dunkl kernel, transform, translations and convolution.

Everything here is specific to the product group Z2^N, where the Dunkl kernel
factors over coordinates::

    E(x, y) = prod_j E_{k_j}(x_j y_j)

and the rank-one kernel is

    E_k(z) = j_{k-1/2}(iz) + z / (2k + 1) * j_{k+1/2}(iz),

with ``j_mu`` the normalized Bessel function ``0F1(; mu + 1; -z**2 / 4)``.
Its Taylor coefficients satisfy ``a_n (n + 2k [n odd]) = a_{n-1}``, which is
the defining equation ``D E = E`` read off term by term; the series is both the
small-argument route and the certification oracle of the Bessel route.
"""

from __future__ import annotations

import logging
import math
import threading
from collections.abc import Callable, Hashable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special

from .base import (
    FloatArray,
    HyperplaneSingularityError,
    IntegrationError,
    ParameterError,
    PointLike,
    as_point,
    as_points,
    require_positive,
)
from .quadrature import adaptive_integrate, gauss_jacobi
from .root_system import RootSystem, weight_array

logger = logging.getLogger(__name__)

SERIES_RADIUS = 4.0
SERIES_TERMS = 80
DEFAULT_FD_STEP = 1e-5
HYPERPLANE_ATOL = 0.0

LaurentPolynomial = dict[int, float]
VectorField = Callable[[FloatArray], FloatArray]


class KernelCache:
    """Memoizes coefficient tables and quadrature rules.

    Cached values are computed by the same code path as uncached ones, so
    switching the cache off never changes a result. Access is guarded by a
    lock, so one cache can be shared between worker threads.
    """

    def __init__(self, rs: RootSystem | None = None, enabled: bool = True) -> None:
        self.rs = rs
        self.enabled = enabled
        self._lock = threading.Lock()
        self._store: dict[Hashable, Any] = {}

    def get(self, key: Hashable, factory: Callable[[], Any]) -> Any:
        """Return the cached value for ``key``, computing it on first use."""

        if not self.enabled:
            return factory()
        with self._lock:
            if key in self._store:
                return self._store[key]
        value = factory()
        with self._lock:
            return self._store.setdefault(key, value)

    def __len__(self) -> int:
        with self._lock:
            return len(self._store)


_DEFAULT_CACHE = KernelCache()


def _cache(cache: KernelCache | None) -> KernelCache:
    return _DEFAULT_CACHE if cache is None else cache


# ---------------------------------------------------------------------------
# Rank-one kernel
# ---------------------------------------------------------------------------


def series_coefficients(k: float, terms: int = SERIES_TERMS) -> FloatArray:
    """Taylor coefficients ``a_n`` of the rank-one Dunkl kernel ``E_k``."""

    coefficients = np.empty(terms)
    coefficients[0] = 1.0
    for n in range(1, terms):
        coefficients[n] = coefficients[n - 1] / (n + 2.0 * k * (n % 2))
    return coefficients


def rank_one_series_E(z: PointLike, k: float, terms: int = SERIES_TERMS) -> Any:
    """Evaluate ``E_k(z)`` by summing its power series.

    This is the oracle for the defining equation ``D_z E_k(z) = E_k(z)``,
    ``E_k(0) = 1``; accurate for moderate ``|z|``. Complex ``z`` is accepted.
    """

    return npoly.polyval(np.asarray(z), series_coefficients(k, terms))


def normalized_bessel(mu: float, z: PointLike) -> Any:
    """Normalized Bessel function ``j_mu(z) = Gamma(mu + 1) (z/2)**-mu J_mu(z)``.

    ``hyp0f1`` is used for ``|z| < 1`` and ``jv`` beyond, where the
    hypergeometric series loses digits; ``j_{-1/2}`` is ``cos`` exactly.
    """

    z_array = np.asarray(z, dtype=np.float64)
    if mu == -0.5:
        return np.cos(z_array)
    flat = np.atleast_1d(np.abs(z_array)).ravel()
    result = np.empty_like(flat)
    small = flat < 1.0
    result[small] = special.hyp0f1(mu + 1.0, -0.25 * flat[small] ** 2)
    large = flat[~small]
    result[~small] = np.exp(special.gammaln(mu + 1.0) - mu * np.log(0.5 * large)) * special.jv(mu, large)
    return result.reshape(z_array.shape)


def _laurent_derivative(p: LaurentPolynomial) -> LaurentPolynomial:
    return {power - 1: coefficient * power for power, coefficient in p.items() if power}


def _laurent_combine(*terms: tuple[float, int, LaurentPolynomial]) -> LaurentPolynomial:
    """Sum of ``factor * z**shift * p`` over the given triples."""

    result: LaurentPolynomial = {}
    for factor, shift, p in terms:
        for power, coefficient in p.items():
            result[power + shift] = result.get(power + shift, 0.0) + factor * coefficient
    return {power: value for power, value in result.items() if value != 0.0}


def _laurent_eval(p: LaurentPolynomial, z: np.ndarray) -> np.ndarray:
    total = np.zeros_like(z)
    for power, coefficient in p.items():
        total = total + coefficient * z**power
    return total


def derivative_tables(
    k: float,
    order: int,
) -> tuple[list[LaurentPolynomial], list[LaurentPolynomial]]:
    """Laurent coefficients with ``E^(n) = A_n e + B_n o``.

    Here ``e`` and ``o`` are the even and odd parts of ``E_k``; they obey
    ``e' = o`` and ``o' = e - 2k o / z``.
    """

    a_tables: list[LaurentPolynomial] = [{0: 1.0}]
    b_tables: list[LaurentPolynomial] = [{0: 1.0}]
    for _ in range(order):
        a, b = a_tables[-1], b_tables[-1]
        a_tables.append(_laurent_combine((1.0, 0, _laurent_derivative(a)), (1.0, 0, b)))
        b_tables.append(
            _laurent_combine(
                (1.0, 0, _laurent_derivative(b)),
                (1.0, 0, a),
                (-2.0 * k, -1, b),
            ),
        )
    return a_tables, b_tables


def _scaled_parts(z: np.ndarray, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Even and odd parts of ``E_k`` times ``exp(-|z|)``, for ``|z| > 0``."""

    nu = k - 0.5
    magnitude = np.abs(z)
    prefactor = np.exp(special.gammaln(nu + 1.0) - nu * np.log(0.5 * magnitude))
    even = prefactor * special.ive(nu, magnitude)
    odd = np.sign(z) * prefactor * special.ive(nu + 1.0, magnitude)
    return even, odd


def rank_one_log_E_scaled(z: PointLike, k: float, cache: KernelCache | None = None) -> Any:
    """``log E_k(z) - |z|`` for real ``z``.

    The result is non-positive and varies slowly for ``k > 0``; subtracting
    ``|z|`` before exponentiating keeps heat kernels finite for tiny times.
    """

    z_array = np.asarray(z, dtype=np.float64)
    flat = np.atleast_1d(z_array).ravel()
    if k == 0:
        return (flat - np.abs(flat)).reshape(z_array.shape)
    result = np.empty_like(flat)
    small = np.abs(flat) <= SERIES_RADIUS
    if np.any(small):
        coefficients = _cache(cache).get(("series", k), lambda: series_coefficients(k))
        result[small] = np.log(npoly.polyval(flat[small], coefficients)) - np.abs(flat[small])
    if np.any(~small):
        even, odd = _scaled_parts(flat[~small], k)
        result[~small] = np.log(even + odd)
    return result.reshape(z_array.shape)


def rank_one_log_E(z: PointLike, k: float, cache: KernelCache | None = None) -> Any:
    """Logarithm of the (positive) rank-one kernel ``E_k(z)`` for real ``z``."""

    return rank_one_log_E_scaled(z, k, cache) + np.abs(np.asarray(z, dtype=np.float64))


def rank_one_E(z: PointLike, k: float, cache: KernelCache | None = None) -> Any:
    """Rank-one Dunkl kernel ``E_k(z)`` for real ``z``."""

    return np.exp(rank_one_log_E(z, k, cache))


def rank_one_log_derivatives(
    z: PointLike,
    k: float,
    order: int,
    cache: KernelCache | None = None,
) -> FloatArray:
    """Derivatives ``(log E_k)^(n)(z)`` for ``n = 1..order``.

    Returns:
        Array of shape ``(order,) + z.shape``.
    """

    z_array = np.asarray(z, dtype=np.float64)
    flat = np.atleast_1d(z_array).ravel()
    logs = np.zeros((order, flat.size))
    if k == 0:
        if order:
            logs[0] = 1.0
        return logs.reshape((order, *z_array.shape))
    ratios = np.empty((order + 1, flat.size))
    ratios[0] = 1.0
    small = np.abs(flat) <= SERIES_RADIUS
    store = _cache(cache)
    if np.any(small):
        coefficients = store.get(("series", k), lambda: series_coefficients(k))
        values = npoly.polyval(flat[small], coefficients)
        for n in range(1, order + 1):
            ratios[n, small] = npoly.polyval(flat[small], npoly.polyder(coefficients, n)) / values
    if np.any(~small):
        large = flat[~small]
        a_tables, b_tables = store.get(("laurent", k, order), lambda: derivative_tables(k, order))
        even, odd = _scaled_parts(large, k)
        total = even + odd
        for n in range(1, order + 1):
            ratios[n, ~small] = (
                _laurent_eval(a_tables[n], large) * even
                + _laurent_eval(b_tables[n], large) * odd
            ) / total
    for n in range(1, order + 1):
        value = ratios[n].copy()
        for i in range(1, n):
            value -= math.comb(n - 1, i - 1) * logs[i - 1] * ratios[n - i]
        logs[n - 1] = value
    return logs.reshape((order, *z_array.shape))


def rank_one_ode_residual(z: PointLike, k: float, cache: KernelCache | None = None) -> Any:
    """Relative residual of ``E'(z) + k (E(z) - E(-z)) / z = E(z)``, ``z != 0``.

    Computed in log form as ``(log E)' + k (1 - E(-z) / E(z)) / z - 1``.
    """

    z_array = np.asarray(z, dtype=np.float64)
    if np.any(z_array == 0):
        raise ParameterError("The difference quotient of the kernel equation is undefined at z = 0")
    slope = rank_one_log_derivatives(z_array, k, 1, cache)[0]
    reflected = np.exp(rank_one_log_E(-z_array, k, cache) - rank_one_log_E(z_array, k, cache))
    return np.abs(slope + k * (1.0 - reflected) / z_array - 1.0)


def rank_one_E_imag(z: PointLike, k: float) -> Any:
    """Rank-one kernel on the imaginary axis, ``E_k(i z)`` for real ``z``."""

    z_array = np.asarray(z, dtype=np.float64)
    even = normalized_bessel(k - 0.5, z_array)
    odd = z_array / (2.0 * k + 1.0) * normalized_bessel(k + 0.5, z_array)
    return even + 1j * odd


def dunkl_kernel_E(rs: RootSystem, x: PointLike, y: PointLike, cache: KernelCache | None = None) -> float:
    """Dunkl kernel ``E(x, y)`` for real arguments.

    Symmetric in ``(x, y)``, equal to 1 when either argument vanishes and to
    ``exp(<x, y>)`` when ``k`` is identically zero.
    """

    point_x = as_point(x, rs.dimension)
    point_y = as_point(y, rs.dimension)
    return float(np.exp(log_dunkl_kernel(rs, point_x[None, :], point_y[None, :], cache)[0]))


def log_dunkl_kernel(
    rs: RootSystem,
    xs: np.ndarray,
    ys: np.ndarray,
    cache: KernelCache | None = None,
) -> FloatArray:
    """Vectorized ``log E(x, y)`` for broadcastable point arrays ``(..., N)``."""

    products = np.asarray(xs, dtype=np.float64) * np.asarray(ys, dtype=np.float64)
    total = np.zeros(products.shape[:-1])
    for j, k_j in enumerate(rs.k):
        total = total + rank_one_log_E(products[..., j], k_j, cache)
    return total


def dunkl_kernel_E_imag(rs: RootSystem, x: PointLike, xi: PointLike) -> complex:
    """Dunkl kernel ``E(x, i xi)`` for real ``x`` and ``xi``."""

    products = as_point(x, rs.dimension) * as_point(xi, rs.dimension)
    return complex(np.prod([rank_one_E_imag(p, k) for p, k in zip(products, rs.k, strict=True)]))


# ---------------------------------------------------------------------------
# Spectral modes and function handles
# ---------------------------------------------------------------------------


class ModeKind(Enum):
    """Families of bounded eigenfunctions of the Dunkl Laplacian."""

    COS = "cos"
    SIN = "sin"
    RADIAL = "radial"


@dataclass(frozen=True)
class SpectralMode:
    """A bounded eigenfunction of ``Delta_k`` with eigenvalue ``-frequency**2``.

    ``COS`` and ``SIN`` are the even and odd parts of ``x -> E(i frequency x_axis)``
    in one coordinate; ``RADIAL`` is ``j_{N/2 - 1}(frequency |x|)`` with ``N`` the
    homogeneous dimension. For ``k = 0`` these are the classical cosine, sine
    and spherical Bessel waves.
    """

    kind: ModeKind
    frequency: float
    amplitude: float = 1.0
    axis: int = 0

    def __post_init__(self) -> None:
        if self.frequency < 0:
            raise ParameterError(f"Mode frequency must be non-negative, got {self.frequency}")

    def evaluate(self, rs: RootSystem, points: FloatArray) -> FloatArray:
        """Evaluate the mode at points of shape ``(P, N)``."""

        return self.amplitude * self._shape(rs, points, 0)

    def partial(self, rs: RootSystem, points: FloatArray, axes: tuple[int, ...]) -> FloatArray:
        """Classical partial derivative along ``axes`` (order at most two)."""

        if len(axes) > 2:
            raise ParameterError("Mode derivatives are available up to order two")
        if self.kind is ModeKind.RADIAL:
            return self.amplitude * self._radial_partial(rs, points, axes)
        if any(axis != self.axis for axis in axes):
            return np.zeros(points.shape[0])
        return self.amplitude * self._shape(rs, points, len(axes))

    def dunkl_derivative(self, axis: int) -> SpectralMode | None:
        """``D_axis`` of the mode as a mode, ``None`` when it is not one.

        ``D cos = -lambda sin`` and ``D sin = lambda cos`` on the mode's axis;
        other axes annihilate the mode.
        """

        if self.kind is ModeKind.RADIAL:
            return None
        if axis != self.axis:
            return SpectralMode(self.kind, self.frequency, 0.0, self.axis)
        if self.kind is ModeKind.COS:
            return SpectralMode(ModeKind.SIN, self.frequency, -self.frequency * self.amplitude, axis)
        return SpectralMode(ModeKind.COS, self.frequency, self.frequency * self.amplitude, axis)

    def _shape(self, rs: RootSystem, points: FloatArray, order: int) -> FloatArray:
        lam = self.frequency
        if self.kind is ModeKind.RADIAL:
            mu = rs.homogeneous_dimension / 2.0 - 1.0
            return normalized_bessel(mu, lam * np.linalg.norm(points, axis=-1))
        k = rs.k[self.axis]
        z = lam * points[:, self.axis]
        nu = k - 0.5
        j1 = normalized_bessel(nu + 1.0, z)
        if self.kind is ModeKind.COS:
            if order == 0:
                return normalized_bessel(nu, z)
            if order == 1:
                return -lam * z / (2 * k + 1) * j1
            return -(lam**2) / (2 * k + 1) * (j1 - z**2 / (2 * k + 3) * normalized_bessel(nu + 2.0, z))
        if order == 0:
            return z / (2 * k + 1) * j1
        if order == 1:
            return lam / (2 * k + 1) * (j1 - z**2 / (2 * k + 3) * normalized_bessel(nu + 2.0, z))
        return (lam**2) / (2 * k + 1) * (
            -3 * z / (2 * k + 3) * normalized_bessel(nu + 2.0, z)
            + z**3 / ((2 * k + 3) * (2 * k + 5)) * normalized_bessel(nu + 3.0, z)
        )

    def _radial_partial(self, rs: RootSystem, points: FloatArray, axes: tuple[int, ...]) -> FloatArray:
        lam = self.frequency
        mu = rs.homogeneous_dimension / 2.0 - 1.0
        r = np.linalg.norm(points, axis=-1)
        if not axes:
            return normalized_bessel(mu, lam * r)
        first = -(lam**2) / (2 * mu + 2) * normalized_bessel(mu + 1.0, lam * r)
        if len(axes) == 1:
            return first * points[:, axes[0]]
        i, j = axes
        second = (lam**4) / ((2 * mu + 2) * (2 * mu + 4)) * normalized_bessel(mu + 2.0, lam * r)
        return first * float(i == j) + second * points[:, i] * points[:, j]


@dataclass(frozen=True)
class FunctionHandle:
    """An evaluable real function on ``R^N`` with regularity metadata.

    Attributes:
        name: Label used in reports.
        dimension: Number of coordinates of the domain.
        evaluator: Vectorized ``(P, N) -> (P,)`` evaluation.
        is_radial: ``f(x)`` depends only on ``|x|``.
        is_bounded: ``f`` is bounded.
        sup_norm: Known bound on ``|f|``, if any.
        gradient: Vectorized ``(P, N) -> (P, N)`` classical gradient.
        partials: Classical partial derivatives keyed by the sorted tuple of
            differentiation axes, e.g. ``(0, 0)`` for the second derivative.
        radial_profile: ``r -> f(r e_1)`` for radial functions.
        tail_radius: Maps a tolerance to a radius beyond which the
            ``L1(dw)`` tail of ``f`` is below half that tolerance; ``None``
            marks ``f`` as not integrable.
        modes: Spectral decomposition into Dunkl eigenmodes, exact for the
            root system whose multiplicities are ``modes_k``.
        modes_k: Multiplicities the modes were built for.
    """

    name: str
    dimension: int
    evaluator: VectorField
    is_radial: bool = False
    is_bounded: bool = True
    sup_norm: float | None = None
    gradient: VectorField | None = None
    partials: Mapping[tuple[int, ...], VectorField] = field(default_factory=dict)
    radial_profile: Callable[[FloatArray], FloatArray] | None = None
    tail_radius: Callable[[float], float] | None = None
    modes: tuple[SpectralMode, ...] | None = None
    modes_k: tuple[float, ...] | None = None

    def __call__(self, x: PointLike) -> float:
        """Evaluate at a single point."""

        return float(self.evaluate(as_point(x, self.dimension)[None, :])[0])

    def evaluate(self, points: np.ndarray) -> FloatArray:
        """Evaluate at points of shape ``(P, N)`` (flat arrays allowed for N = 1)."""

        return np.asarray(self.evaluator(as_points(points, self.dimension)), dtype=np.float64)

    def partial(self, axes: tuple[int, ...]) -> VectorField | None:
        """Classical partial derivative along ``axes``, if known."""

        key = tuple(sorted(axes))
        if not key:
            return self.evaluate
        if key in self.partials:
            return self.partials[key]
        if len(key) == 1 and self.gradient is not None:
            gradient = self.gradient
            return lambda points: gradient(points)[:, key[0]]
        return None

    def spectral_for(self, rs: RootSystem) -> tuple[SpectralMode, ...] | None:
        """The mode decomposition if it was built for ``rs``."""

        if self.modes is None or self.modes_k != rs.k:
            return None
        return self.modes

    def check_radial(self, rng: np.random.Generator, samples: int = 16) -> bool:
        """Spot-check radial symmetry on random sign flips and rotations."""

        points = rng.normal(size=(samples, self.dimension))
        values = self.evaluate(points)
        flipped = self.evaluate(points * rng.choice([-1.0, 1.0], size=points.shape))
        if not np.allclose(values, flipped, rtol=1e-10, atol=1e-12):
            return False
        if self.dimension > 1:
            q, _ = np.linalg.qr(rng.normal(size=(self.dimension, self.dimension)))
            rotated = self.evaluate(points @ q.T)
            return bool(np.allclose(values, rotated, rtol=1e-10, atol=1e-12))
        return True

    def check_sup_norm(self, points: np.ndarray, slack: float = 1e-12) -> bool:
        """Whether sampled ``|f|`` respects the declared ``sup_norm``."""

        if self.sup_norm is None:
            return True
        return bool(np.max(np.abs(self.evaluate(points))) <= self.sup_norm + slack)


def mode_function(
    rs: RootSystem,
    modes: Sequence[SpectralMode],
    name: str,
    tail_radius: Callable[[float], float] | None = None,
) -> FunctionHandle:
    """Wrap a finite sum of spectral modes as a :class:`FunctionHandle`."""

    frozen = tuple(mode for mode in modes if mode.amplitude != 0.0)

    def evaluator(points: FloatArray) -> FloatArray:
        total = np.zeros(points.shape[0])
        for mode in frozen:
            total = total + mode.evaluate(rs, points)
        return total

    def make_partial(axes: tuple[int, ...]) -> VectorField:
        def derivative(points: FloatArray) -> FloatArray:
            total = np.zeros(points.shape[0])
            for mode in frozen:
                total = total + mode.partial(rs, points, axes)
            return total

        return derivative

    partials: dict[tuple[int, ...], VectorField] = {}
    for i in range(rs.dimension):
        partials[(i,)] = make_partial((i,))
        for j in range(i, rs.dimension):
            partials[(i, j)] = make_partial((i, j))

    def gradient(points: FloatArray) -> FloatArray:
        return np.stack([partials[(i,)](points) for i in range(rs.dimension)], axis=-1)

    def along_first_axis(r: FloatArray) -> FloatArray:
        points = np.zeros((np.size(r), rs.dimension))
        points[:, 0] = np.ravel(r)
        return evaluator(points)

    radial = bool(frozen) and all(mode.kind is ModeKind.RADIAL for mode in frozen)
    profile: Callable[[FloatArray], FloatArray] | None = along_first_axis if radial else None

    return FunctionHandle(
        name=name,
        dimension=rs.dimension,
        evaluator=evaluator,
        is_radial=radial or not frozen,
        sup_norm=float(sum(abs(mode.amplitude) for mode in frozen)),
        gradient=gradient,
        partials=partials,
        radial_profile=profile,
        tail_radius=tail_radius,
        modes=frozen,
        modes_k=rs.k,
    )


# ---------------------------------------------------------------------------
# Dunkl operators
# ---------------------------------------------------------------------------


def _partial_at(f: FunctionHandle, axes: tuple[int, ...], point: FloatArray, step: float) -> float:
    derivative = f.partial(axes)
    if derivative is not None:
        return float(derivative(point[None, :])[0])
    if len(axes) == 1:
        shift = np.zeros_like(point)
        shift[axes[0]] = step
        return (f(point + shift) - f(point - shift)) / (2 * step)
    if len(axes) == 2 and axes[0] == axes[1]:
        shift = np.zeros_like(point)
        shift[axes[0]] = step
        return (f(point + shift) - 2 * f(point) + f(point - shift)) / step**2
    raise ParameterError(f"No derivative data for axes {axes}")


def dunkl_apply(
    rs: RootSystem,
    f: FunctionHandle,
    j: int,
    x: PointLike,
    step: float = DEFAULT_FD_STEP,
) -> float:
    """Apply the Dunkl operator ``D_j`` to ``f`` at ``x``.

    For Z2^N the operator reads ``d_j f(x) + k_j (f(x) - f(sigma_j x)) / x_j``.
    On the hyperplane ``x_j = 0`` the difference quotient is replaced by its
    limit ``2 d_j f(x)``, which needs analytic derivative data.

    Raises:
        HyperplaneSingularityError: On the hyperplane without derivative data.
    """

    if not 0 <= j < rs.dimension:
        raise ParameterError(f"Coordinate index {j} out of range for rank {rs.dimension}")
    point = as_point(x, rs.dimension)
    k_j = rs.k[j]
    has_derivative = f.partial((j,)) is not None
    if point[j] == HYPERPLANE_ATOL and k_j != 0:
        if not has_derivative:
            raise HyperplaneSingularityError(
                f"{f.name}: x_{j} = 0 lies on a reflection hyperplane and no derivative is known",
            )
        return (1.0 + 2.0 * k_j) * _partial_at(f, (j,), point, step)
    derivative = _partial_at(f, (j,), point, step)
    if k_j == 0:
        return derivative
    reflected = point.copy()
    reflected[j] = -reflected[j]
    return derivative + k_j * (f(point) - f(reflected)) / point[j]


def dunkl_laplacian_apply(
    rs: RootSystem,
    f: FunctionHandle,
    x: PointLike,
    step: float = 1e-4,
) -> float:
    """Apply ``Delta_k = sum_j D_j**2`` through its differential-difference form.

    ``Delta_k f = Delta f + sum_j k_j (2 d_j f / x_j - (f - f o sigma_j) / x_j**2)``,
    with the limit ``(1 + 2 k_j) d_j**2 f`` on the hyperplane ``x_j = 0``.
    """

    point = as_point(x, rs.dimension)
    total = 0.0
    for j, k_j in enumerate(rs.k):
        second = _partial_at(f, (j, j), point, step)
        if k_j == 0:
            total += second
        elif point[j] == 0:
            if f.partial((j, j)) is None:
                raise HyperplaneSingularityError(
                    f"{f.name}: second derivative needed on the hyperplane x_{j} = 0",
                )
            total += (1.0 + 2.0 * k_j) * second
        else:
            reflected = point.copy()
            reflected[j] = -reflected[j]
            first = _partial_at(f, (j,), point, step)
            difference = f(point) - f(reflected)
            total += second + k_j * (2.0 * first / point[j] - difference / point[j] ** 2)
    return total


# ---------------------------------------------------------------------------
# Dunkl transform
# ---------------------------------------------------------------------------


def dunkl_transform(
    rs: RootSystem,
    f: FunctionHandle,
    xi: PointLike,
    tol: float = 1e-8,
) -> complex:
    """Dunkl transform ``c_k**-1 int f(x) E(x, -i xi) dw(x)`` for ``N <= 2``.

    The domain is truncated to the cube of half-width ``f.tail_radius(tol)``,
    which by contract leaves a tail below ``tol / 2``.

    Raises:
        ParameterError: If ``f`` is not integrable or ``N > 2``.
        IntegrationError: If the quadrature misses ``tol / 2``.
    """

    if f.tail_radius is None:
        raise ParameterError(f"{f.name} carries no integrability data")
    if rs.dimension > 2:
        raise ParameterError("The quadrature route of the transform is limited to N <= 2")
    frequency = as_point(xi, rs.dimension)
    radius = f.tail_radius(tol)
    budget = tol / 2.0

    def kernel(point: FloatArray) -> complex:
        value = f.evaluate(point[None, :])[0] * weight_array(rs, point[None, :])[0]
        return value * dunkl_kernel_E_imag(rs, point, -frequency)

    if rs.dimension == 1:
        real = adaptive_integrate(
            lambda s: kernel(np.array([s])).real, [(-radius, radius)], budget, points=[0.0],
        )
        imag = adaptive_integrate(
            lambda s: kernel(np.array([s])).imag, [(-radius, radius)], budget, points=[0.0],
        )
    else:
        box = [(-radius, radius)] * 2
        real = adaptive_integrate(lambda a, b: kernel(np.array([a, b])).real, box, budget)
        imag = adaptive_integrate(lambda a, b: kernel(np.array([a, b])).imag, box, budget)
    return complex(real.value, imag.value) / rs.c_k


# ---------------------------------------------------------------------------
# Generalized translations and convolution
# ---------------------------------------------------------------------------


def rosler_density_constant(k: float) -> float:
    """Normalization of the rank-one measure ``(1 - s)**(k-1) (1 + s)**k ds``."""

    return float(np.exp(special.gammaln(k + 0.5) - special.gammaln(0.5) - special.gammaln(k)))


def rosler_measure_nodes(
    rs: RootSystem,
    x: PointLike,
    n: int,
    cache: KernelCache | None = None,
) -> tuple[FloatArray, FloatArray]:
    """Tensor Gauss-Jacobi discretization of the probability measure ``mu_x``.

    Returns:
        ``(etas, weights)`` with ``etas`` of shape ``(M, N)``; coordinates with
        ``k_j = 0`` carry the point mass at ``eta_j = x_j``.
    """

    point = as_point(x, rs.dimension)
    store = _cache(cache)
    axes_nodes: list[FloatArray] = []
    axes_weights: list[FloatArray] = []
    for j, k_j in enumerate(rs.k):
        if k_j == 0:
            axes_nodes.append(np.array([1.0]))
            axes_weights.append(np.array([1.0]))
            continue
        rule = store.get(("jacobi", k_j, n), lambda k_j=k_j: gauss_jacobi(k_j - 1.0, k_j, n))
        axes_nodes.append(np.asarray(rule.nodes))
        axes_weights.append(np.asarray(rule.weights) * rosler_density_constant(k_j))
    grids = np.meshgrid(*axes_nodes, indexing="ij")
    weights = np.ones_like(grids[0])
    for axis, axis_weights in enumerate(axes_weights):
        shape = [1] * rs.dimension
        shape[axis] = -1
        weights = weights * axis_weights.reshape(shape)
    s = np.stack([grid.ravel() for grid in grids], axis=-1)
    return s * point[None, :], weights.ravel()


def _translation_distance(x: FloatArray, y: FloatArray, etas: FloatArray) -> FloatArray:
    squared = x @ x + y @ y - 2.0 * etas @ y
    return np.sqrt(np.maximum(squared, 0.0))


def translate_radial(
    rs: RootSystem,
    f: FunctionHandle,
    x: PointLike,
    y: PointLike,
    tol: float = 1e-8,
    start_nodes: int = 16,
    max_nodes: int = 512,
    cache: KernelCache | None = None,
) -> float:
    """Generalized translation ``tau_x f(-y)`` of a radial function.

    Uses Rösler's formula ``int f~(A(x, y, eta)) d mu_x(eta)`` with
    ``A = sqrt(|x|**2 + |y|**2 - 2 <y, eta>)``. In rank one the integral is
    computed adaptively against the algebraic weight of ``mu_x``; in higher
    rank a tensor Gauss-Jacobi rule is doubled until stable.

    Raises:
        ParameterError: If ``f`` is not radial.
        IntegrationError: If the tolerance is not met.
    """

    if not f.is_radial or f.radial_profile is None:
        raise ParameterError(f"{f.name} is not radial")
    require_positive("tolerance", tol)
    point_x = as_point(x, rs.dimension)
    point_y = as_point(y, rs.dimension)
    profile = f.radial_profile
    active = [j for j, k_j in enumerate(rs.k) if k_j != 0 and point_x[j] != 0]
    if not active:
        return float(profile(np.array([np.linalg.norm(point_x - point_y)]))[0])
    if rs.dimension == 1:
        k = rs.k[0]
        base = point_x @ point_x + point_y @ point_y
        slope = 2.0 * point_x[0] * point_y[0]

        def integrand(s: float) -> float:
            return float(profile(np.array([np.sqrt(max(base - slope * s, 0.0))]))[0])

        result = adaptive_integrate(
            integrand, [(-1.0, 1.0)], tol, algebraic_weight=(k, k - 1.0),
        )
        return result.value * rosler_density_constant(k)

    n = start_nodes
    previous: float | None = None
    while n <= max_nodes:
        etas, weights = rosler_measure_nodes(rs, point_x, n, cache)
        current = float(weights @ profile(_translation_distance(point_x, point_y, etas)))
        if previous is not None and abs(current - previous) <= tol:
            return current
        previous = current
        n *= 2
    raise IntegrationError("Rösler quadrature did not converge", previous or 0.0, float("nan"))


def translate_radial_transform(
    rs: RootSystem,
    f: FunctionHandle,
    x: PointLike,
    y: PointLike,
    tol: float = 1e-7,
) -> float:
    """Generalized translation through the transform side (rank one).

    ``tau_x f(-y) = c_k**-1 int E(i xi, x) E(-i xi, y) F f(xi) dw(xi)``; for
    radial ``f`` the integrand is even in ``xi``.
    """

    if rs.dimension != 1:
        raise ParameterError("The transform route of translations is implemented in rank one")
    if not f.is_radial:
        raise ParameterError(f"{f.name} is not radial")
    x0 = float(as_point(x, 1)[0])
    y0 = float(as_point(y, 1)[0])
    k = rs.k[0]
    inner_tol = tol / 10.0

    def integrand(xi: float) -> float:
        transform = dunkl_transform(rs, f, [xi], inner_tol).real
        left = rank_one_E_imag(xi * x0, k)
        right = rank_one_E_imag(xi * y0, k)
        paired = (left * np.conj(right)).real
        return 2.0 * transform * paired * weight_array(rs, np.array([[xi]]))[0]

    result = adaptive_integrate(integrand, [(0.0, np.inf)], tol)
    return result.value / rs.c_k


def dunkl_convolve(
    rs: RootSystem,
    f: FunctionHandle,
    g: FunctionHandle,
    x: PointLike,
    tol: float = 1e-7,
) -> float:
    """Dunkl convolution ``(f * g)(x) = int f(y) tau_x g(-y) dw(y)`` (rank one).

    ``g`` must be radial and integrable; ``f`` bounded. The integration range
    is ``|y| <= |x| + g.tail_radius(tol)``, since ``A(x, y, eta) >= | |x| - |y| |``.
    """

    if rs.dimension != 1:
        raise ParameterError("Quadrature convolution is implemented in rank one")
    if not g.is_radial or g.tail_radius is None:
        raise ParameterError(f"{g.name} must be radial and integrable")
    if not f.is_bounded:
        raise ParameterError(f"{f.name} must be bounded")
    point = as_point(x, 1)
    radius = abs(point[0]) + g.tail_radius(tol)
    inner_tol = tol / (10.0 * (1.0 + radius))

    def integrand(s: float) -> float:
        translated = translate_radial(rs, g, point, [s], inner_tol)
        return f(np.array([s])) * translated * weight_array(rs, np.array([[s]]))[0]

    result = adaptive_integrate(
        integrand, [(-radius, radius)], tol / 2.0, points=[0.0, point[0], -point[0]],
    )
    return result.value


def l1_norm(rs: RootSystem, f: FunctionHandle, tol: float = 1e-8) -> float:
    """``||f||_{L1(dw)}`` of an integrable function (rank one)."""

    if f.tail_radius is None or rs.dimension != 1:
        raise ParameterError(f"{f.name}: L1 norm needs rank one and integrability data")
    radius = f.tail_radius(tol)
    result = adaptive_integrate(
        lambda s: abs(f(np.array([s]))) * weight_array(rs, np.array([[s]]))[0],
        [(-radius, radius)],
        tol / 2.0,
        points=[0.0],
    )
    return result.value


__all__ = [
    "FunctionHandle",
    "KernelCache",
    "ModeKind",
    "SpectralMode",
    "derivative_tables",
    "dunkl_apply",
    "dunkl_convolve",
    "dunkl_kernel_E",
    "dunkl_kernel_E_imag",
    "dunkl_laplacian_apply",
    "dunkl_transform",
    "l1_norm",
    "log_dunkl_kernel",
    "mode_function",
    "normalized_bessel",
    "rank_one_E",
    "rank_one_E_imag",
    "rank_one_log_E",
    "rank_one_log_E_scaled",
    "rank_one_log_derivatives",
    "rank_one_ode_residual",
    "rank_one_series_E",
    "rosler_density_constant",
    "rosler_measure_nodes",
    "series_coefficients",
    "translate_radial",
    "translate_radial_transform",
]
