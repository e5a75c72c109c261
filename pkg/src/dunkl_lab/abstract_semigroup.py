"""Sectorial matrix generators and their holomorphic functional calculus.

Finite-dimensional models of a generator ``A`` of a bounded holomorphic
semigroup: the semigroup ``e^{tA}``, its Poisson subordinate
``P_t = e^{-t sqrt(-A)}``, resolvents, the contour calculus

    f(A) = (2 pi i)**-1 int_{Gamma_{theta, eps}} f(lambda) R(lambda: A) dlambda,

Bessel potentials ``(I - A)**-gamma``, discrete Lipschitz norms and the
K-functional decomposition used for real interpolation.

Sectors follow ``Sigma_delta = {|arg lambda| < pi/2 + delta}``, ``0 < delta < pi/2``;
the spectrum lies outside ``Sigma_delta`` and contours use rays at angle
``pi/2 < theta < pi/2 + delta``. The square root is the principal branch on
``C \\ R_-``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from scipy import linalg, special

from .base import (
    BranchError,
    ComplexArray,
    FloatArray,
    ParameterError,
    PathError,
    SpectrumError,
    TruncationError,
    require_positive,
)
from .quadrature import (
    Segment,
    adaptive_integrate,
    adaptive_integrate_vector,
    adaptive_laguerre,
    contour_integrate,
    log_panel_integrate,
)

logger = logging.getLogger(__name__)

RESOLVENT_SAMPLES = 100
SECTOR_FRACTION = 0.9
PATH_CLEARANCE = 1e-8
MAX_TRUNCATION_RADIUS = 1e12
DEFAULT_OMEGAS = (1e-1, 1e-2, 1e-3)


def _spectral_arguments(eigenvalues: np.ndarray) -> FloatArray:
    nonzero = eigenvalues[np.abs(eigenvalues) > 0]
    return np.abs(np.angle(nonzero))


def resolvent_bound(
    matrix: np.ndarray,
    delta: float,
    samples: int = RESOLVENT_SAMPLES,
    radii: tuple[float, float] = (1e-3, 1e3),
) -> float:
    """Fitted ``C'`` in ``||R(lambda: A)|| <= C' / |lambda|`` over ``Sigma_delta``.

    ``lambda`` runs over a polar grid of about ``samples`` points with
    ``|arg lambda|`` up to just inside ``pi/2 + delta``.
    """

    side = max(2, int(round(math.sqrt(samples))))
    angles = np.linspace(-(np.pi / 2 + delta), np.pi / 2 + delta, side + 2)[1:-1]
    magnitudes = np.geomspace(radii[0], radii[1], side)
    identity = np.eye(matrix.shape[0])
    best = 0.0
    for angle in angles:
        for magnitude in magnitudes:
            lam = magnitude * np.exp(1j * angle)
            norm = np.linalg.norm(linalg.solve(lam * identity - matrix, identity), 2)
            best = max(best, float(norm * magnitude))
    return best


@dataclass(frozen=True, eq=False)
class MatrixGenerator:
    """A square matrix generating a bounded holomorphic semigroup.

    Attributes:
        matrix: The generator ``A``.
        name: Identifier used in reports.
        delta: Sector opening; ``Sigma_delta`` lies in the resolvent set.
        eigenvalues: Spectrum of ``A``.
        schur: Complex Schur form ``(T, Z)`` with ``A = Z T Z^H``.
        resolvent_constant: Fitted ``C'`` of the sectorial resolvent bound.
        zero_in_resolvent: Whether ``A`` is invertible.
        resolvent_radius: Distance from 0 to the spectrum.
    """

    matrix: FloatArray
    name: str = ""
    delta: float | None = None
    eigenvalues: ComplexArray = field(init=False, repr=False, compare=False)
    schur: tuple[ComplexArray, ComplexArray] = field(init=False, repr=False, compare=False)
    resolvent_constant: float = field(init=False, compare=False)
    zero_in_resolvent: bool = field(init=False, compare=False)
    resolvent_radius: float = field(init=False, compare=False)

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ParameterError(f"Generator must be a square matrix, got shape {matrix.shape}")
        matrix.setflags(write=False)
        eigenvalues = linalg.eigvals(matrix)
        arguments = _spectral_arguments(eigenvalues)
        margin = float(np.min(arguments)) - np.pi / 2 if arguments.size else np.pi / 2
        if margin <= 0:
            raise ParameterError(
                f"{self.name or 'generator'}: spectrum {np.round(eigenvalues, 6)} is not in a left sector",
            )
        delta = self.delta if self.delta is not None else SECTOR_FRACTION * min(margin, np.pi / 2)
        if not 0 < delta < np.pi / 2 or delta > margin:
            raise ParameterError(f"Sector opening {delta} incompatible with spectral margin {margin}")
        radius = float(np.min(np.abs(eigenvalues)))
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "delta", float(delta))
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "schur", linalg.schur(matrix, output="complex"))
        object.__setattr__(self, "zero_in_resolvent", radius > 0)
        object.__setattr__(self, "resolvent_radius", radius)
        object.__setattr__(self, "resolvent_constant", resolvent_bound(matrix, delta))

    @property
    def size(self) -> int:
        """Matrix dimension."""

        return int(self.matrix.shape[0])

    @property
    def identity(self) -> FloatArray:
        """Identity of matching size."""

        return np.eye(self.size)

    @classmethod
    def from_matrix(cls, matrix: Any, name: str = "", delta: float | None = None) -> MatrixGenerator:
        """Build a generator from nested sequences or an array."""

        return cls(np.asarray(matrix, dtype=np.float64), name, delta)


GENERATORS: dict[str, list[list[float]]] = {
    "diag": [[-1.0, 0.0, 0.0], [0.0, -4.0, 0.0], [0.0, 0.0, -9.0]],
    "jordan": [[-2.0, 1.0, 0.0], [0.0, -2.0, 1.0], [0.0, 0.0, -2.0]],
    # Similar to [[-1, 0.5], [-0.5, -1]] through a shear, eigenvalues -1 ± 0.5i.
    "nonnormal": [[-2.0, 2.5], [-0.5, 0.0]],
}


def generator_test_set(names: Sequence[str] | None = None) -> list[MatrixGenerator]:
    """The documented test generators, optionally restricted by name.

    Raises:
        ParameterError: On an unknown name.
    """

    chosen = list(GENERATORS) if names is None else list(names)
    unknown = sorted(set(chosen) - set(GENERATORS))
    if unknown:
        raise ParameterError(f"Unknown generator(s): {', '.join(unknown)}")
    return [MatrixGenerator.from_matrix(GENERATORS[name], name) for name in chosen]


def approximate_generator(A: MatrixGenerator, omega: float) -> MatrixGenerator:
    """``A_omega = A - omega I``, invertible for every ``omega > 0``."""

    require_positive("omega", omega)
    return MatrixGenerator(A.matrix - omega * A.identity, f"{A.name}-{omega:g}", A.delta)


# ---------------------------------------------------------------------------
# Semigroups and resolvents
# ---------------------------------------------------------------------------


def semigroup_at(A: MatrixGenerator, t: float) -> FloatArray:
    """``e^{tA}`` by scaling and squaring."""

    if t < 0:
        raise ParameterError(f"Semigroup time must be non-negative, got {t}")
    return np.asarray(linalg.expm(t * A.matrix))


def resolvent(A: MatrixGenerator, lam: complex) -> ComplexArray:
    """``R(lambda: A) = (lambda I - A)**-1``.

    Raises:
        SpectrumError: If ``lambda`` is an eigenvalue of ``A``.
    """

    gap = float(np.min(np.abs(A.eigenvalues - lam)))
    if gap <= 1e-12 * max(1.0, abs(lam)):
        raise SpectrumError(f"{lam} lies in the spectrum of {A.name or 'the generator'}")
    try:
        return np.asarray(linalg.solve(lam * A.identity - A.matrix, A.identity))
    except linalg.LinAlgError as error:
        raise SpectrumError(f"{lam}: resolvent is singular ({error})") from error


def _check_branch(A: MatrixGenerator) -> None:
    on_cut = np.abs(A.eigenvalues.imag) <= 1e-12 * np.maximum(1.0, np.abs(A.eigenvalues))
    if np.any(on_cut & (A.eigenvalues.real >= 0)):
        raise BranchError(f"The spectrum of {A.name or 'the generator'} meets the branch cut of sqrt(-A)")


def spectral_subordinate(A: MatrixGenerator, t: float) -> ComplexArray:
    """``e^{-t sqrt(-A)}`` from the principal matrix square root (Schur method)."""

    _check_branch(A)
    root = linalg.sqrtm(-A.matrix)
    return np.asarray(linalg.expm(-t * root))


class SubordinationQuadrature(Enum):
    """Quadrature rules for the matrix subordination integral."""

    LOG_PANELS = "log_panels"
    GAUSS_LAGUERRE = "gauss_laguerre"


def _subordination_integral(
    A: MatrixGenerator,
    t: float,
    weight: Callable[[FloatArray], FloatArray],
    power: int,
    tol: float,
    rule: SubordinationQuadrature,
) -> FloatArray:
    """``pi**-1/2 int e**-u u**-1/2 weight(u) A**power e^{(t**2/4u) A} du``."""

    lifted = np.linalg.matrix_power(A.matrix, power)

    def integrand(u: FloatArray) -> FloatArray:
        samples = np.stack([linalg.expm((t * t / (4.0 * value)) * A.matrix) for value in u])
        return weight(u)[:, None, None] * (lifted @ samples)

    if rule is SubordinationQuadrature.GAUSS_LAGUERRE:
        result = adaptive_laguerre(integrand, -0.5, tol, start_nodes=64, max_nodes=1024)
        return np.asarray(result.value) / np.sqrt(np.pi)
    lower = 1e-2 * tol * tol
    upper = math.log(100.0 / tol) + 5.0 + 2.0 * power

    def weighted(u: FloatArray) -> FloatArray:
        return (np.exp(-u) / np.sqrt(u))[:, None, None] * integrand(u)

    result = log_panel_integrate(weighted, lower, upper, tol, nodes=8, max_nodes=128, normwise=True)
    return np.asarray(result.value) / np.sqrt(np.pi)


def subordinate_at(
    A: MatrixGenerator,
    t: float,
    tol: float = 1e-10,
    rule: SubordinationQuadrature = SubordinationQuadrature.LOG_PANELS,
) -> FloatArray:
    """Poisson semigroup ``P_t = pi**-1/2 int e**-u e^{(t**2/4u) A} u**-1/2 du``.

    Raises:
        BranchError: If the spectrum meets the branch cut of ``sqrt(-A)``.
    """

    require_positive("t", t)
    _check_branch(A)
    return _subordination_integral(A, t, lambda u: np.ones_like(u), 0, tol, rule)


# ---------------------------------------------------------------------------
# Admissible functions and contours
# ---------------------------------------------------------------------------

ComplexFunction = Callable[[Any], Any]
RayTail = Callable[[float, float], float]


@dataclass(frozen=True)
class AdmissibleFunction:
    """A bounded holomorphic function on the left half-plane.

    Attributes:
        name: Label used in reports.
        evaluator: Vectorized complex evaluation.
        sup_bound: Declared bound on the sector left of the contour rays.
        tail: ``(theta, r) -> int_r^inf |f(s e^{i theta})| ds``; estimated by
            adaptive quadrature when not given.
    """

    name: str
    evaluator: ComplexFunction
    sup_bound: float | None = None
    tail: RayTail | None = None

    def __call__(self, z: Any) -> Any:
        return self.evaluator(np.asarray(z, dtype=np.complex128))

    def ray_tail(self, theta: float, r: float, floor: float = 0.0) -> float:
        """Bound on ``int_r^inf |f|`` along both rays at angle ``±theta``.

        ``floor`` is an absolute error the estimate may carry; tails that
        underflow to zero are accepted without it.
        """

        if self.tail is not None:
            return float(self.tail(theta, r))
        total = 0.0
        for sign in (1.0, -1.0):
            direction = np.exp(1j * sign * theta)
            result = adaptive_integrate(
                lambda s, d=direction: float(abs(self(s * d))), [(r, np.inf)], 1e-8, relative=True, floor=floor,
            )
            total = max(total, result.value + result.error)
        return total

    def scaled(self, t: float) -> AdmissibleFunction:
        """``z -> f(t z)``."""

        require_positive("scale", t)
        tail = self.tail
        return AdmissibleFunction(
            f"{self.name}({t:g}z)",
            lambda z: self.evaluator(t * z),
            self.sup_bound,
            None if tail is None else (lambda theta, r: tail(theta, t * r) / t),
        )

    def __mul__(self, other: AdmissibleFunction) -> AdmissibleFunction:
        bound = None
        if self.sup_bound is not None and other.sup_bound is not None:
            bound = self.sup_bound * other.sup_bound
        tail = None
        if self.tail is not None and other.sup_bound is not None:
            first, factor = self.tail, other.sup_bound
            tail = lambda theta, r: factor * first(theta, r)  # noqa: E731
        return AdmissibleFunction(
            f"{self.name}*{other.name}",
            lambda z: self.evaluator(z) * other.evaluator(z),
            bound,
            tail,
        )

    def check(self, theta: float, samples: int = 32, radius: float = 1e3) -> bool:
        """Spot-check the declared bound left of the rays and the ray integrals."""

        magnitudes = np.geomspace(1e-6, radius, samples)
        angles = np.linspace(theta, np.pi, samples)
        grid = magnitudes[:, None] * np.exp(1j * angles[None, :])
        values = np.abs(np.concatenate([self(grid), self(np.conj(grid))]))
        if not np.all(np.isfinite(values)):
            return False
        if self.sup_bound is not None and np.max(values) > self.sup_bound * (1 + 1e-9):
            return False
        return bool(np.isfinite(self.ray_tail(theta, 0.0)))


def _exp_tail(theta: float, r: float) -> float:
    c = -math.cos(theta)
    return math.exp(-c * r) / c


def _poisson_tail(theta: float, r: float) -> float:
    c = math.cos((np.pi - theta) / 2.0)
    root = math.sqrt(r)
    return 2.0 * math.exp(-c * root) * (root / c + 1.0 / c**2)


def exponential() -> AdmissibleFunction:
    """``f(z) = e^z``, whose calculus gives ``e^A``."""

    return AdmissibleFunction("exp", np.exp, 1.0, _exp_tail)


def poisson_symbol(t: float = 1.0) -> AdmissibleFunction:
    """``f(z) = e^{-t sqrt(-z)}``, whose calculus gives ``P_t``."""

    require_positive("t", t)
    return AdmissibleFunction(
        f"poisson({t:g})",
        lambda z: np.exp(-t * np.sqrt(-z)),
        1.0,
        lambda theta, r: _poisson_tail(theta, t * t * r) / (t * t),
    )


def poisson_derivative_symbol(n: int, t: float) -> AdmissibleFunction:
    """``f(z) = (-sqrt(-z))**n e^{-t sqrt(-z)}``, the symbol of ``d_t**n P_t``."""

    require_positive("t", t)
    return AdmissibleFunction(
        f"poisson_d{n}({t:g})",
        lambda z: (-np.sqrt(-z)) ** n * np.exp(-t * np.sqrt(-z)),
    )


def multiplier_symbol(n: int) -> AdmissibleFunction:
    """``m(z) = (sqrt(-z))**n e^{z + sqrt(-z)}``."""

    if n < 1:
        raise ParameterError(f"Multiplier order must be at least 1, got {n}")
    return AdmissibleFunction(f"multiplier({n})", lambda z: np.sqrt(-z) ** n * np.exp(z + np.sqrt(-z)))


@dataclass(frozen=True)
class ContourPath:
    """The path ``Gamma_{theta, eps}``.

    Two rays ``r e^{±i theta}`` for ``r >= eps``, joined for ``eps > 0`` by
    the arc ``eps e^{i w}``, ``theta <= |w| <= pi``, passing left of the
    origin. The orientation runs in from ``inf e^{-i theta}`` and out to
    ``inf e^{i theta}``.

    Attributes:
        theta: Ray angle, ``pi/2 < theta < pi``.
        epsilon: Arc radius, ``0`` for the plain rays.
        r_max: Truncation radius; chosen from the tail bound when ``None``.
        arc_panels: Panels on the arc.
    """

    theta: float = 3 * np.pi / 4
    epsilon: float = 0.0
    r_max: float | None = None
    arc_panels: int = 4

    def __post_init__(self) -> None:
        if not np.pi / 2 < self.theta < np.pi:
            raise ParameterError(f"Contour angle must lie in (pi/2, pi), got {self.theta}")
        if self.epsilon < 0:
            raise ParameterError(f"Arc radius must be non-negative, got {self.epsilon}")

    def crossing(self, height: float) -> float:
        """Real part of the path point at imaginary part ``height``."""

        if abs(height) >= self.epsilon * math.sin(self.theta):
            return abs(height) / math.tan(self.theta)
        return -math.sqrt(self.epsilon**2 - height**2)

    def side(self, lam: complex) -> str:
        """``"left"`` or ``"right"`` of the path."""

        return "left" if lam.real < self.crossing(lam.imag) else "right"

    def distance(self, lam: complex) -> float:
        """Euclidean distance from ``lam`` to the (untruncated) path."""

        best = math.inf
        for sign in (1.0, -1.0):
            direction = complex(np.exp(1j * sign * self.theta))
            projection = max((lam * direction.conjugate()).real, self.epsilon)
            best = min(best, abs(lam - projection * direction))
        if self.epsilon > 0:
            angle = abs(math.atan2(lam.imag, lam.real))
            if angle >= self.theta:
                best = min(best, abs(abs(lam) - self.epsilon))
        return best

    def segments(self, r_max: float, inner: float) -> list[Segment]:
        """Quadrature segments up to radius ``r_max``.

        With ``epsilon = 0`` the rays start at the origin; the piece up to
        ``inner`` is parameterized by ``r = s**2``, which keeps square-root
        branch points smooth.
        """

        down = complex(np.exp(-1j * self.theta))
        up = complex(np.exp(1j * self.theta))
        start = self.epsilon if self.epsilon > 0 else inner
        panels = max(1, int(math.ceil(math.log(r_max / start))))
        pieces = [_log_ray(down, start, r_max, panels, inward=True)]
        if self.epsilon > 0:
            pieces.append(_arc(self.epsilon, self.theta, self.arc_panels))
        else:
            root = math.sqrt(inner)
            pieces.append(_square_ray(down, root, inward=True))
            pieces.append(_square_ray(up, root, inward=False))
        pieces.append(_log_ray(up, start, r_max, panels, inward=False))
        return pieces


def _log_ray(direction: complex, lower: float, upper: float, panels: int, inward: bool) -> Segment:
    a, b = math.log(lower), math.log(upper)
    if inward:
        return Segment(
            point=lambda u: np.exp(-u) * direction,
            velocity=lambda u: -np.exp(-u) * direction,
            edges=tuple(np.linspace(-b, -a, panels + 1)),
        )
    return Segment(
        point=lambda u: np.exp(u) * direction,
        velocity=lambda u: np.exp(u) * direction,
        edges=tuple(np.linspace(a, b, panels + 1)),
    )


def _square_ray(direction: complex, root: float, inward: bool) -> Segment:
    edges = (-root, 0.0) if inward else (0.0, root)
    return Segment(
        point=lambda u: u * u * direction,
        velocity=lambda u: 2.0 * u * direction,
        edges=edges,
    )


def _arc(radius: float, theta: float, panels: int) -> Segment:
    return Segment(
        point=lambda s: radius * np.exp(-1j * s),
        velocity=lambda s: -1j * radius * np.exp(-1j * s),
        edges=tuple(np.linspace(theta, 2 * np.pi - theta, panels + 1)),
    )


def _truncation_radius(
    f: AdmissibleFunction,
    theta: float,
    resolvent_scale: Callable[[float], float],
    start: float,
    tol: float,
) -> float:
    """Smallest doubling of ``start`` whose ray tails stay below ``tol / 2``."""

    radius = start
    bound = math.inf
    while radius < MAX_TRUNCATION_RADIUS:
        scale = resolvent_scale(radius)
        floor = 1e-3 * tol * np.pi / max(scale, 1.0)
        bound = scale * f.ray_tail(theta, radius, floor) / np.pi
        if bound <= tol / 2.0:
            logger.debug("Contour truncated at R=%.3g (tail bound %.3g)", radius, bound)
            return radius
        radius *= 2.0
    raise TruncationError(
        f"{f.name}: ray tails do not fall below {tol / 2:.3g} before R={MAX_TRUNCATION_RADIUS:g}",
        0.0,
        float(bound),
    )


def _validate_path(A: MatrixGenerator, path: ContourPath) -> None:
    delta = float(A.delta or 0.0)
    if path.theta >= np.pi / 2 + delta:
        raise PathError(
            f"Ray angle {path.theta:.4f} leaves the sector of {A.name or 'the generator'} "
            f"(opening pi/2 + {delta:.4f})",
        )
    if path.epsilon == 0 and not A.zero_in_resolvent:
        raise PathError("Rays through the origin need 0 in the resolvent set")
    if path.epsilon > 0 and path.epsilon >= A.resolvent_radius:
        raise PathError(f"Arc radius {path.epsilon} reaches the spectrum (distance {A.resolvent_radius:.4g})")


def contour_calculus(
    f: AdmissibleFunction,
    A: MatrixGenerator,
    path: ContourPath | None = None,
    tol: float = 1e-9,
) -> ComplexArray:
    """``f(A)`` by the resolvent integral along ``path``.

    Raises:
        PathError: If the path leaves the region where the resolvent is bounded.
        TruncationError: If the ray tails cannot be bounded.
        IntegrationError: If node doubling misses ``tol / 2``.
    """

    require_positive("tolerance", tol)
    path = path or ContourPath(theta=np.pi / 2 + 0.5 * (A.delta or 0.0))
    _validate_path(A, path)
    spectral_radius = float(np.max(np.abs(A.eigenvalues)))
    start = max(1.0, 2.0 * spectral_radius, 2.0 * path.epsilon)
    r_max = path.r_max or _truncation_radius(
        f, path.theta, lambda r: 2.0 * A.resolvent_constant / r, start, tol,
    )
    inner = 0.1 * min(1.0, A.resolvent_radius) if A.zero_in_resolvent else 0.0
    identity = A.identity

    def integrand(z: complex) -> ComplexArray:
        return complex(f(z)) * linalg.solve(z * identity - A.matrix, identity)

    result = contour_integrate(path.segments(r_max, inner), integrand, tol / 2.0)
    return np.asarray(result.value) / (2j * np.pi)


@dataclass(frozen=True)
class FilterResult:
    """Value of the Cauchy filter at a point and the side the point lies on."""

    value: complex
    side: str


def cauchy_filter_check(
    f: AdmissibleFunction,
    path: ContourPath,
    lam: complex,
    tol: float = 1e-10,
) -> FilterResult:
    """``(2 pi i)**-1 int f(z) / (z - lam) dz``: ``f(lam)`` left of the path, 0 right of it.

    Raises:
        PathError: If ``lam`` lies within ``1e-8`` of the path.
    """

    lam = complex(lam)
    if path.distance(lam) < PATH_CLEARANCE:
        raise PathError(f"{lam} is too close to the contour for a stable Cauchy integral")
    start = max(1.0, 2.0 * abs(lam), 2.0 * path.epsilon)
    r_max = path.r_max or _truncation_radius(f, path.theta, lambda r: 4.0 / r, start, tol)
    inner = 0.1 * min(1.0, max(abs(lam), PATH_CLEARANCE))

    def integrand(z: complex) -> np.ndarray:
        return np.asarray(complex(f(z)) / (z - lam))

    result = contour_integrate(path.segments(r_max, inner), integrand, tol / 2.0)
    return FilterResult(complex(np.asarray(result.value)) / (2j * np.pi), path.side(lam))


# ---------------------------------------------------------------------------
# Derivatives, multipliers and norms
# ---------------------------------------------------------------------------


class DerivativeMethod(Enum):
    """Routes to ``d_t**n P_t``."""

    SPECTRAL = "spectral"
    CONTOUR = "contour"
    TRANSFER = "transfer"


def poisson_derivative(
    A: MatrixGenerator,
    n: int,
    t: float,
    method: DerivativeMethod = DerivativeMethod.SPECTRAL,
    tol: float = 1e-10,
    path: ContourPath | None = None,
) -> ComplexArray:
    """``d_t**n P_t`` through the square root, the contour calculus or subordination.

    The subordination route uses the even and odd transfer formulas with the
    heat derivatives ``A**j e^{sA}``.
    """

    require_positive("t", t)
    if n < 0:
        raise ParameterError(f"Derivative order must be non-negative, got {n}")
    if method is DerivativeMethod.CONTOUR:
        return contour_calculus(poisson_derivative_symbol(n, t), A, path, tol)
    _check_branch(A)
    if method is DerivativeMethod.SPECTRAL:
        root = linalg.sqrtm(-A.matrix)
        return np.asarray(np.linalg.matrix_power(-root, n) @ linalg.expm(-t * root))
    half, odd = divmod(n, 2)
    sign = -1.0 if half % 2 else 1.0
    if odd:
        value = _subordination_integral(A, t, lambda u: t / (2.0 * u), half + 1, tol, SubordinationQuadrature.LOG_PANELS)
    else:
        value = _subordination_integral(A, t, lambda u: np.ones_like(u), half, tol, SubordinationQuadrature.LOG_PANELS)
    return sign * value


@dataclass(frozen=True)
class MultiplierNorms:
    """``||m(tA)||`` on a time grid."""

    times: FloatArray
    norms: FloatArray

    @property
    def sup(self) -> float:
        """Largest sampled norm."""

        return float(np.max(self.norms))


def multiplier_norm(
    A: MatrixGenerator,
    n: int,
    times: Sequence[float],
    tol: float = 1e-9,
) -> MultiplierNorms:
    """``||m(tA)||`` with ``m(z) = sqrt(-z)**n e^{z + sqrt(-z)}`` for each ``t``.

    ``m(tA)`` is computed as ``m`` of the generator ``tA``, whose sector and
    resolvent constant match those of ``A``.
    """

    symbol = multiplier_symbol(n)
    norms = []
    for t in times:
        require_positive("t", t)
        scaled = MatrixGenerator(t * A.matrix, f"{t:g}*{A.name}", A.delta)
        norms.append(float(np.linalg.norm(contour_calculus(symbol, scaled, None, tol), 2)))
    return MultiplierNorms(np.asarray(times, dtype=np.float64), np.asarray(norms))


def smallest_integer_above(beta: float) -> int:
    """``floor(beta) + 1``."""

    return int(math.floor(beta)) + 1


def lambda_norm_matrix(
    A: MatrixGenerator,
    x: np.ndarray,
    beta: float,
    times: Sequence[float],
    m: int | None = None,
) -> float:
    """``||x|| + max_t t**(m - beta) ||A**m e^{tA} x||`` over the grid."""

    require_positive("beta", beta)
    order = smallest_integer_above(beta) if m is None else m
    if order <= beta:
        raise ParameterError(f"m must exceed beta, got m={order}, beta={beta}")
    vector = np.asarray(x, dtype=np.float64)
    power = np.linalg.matrix_power(A.matrix, order)
    best = 0.0
    for t in times:
        best = max(best, float(t ** (order - beta) * np.linalg.norm(power @ linalg.expm(t * A.matrix) @ vector)))
    return float(np.linalg.norm(vector)) + best


def lambda_norm_poisson(
    A: MatrixGenerator,
    x: np.ndarray,
    beta: float,
    times: Sequence[float],
    m: int | None = None,
) -> float:
    """``||x|| + max_t t**(m - beta) ||d_t**m P_t x||``, the norm for ``-sqrt(-A)``."""

    require_positive("beta", beta)
    order = smallest_integer_above(beta) if m is None else m
    if order <= beta:
        raise ParameterError(f"m must exceed beta, got m={order}, beta={beta}")
    vector = np.asarray(x, dtype=np.float64)
    _check_branch(A)
    root = linalg.sqrtm(-A.matrix)
    power = np.linalg.matrix_power(-root, order)
    best = 0.0
    for t in times:
        best = max(best, float(t ** (order - beta) * np.linalg.norm(power @ linalg.expm(-t * root) @ vector)))
    return float(np.linalg.norm(vector)) + best


def mild_generator_ratio(
    A: MatrixGenerator,
    x: np.ndarray,
    beta: float,
    times: Sequence[float],
) -> float:
    """``||x||_{beta + 1} / (||x|| + ||Ax||_{beta})``."""

    vector = np.asarray(x, dtype=np.float64)
    upper = lambda_norm_matrix(A, vector, beta + 1.0, times)
    lower = float(np.linalg.norm(vector)) + lambda_norm_matrix(A, A.matrix @ vector, beta, times)
    if lower == 0.0:
        return 1.0
    return upper / lower


def bessel_matrix(
    A: MatrixGenerator,
    gamma: float,
    tol: float = 1e-11,
    max_nodes: int = 1024,
) -> FloatArray:
    """``J**gamma = Gamma(gamma)**-1 int t**(gamma - 1) e**-t e^{tA} dt`` by Gauss-Laguerre."""

    require_positive("gamma", gamma)

    def integrand(nodes: FloatArray) -> FloatArray:
        return np.stack([linalg.expm(t * A.matrix) for t in nodes])

    result = adaptive_laguerre(integrand, gamma - 1.0, tol, start_nodes=64, max_nodes=max_nodes)
    return np.asarray(result.value) / special.gamma(gamma)


def spectral_bessel_matrix(A: MatrixGenerator, gamma: float) -> ComplexArray:
    """``(I - A)**-gamma`` from the fractional matrix power."""

    return np.asarray(linalg.fractional_matrix_power(A.identity - A.matrix, -gamma))


@dataclass(frozen=True)
class KSplit:
    """Decomposition ``x = x0 + x1`` bounding the K-functional at ``t``.

    Attributes:
        x0: Taylor remainder part.
        x1: Smooth part ``sum_{l < m} v^(l)(tau) (-tau)**l / l!``.
        tau: Split time ``t**(1 / (beta1 - beta0))``.
        bound: ``||x0||_{beta0} + t ||x1||_{beta1}``.
        weighted: ``t**-theta * bound``.
        residual: ``||x - x0 - x1||``.
    """

    x0: FloatArray
    x1: FloatArray
    tau: float
    bound: float
    weighted: float
    residual: float


def k_functional_upper(
    A: MatrixGenerator,
    x: np.ndarray,
    t: float,
    beta0: float,
    beta1: float,
    theta: float,
    times: Sequence[float],
    tol: float = 1e-12,
) -> KSplit:
    """Upper bound for ``K(t, x)`` between ``Lambda^beta0`` and ``Lambda^beta1``.

    For ``t >= 1`` the trivial split ``x0 = x`` is used.

    Raises:
        ParameterError: On ``beta0 >= beta1``, ``theta`` outside ``(0, 1)``, or
            a split time beyond the time grid.
    """

    if not beta0 < beta1:
        raise ParameterError(f"Expected beta0 < beta1, got {beta0}, {beta1}")
    if not 0 < theta < 1:
        raise ParameterError(f"theta must lie in (0, 1), got {theta}")
    require_positive("t", t)
    vector = np.asarray(x, dtype=np.float64)
    if t >= 1:
        bound = lambda_norm_matrix(A, vector, beta0, times)
        return KSplit(vector.copy(), np.zeros_like(vector), math.inf, bound, t**-theta * bound, 0.0)
    tau = t ** (1.0 / (beta1 - beta0))
    if tau > max(times):
        raise ParameterError(f"Split time {tau:.3g} exceeds the time grid")
    m = smallest_integer_above(beta1)
    at_tau = linalg.expm(tau * A.matrix) @ vector
    x1 = np.zeros_like(vector)
    derivative = at_tau
    for level in range(m):
        x1 = x1 + derivative * (-tau) ** level / math.factorial(level)
        derivative = A.matrix @ derivative
    power = np.linalg.matrix_power(A.matrix, m)
    remainder = adaptive_integrate_vector(
        lambda s: s ** (m - 1) / math.factorial(m - 1) * (power @ linalg.expm(s * A.matrix) @ vector),
        0.0,
        tau,
        tol * max(1.0, float(np.linalg.norm(vector))),
    )
    x0 = (-1.0) ** m * np.asarray(remainder.value)
    bound = lambda_norm_matrix(A, x0, beta0, times) + t * lambda_norm_matrix(A, x1, beta1, times)
    residual = float(np.linalg.norm(vector - x0 - x1))
    return KSplit(x0, x1, tau, bound, t**-theta * bound, residual)


@dataclass(frozen=True)
class OmegaConvergence:
    """A quantity evaluated along ``A - omega I`` for decreasing ``omega``."""

    omegas: tuple[float, ...]
    values: tuple[Any, ...]

    @property
    def differences(self) -> FloatArray:
        """Norms of successive differences."""

        return np.array(
            [float(np.linalg.norm(np.asarray(b) - np.asarray(a))) for a, b in zip(self.values, self.values[1:])],
        )


def omega_convergence(
    quantity: Callable[[MatrixGenerator], Any],
    A: MatrixGenerator,
    omegas: Sequence[float] = DEFAULT_OMEGAS,
) -> OmegaConvergence:
    """Evaluate ``quantity`` on the approximating generators ``A - omega I``."""

    values = tuple(quantity(approximate_generator(A, omega)) for omega in omegas)
    return OmegaConvergence(tuple(omegas), values)


def semigroup_bound_constant(A: MatrixGenerator, times: Sequence[float]) -> float:
    """Fitted ``C`` in ``||A e^{tA}|| <= C / t`` over the grid."""

    return max(float(t * np.linalg.norm(A.matrix @ semigroup_at(A, t), 2)) for t in times)


def resolvent_derivative_residual(A: MatrixGenerator, lam: complex, step: float = 1e-5) -> float:
    """``|| (R(lam + h) - R(lam - h)) / 2h + R(lam)**2 ||``."""

    central = (resolvent(A, lam + step) - resolvent(A, lam - step)) / (2.0 * step)
    return float(np.linalg.norm(central + resolvent(A, lam) @ resolvent(A, lam), 2))


__all__ = [
    "DEFAULT_OMEGAS",
    "GENERATORS",
    "AdmissibleFunction",
    "ContourPath",
    "DerivativeMethod",
    "FilterResult",
    "KSplit",
    "MatrixGenerator",
    "MultiplierNorms",
    "OmegaConvergence",
    "SubordinationQuadrature",
    "approximate_generator",
    "bessel_matrix",
    "cauchy_filter_check",
    "contour_calculus",
    "exponential",
    "generator_test_set",
    "k_functional_upper",
    "lambda_norm_matrix",
    "lambda_norm_poisson",
    "mild_generator_ratio",
    "multiplier_norm",
    "multiplier_symbol",
    "omega_convergence",
    "poisson_derivative",
    "poisson_derivative_symbol",
    "poisson_symbol",
    "resolvent",
    "resolvent_bound",
    "resolvent_derivative_residual",
    "semigroup_at",
    "semigroup_bound_constant",
    "smallest_integer_above",
    "spectral_bessel_matrix",
    "spectral_subordinate",
    "subordinate_at",
]
