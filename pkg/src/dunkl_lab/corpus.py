"""Named test functions with known regularity.

Every member is a bounded :class:`FunctionHandle` with a nominal Hölder
exponent. The Weierstrass-type members and the Dunkl waves are finite sums of
spectral modes, so the heat and Poisson semigroups act on them exactly; the
others go through the kernel quadrature.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import optimize, special

from .base import FloatArray, ParameterError, require_positive
from .dunkl_kernel import FunctionHandle, ModeKind, SpectralMode, VectorField, mode_function
from .root_system import RootSystem

logger = logging.getLogger(__name__)

SMOOTH = math.inf
WEIERSTRASS_TAIL = 1e-4
DEFAULT_CORPUS = ("constant", "weierstrass", "weierstrass_radial", "dunkl_cosine")


@dataclass(frozen=True)
class CorpusFunction:
    """A test function together with the regularity it is built to have.

    Attributes:
        handle: The function.
        nominal_exponent: Hölder exponent the construction targets;
            ``math.inf`` for smooth members.
        params: Construction parameters, reported alongside estimates.
    """

    handle: FunctionHandle
    nominal_exponent: float
    params: Mapping[str, float] = field(default_factory=dict)

    @property
    def name(self) -> str:
        """Report label of the underlying handle."""

        return self.handle.name

    @property
    def is_spectral(self) -> bool:
        """Whether the handle carries a mode decomposition."""

        return self.handle.modes is not None


def _radius_to_gaussian_tail(rs: RootSystem, scale: float) -> Callable[[float], float]:
    """Tail radius of ``exp(-|x|**2 / (2 scale))`` in ``L1(dw)``."""

    def tail_radius(tol: float) -> float:
        fraction = min(0.5 * tol / (rs.c_k * scale ** (0.5 * rs.homogeneous_dimension)), 0.5)
        return float(np.sqrt(2.0 * scale * special.gammainccinv(0.5 * rs.homogeneous_dimension, fraction)))

    return tail_radius


def weierstrass_terms(beta: float, tail: float = WEIERSTRASS_TAIL) -> int:
    """Index ``J`` of the last lacunary term, the first with ``2**(-J beta) < tail``."""

    require_positive("beta", beta)
    return int(math.floor(math.log2(1.0 / tail) / beta)) + 1


def constant(rs: RootSystem, value: float = 1.0) -> CorpusFunction:
    """The constant function, a single radial mode of frequency zero."""

    handle = mode_function(rs, [SpectralMode(ModeKind.RADIAL, 0.0, value)], f"constant({value:g})")
    return CorpusFunction(handle, SMOOTH, {"value": value})


def weierstrass(rs: RootSystem, beta: float = 0.5, radial: bool = False, axis: int = 0) -> CorpusFunction:
    """Lacunary series ``sum_j 2**(-j beta) c(2**j x)`` with ``c`` a Dunkl cosine.

    ``c`` is the even Dunkl wave along ``axis`` (radial variant: the radial
    Bessel mode in ``|x|``). At ``k = 0`` this is the classical Weierstrass
    function ``sum_j 2**(-j beta) cos(2**j x)``.
    """

    last = weierstrass_terms(beta)
    kind = ModeKind.RADIAL if radial else ModeKind.COS
    modes = [SpectralMode(kind, 2.0**j, 2.0 ** (-j * beta), axis) for j in range(last + 1)]
    label = "weierstrass_radial" if radial else "weierstrass"
    handle = mode_function(rs, modes, f"{label}({beta:g})")
    return CorpusFunction(handle, beta, {"beta": beta, "terms": float(last + 1)})


def dunkl_cosine(rs: RootSystem, frequency: float = 1.0, axis: int = 0) -> CorpusFunction:
    """Even Dunkl wave ``j_{k-1/2}(frequency x_axis)``."""

    handle = mode_function(rs, [SpectralMode(ModeKind.COS, frequency, 1.0, axis)], f"dunkl_cosine({frequency:g})")
    return CorpusFunction(handle, SMOOTH, {"frequency": frequency})


def dunkl_sine(rs: RootSystem, frequency: float = 1.0, axis: int = 0) -> CorpusFunction:
    """Odd Dunkl wave, ``sin`` at ``k = 0``."""

    mode = SpectralMode(ModeKind.SIN, frequency, 1.0, axis)
    handle = mode_function(rs, [mode], f"dunkl_sine({frequency:g})")
    return CorpusFunction(handle, SMOOTH, {"frequency": frequency})


def sqrt_cusp(rs: RootSystem) -> CorpusFunction:
    """``min(1, |x|**(1/2))``, Hölder of order exactly one half at the origin."""

    def evaluator(points: FloatArray) -> FloatArray:
        return np.minimum(1.0, np.sqrt(np.linalg.norm(points, axis=-1)))

    def profile(r: FloatArray) -> FloatArray:
        return np.minimum(1.0, np.sqrt(np.abs(np.asarray(r, dtype=np.float64))))

    handle = FunctionHandle(
        name="sqrt_cusp",
        dimension=rs.dimension,
        evaluator=evaluator,
        is_radial=True,
        sup_norm=1.0,
        radial_profile=profile,
    )
    return CorpusFunction(handle, 0.5)


def _xlogx_sup() -> float:
    best = 0.0
    for lower, upper in ((1e-12, 1.0), (1.0, 6.0)):
        result = optimize.minimize_scalar(
            lambda s: -abs(s * np.log(s)) * np.exp(-s * s),
            bounds=(lower, upper),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(result.fun))
    return best * (1.0 + 1e-9)


def xlogx(rs: RootSystem, axis: int = 0) -> CorpusFunction:
    """``x log|x| exp(-x**2)`` along ``axis``: Zygmund at order one, not Lipschitz."""

    def evaluator(points: FloatArray) -> FloatArray:
        s = points[:, axis]
        with np.errstate(divide="ignore", invalid="ignore"):
            values = s * np.log(np.abs(s)) * np.exp(-s * s)
        return np.where(s == 0.0, 0.0, values)

    handle = FunctionHandle(
        name="xlogx",
        dimension=rs.dimension,
        evaluator=evaluator,
        sup_norm=_xlogx_sup(),
        tail_radius=_radius_to_gaussian_tail(rs, 1.0),
    )
    return CorpusFunction(handle, 1.0)


def bump(rs: RootSystem) -> CorpusFunction:
    """Smooth compactly supported ``exp(-1 / (1 - |x|**2))`` on the unit ball."""

    def factors(points: FloatArray) -> tuple[FloatArray, FloatArray]:
        gap = 1.0 - np.sum(points**2, axis=-1)
        inside = gap > 0
        safe = np.where(inside, gap, 1.0)
        return np.where(inside, np.exp(-1.0 / safe), 0.0), safe

    def evaluator(points: FloatArray) -> FloatArray:
        return factors(points)[0]

    def gradient(points: FloatArray) -> FloatArray:
        value, gap = factors(points)
        return (value * -2.0 / gap**2)[:, None] * points

    def second(i: int, j: int) -> VectorField:
        def derivative(points: FloatArray) -> FloatArray:
            value, gap = factors(points)
            product = points[:, i] * points[:, j]
            return value * (
                4.0 * product / gap**4 - 2.0 * float(i == j) / gap**2 - 8.0 * product / gap**3
            )

        return derivative

    partials: dict[tuple[int, ...], VectorField] = {
        (i, j): second(i, j) for i in range(rs.dimension) for j in range(i, rs.dimension)
    }
    handle = FunctionHandle(
        name="bump",
        dimension=rs.dimension,
        evaluator=evaluator,
        is_radial=True,
        sup_norm=float(np.exp(-1.0)),
        gradient=gradient,
        partials=partials,
        radial_profile=lambda r: evaluator(np.atleast_1d(np.asarray(r, dtype=np.float64))[:, None]),
        tail_radius=lambda tol: 1.0,
    )
    return CorpusFunction(handle, SMOOTH)


def gaussian(rs: RootSystem) -> CorpusFunction:
    """The Schwartz function ``exp(-|x|**2 / 2)``."""

    def evaluator(points: FloatArray) -> FloatArray:
        return np.exp(-0.5 * np.sum(points**2, axis=-1))

    def gradient(points: FloatArray) -> FloatArray:
        return -points * evaluator(points)[:, None]

    def second(i: int, j: int) -> VectorField:
        def derivative(points: FloatArray) -> FloatArray:
            return (points[:, i] * points[:, j] - float(i == j)) * evaluator(points)

        return derivative

    partials: dict[tuple[int, ...], VectorField] = {
        (i, j): second(i, j) for i in range(rs.dimension) for j in range(i, rs.dimension)
    }
    handle = FunctionHandle(
        name="gaussian",
        dimension=rs.dimension,
        evaluator=evaluator,
        is_radial=True,
        sup_norm=1.0,
        gradient=gradient,
        partials=partials,
        radial_profile=lambda r: np.exp(-0.5 * np.asarray(r, dtype=np.float64) ** 2),
        tail_radius=_radius_to_gaussian_tail(rs, 1.0),
    )
    return CorpusFunction(handle, SMOOTH)


def linear_window(rs: RootSystem, width: float = 2.0, axis: int = 0) -> CorpusFunction:
    """``width * tanh(x / width)`` along ``axis``: the identity near 0, bounded."""

    require_positive("width", width)

    def evaluator(points: FloatArray) -> FloatArray:
        return width * np.tanh(points[:, axis] / width)

    def first(points: FloatArray) -> FloatArray:
        return 1.0 / np.cosh(points[:, axis] / width) ** 2

    def second(points: FloatArray) -> FloatArray:
        s = points[:, axis] / width
        return -2.0 / width * np.tanh(s) / np.cosh(s) ** 2

    def zero(points: FloatArray) -> FloatArray:
        return np.zeros(points.shape[0])

    partials: dict[tuple[int, ...], VectorField] = {}
    for i in range(rs.dimension):
        partials[(i,)] = first if i == axis else zero
        for j in range(i, rs.dimension):
            partials[(i, j)] = second if i == j == axis else zero
    handle = FunctionHandle(
        name=f"linear_window({width:g})",
        dimension=rs.dimension,
        evaluator=evaluator,
        sup_norm=width,
        partials=partials,
    )
    return CorpusFunction(handle, SMOOTH, {"width": width})


CorpusBuilder = Callable[..., CorpusFunction]

BUILDERS: dict[str, tuple[CorpusBuilder, tuple[str, ...]]] = {
    "constant": (constant, ("value",)),
    "weierstrass": (weierstrass, ("beta",)),
    "weierstrass_radial": (lambda rs, beta=0.5: weierstrass(rs, beta, radial=True), ("beta",)),
    "dunkl_cosine": (dunkl_cosine, ("frequency",)),
    "dunkl_sine": (dunkl_sine, ("frequency",)),
    "sqrt_cusp": (sqrt_cusp, ()),
    "xlogx": (xlogx, ()),
    "bump": (bump, ()),
    "gaussian": (gaussian, ()),
    "linear_window": (linear_window, ("width",)),
}


def build_corpus(
    rs: RootSystem,
    names: Sequence[str] = DEFAULT_CORPUS,
    params: Mapping[str, Mapping[str, Any]] | None = None,
) -> list[CorpusFunction]:
    """Instantiate corpus members by name.

    Args:
        rs: Root system the spectral members are built for.
        names: Member names, see :data:`BUILDERS`.
        params: Optional keyword arguments per member name, for example
            ``{"weierstrass": {"beta": 0.3}}``.

    Raises:
        ParameterError: On an unknown member or parameter name.
    """

    unknown = sorted(set(names) - set(BUILDERS))
    if unknown:
        raise ParameterError(f"Unknown corpus function(s): {', '.join(unknown)}")
    params = params or {}
    members = []
    for name in names:
        builder, accepted = BUILDERS[name]
        options = dict(params.get(name, {}))
        invalid = sorted(set(options) - set(accepted))
        if invalid:
            raise ParameterError(f"Unknown parameter(s) for {name}: {', '.join(invalid)}")
        members.append(builder(rs, **options))
    logger.debug("Built corpus %s for k=%s", [member.name for member in members], rs.k)
    return members


__all__ = [
    "BUILDERS",
    "DEFAULT_CORPUS",
    "SMOOTH",
    "CorpusFunction",
    "bump",
    "build_corpus",
    "constant",
    "dunkl_cosine",
    "dunkl_sine",
    "gaussian",
    "linear_window",
    "sqrt_cusp",
    "weierstrass",
    "weierstrass_terms",
    "xlogx",
]
