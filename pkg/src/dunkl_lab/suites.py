"""Verification suites: named batteries of numerical checks with pass/flag status.

Every suite is a list of independent tasks. Tasks run on a thread pool and
their checks are collected in submission order, so a report depends only on
the configuration.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np

from . import abstract_semigroup as semigroups
from .base import DunklLabError, ParameterError, log_spaced
from .config import ExperimentConfig
from .corpus import dunkl_cosine, weierstrass
from .dunkl_kernel import FunctionHandle, rank_one_E, rank_one_ode_residual
from .heat_poisson import (
    KernelEvaluator,
    KernelMode,
    apply_semigroup,
    apply_semigroup_grid,
    heat_kernel,
    heat_time_derivative,
    poisson_kernel,
    poisson_time_derivative,
    richardson_derivative,
)
from .lipschitz_norms import (
    EquivalenceSettings,
    bessel_potential_function,
    decay_exponent_fit,
    equivalence_report,
)
from .root_system import make_product_z2

logger = logging.getLogger(__name__)

CHECK_COLUMNS = ("suite", "name", "subject", "parameter", "value", "error", "lower", "bound", "passed", "hard")

MASS_TIMES = (0.1, 1.0)
MASS_POINTS = (0.0, 1.0)
CERTIFICATION_NODES = 20
CERTIFICATION_BOUND = 1e-8
CLASSICAL_BOUND = 1e-8
EXPONENTIAL_BOUND = 1e-12
COMPOSITION_TIMES = (0.2, 0.4, 0.8, 1.6, 3.2)
COMPOSITION_POINTS = (0.5, 1.0)
TRANSFER_BOUND = 1e-5
POISSON_QUADRATURE_TOLERANCE = 1e-3
EXPONENT_BOUND = 0.05
BESSEL_SHIFT_BOUND = 0.07
BESSEL_SHIFT_BETA = 0.4
BESSEL_SHIFT_GAMMA = 0.4
MULTIPLIER_ORDERS = (1, 2, 3)
MULTIPLIER_POINTS = 49
MULTIPLIER_STABILITY = 0.05
K_SPLITS = ((0.5, 1.5, 0.5), (0.4, 2.2, 0.25))
K_STABILITY = 0.1
K_POINTS = 16
NORM_TIMES = log_spaced(1e-4, 1e4, 161)


@dataclass(frozen=True)
class Check:
    """One verified quantity.

    Attributes:
        name: What was checked.
        value: Measured residual or ratio.
        bound: Upper acceptance limit.
        passed: Whether the value is within limits.
        hard: Failing hard checks fail the suite; soft ones are flagged.
        subject: The function, multiplicity or generator under test.
        parameter: Remaining coordinates of the sample.
        lower: Lower acceptance limit for band checks.
        error: Error estimate of the computed quantity, ``None`` when unknown.
            A residual against an independent reference is its own estimate.
    """

    name: str
    value: float
    bound: float
    passed: bool
    hard: bool = True
    subject: str = ""
    parameter: str = ""
    lower: float | None = None
    error: float | None = None

    @classmethod
    def at_most(
        cls,
        name: str,
        value: float,
        bound: float,
        *,
        hard: bool = True,
        subject: str = "",
        parameter: str = "",
        error: float | None = None,
    ) -> Check:
        """``value <= bound`` (NaN fails).

        With a finite ``bound`` the value is a residual and, unless ``error``
        is given, also the error estimate.
        """

        value = float(value)
        if error is None and math.isfinite(bound):
            error = value
        return cls(name, value, bound, bool(value <= bound), hard, subject, parameter, None, error)

    @classmethod
    def within(
        cls,
        name: str,
        value: float,
        band: tuple[float, float],
        *,
        hard: bool = True,
        subject: str = "",
        parameter: str = "",
    ) -> Check:
        """``band[0] <= value <= band[1]``."""

        value = float(value)
        lower, upper = band
        return cls(name, value, upper, bool(lower <= value <= upper), hard, subject, parameter, lower)

    @classmethod
    def errored(
        cls,
        name: str,
        error: Exception,
        *,
        hard: bool = True,
        subject: str = "",
        parameter: str = "",
    ) -> Check:
        """A failed check standing for a computation that raised."""

        logger.warning("%s (%s) raised %s: %s", name, subject, type(error).__name__, error)
        detail = f"{parameter};{type(error).__name__}" if parameter else type(error).__name__
        return cls(name, math.nan, math.nan, False, hard, subject, detail)

    def to_record(self, suite: str) -> dict[str, Any]:
        """Report record with :data:`CHECK_COLUMNS`."""

        record = asdict(self)
        record["suite"] = suite
        record["lower"] = "" if self.lower is None else self.lower
        record["error"] = "" if self.error is None else self.error
        record["passed"] = int(self.passed)
        record["hard"] = int(self.hard)
        return {column: record[column] for column in CHECK_COLUMNS}


@dataclass
class SuiteReport:
    """Checks of one suite run, in a deterministic order."""

    suite: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """All hard checks passed."""

        return all(check.passed for check in self.checks if check.hard)

    @property
    def failures(self) -> list[Check]:
        """Hard checks that failed."""

        return [check for check in self.checks if check.hard and not check.passed]

    @property
    def flags(self) -> list[Check]:
        """Soft checks outside their limits."""

        return [check for check in self.checks if not check.hard and not check.passed]

    def to_records(self) -> list[dict[str, Any]]:
        """Report records of every check."""

        return [check.to_record(self.suite) for check in self.checks]


Task = Callable[[], list[Check]]


def _guarded(name: str, subject: str, task: Task, *, hard: bool = True) -> Task:
    def run() -> list[Check]:
        try:
            return task()
        except DunklLabError as error:
            return [Check.errored(name, error, hard=hard, subject=subject)]

    return run


def run_tasks(tasks: Sequence[Task], threads: int) -> list[Check]:
    """Run tasks on a pool, concatenating their checks in submission order."""

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        results = list(executor.map(lambda task: task(), tasks))
    return [check for checks in results for check in checks]


def _relative(value: Any, reference: Any) -> float:
    difference = float(np.linalg.norm(np.asarray(value) - np.asarray(reference)))
    scale = float(np.linalg.norm(np.asarray(reference)))
    return difference / scale if scale > 0 else difference


def _unit_function() -> FunctionHandle:
    """``f = 1`` without spectral data, so that actions go through quadrature."""

    return FunctionHandle(
        name="one",
        dimension=1,
        evaluator=lambda points: np.ones(points.shape[0]),
        is_radial=True,
        sup_norm=1.0,
    )


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def _mass_checks(config: ExperimentConfig, k: float) -> list[Check]:
    bound = config.tolerance("kernel")
    ke = KernelEvaluator(make_product_z2(1, k))
    one = _unit_function()
    points = np.array(MASS_POINTS)[:, None]
    checks = []
    for mode in (KernelMode.POISSON, KernelMode.HEAT):
        for t in MASS_TIMES:
            for m, target in ((0, 1.0), (1, 0.0)):
                values = apply_semigroup_grid(ke, one, m, t, points, 1e-2 * bound, mode)
                for x, value in zip(MASS_POINTS, values, strict=True):
                    checks.append(
                        Check.at_most(
                            f"{mode.value}_mass_d{m}",
                            abs(value - target),
                            bound,
                            subject=f"k={k:g}",
                            parameter=f"t={t:g},x={x:g}",
                        ),
                    )
    return checks


def _certification_checks(config: ExperimentConfig, k: float) -> list[Check]:
    nodes = np.linspace(-3.0, 3.0, CERTIFICATION_NODES)
    z = np.multiply.outer(nodes, nodes)
    if k == 0:
        value = float(np.max(np.abs(rank_one_E(z, 0.0) / np.exp(z) - 1.0)))
        return [Check.at_most("kernel_exponential_limit", value, EXPONENTIAL_BOUND, subject="k=0")]
    value = float(np.max(rank_one_ode_residual(z, k)))
    return [Check.at_most("kernel_ode_residual", value, CERTIFICATION_BOUND, subject=f"k={k:g}")]


def _classical_checks(config: ExperimentConfig) -> list[Check]:
    ke = KernelEvaluator(make_product_z2(1, 0.0))
    samples = (-1.5, 0.0, 0.7, 2.0)
    heat_error = 0.0
    poisson_error = 0.0
    for t in (0.1, 1.0, 5.0):
        for x in samples:
            for y in samples:
                gaussian = math.exp(-((x - y) ** 2) / (4 * t)) / math.sqrt(4 * math.pi * t)
                cauchy = t / (math.pi * (t * t + (x - y) ** 2))
                heat_error = max(heat_error, abs(heat_kernel(ke, t, x, y) / gaussian - 1.0))
                poisson_error = max(poisson_error, abs(poisson_kernel(ke, t, x, y) / cauchy - 1.0))
    return [
        Check.at_most("heat_classical_limit", heat_error, CLASSICAL_BOUND, subject="k=0"),
        Check.at_most("poisson_classical_limit", poisson_error, CLASSICAL_BOUND, subject="k=0"),
    ]


def _symmetry_checks(config: ExperimentConfig, k: float) -> list[Check]:
    ke = KernelEvaluator(make_product_z2(1, k))
    samples = (-1.2, -0.3, 0.4, 1.7)
    asymmetry = 0.0
    smallest = math.inf
    for t in MASS_TIMES:
        for x in samples:
            for y in samples:
                forward = poisson_kernel(ke, t, x, y)
                backward = poisson_kernel(ke, t, y, x)
                asymmetry = max(asymmetry, abs(forward - backward) / abs(forward))
                smallest = min(smallest, forward, heat_kernel(ke, t, x, y))
    return [
        Check.at_most("kernel_symmetry", asymmetry, 1e-12, subject=f"k={k:g}"),
        Check.at_most("kernel_positivity", -smallest, 0.0, subject=f"k={k:g}"),
    ]


def kernels_suite(config: ExperimentConfig) -> list[Task]:
    """Kernel mass, kernel certification, classical limits, symmetry."""

    tasks: list[Task] = []
    for k in config.k_values:
        subject = f"k={k:g}"
        tasks.append(_guarded("mass", subject, lambda k=k: _mass_checks(config, k)))
        tasks.append(_guarded("certification", subject, lambda k=k: _certification_checks(config, k)))
        tasks.append(_guarded("symmetry", subject, lambda k=k: _symmetry_checks(config, k)))
    tasks.append(_guarded("classical_limit", "k=0", lambda: _classical_checks(config)))
    return tasks


# ---------------------------------------------------------------------------
# semigroup
# ---------------------------------------------------------------------------


def _kernel_function(ke: KernelEvaluator, s: float, y: float, mode: KernelMode) -> FunctionHandle:
    target = np.array([[y]])

    def evaluator(points: np.ndarray) -> np.ndarray:
        column = np.repeat(target, points.shape[0], axis=0)
        if mode is KernelMode.HEAT:
            return ke.heat_values(s, points, column)
        return ke.poisson_values(s, points, column)

    peak = ke.heat_values(s, target, target) if mode is KernelMode.HEAT else ke.poisson_values(s, target, target)
    return FunctionHandle(
        name=f"{mode.value}_{s:g}(., {y:g})",
        dimension=1,
        evaluator=evaluator,
        sup_norm=2.0 * float(np.ravel(peak)[0]),
    )


def _composition_checks(config: ExperimentConfig, k: float, mode: KernelMode) -> list[Check]:
    bound = config.tolerance("semigroup")
    ke = KernelEvaluator(make_product_z2(1, k))
    x, y = COMPOSITION_POINTS
    worst = 0.0
    for s in COMPOSITION_TIMES:
        f = _kernel_function(ke, s, y, mode)
        for t in COMPOSITION_TIMES:
            composed = apply_semigroup(ke, f, 0, t, x, 1e-3 * bound * float(f.sup_norm or 1.0), mode)
            if mode is KernelMode.HEAT:
                direct = heat_kernel(ke, t + s, x, y)
            else:
                direct = poisson_kernel(ke, t + s, x, y)
            worst = max(worst, abs(composed / direct - 1.0))
    return [Check.at_most(f"{mode.value}_semigroup_law", worst, bound, subject=f"k={k:g}", parameter="5x5")]


def _spectral_route_checks(config: ExperimentConfig, k: float, mode: KernelMode) -> list[Check]:
    bound = config.tolerance("semigroup")
    if mode is KernelMode.POISSON:
        bound = max(bound, POISSON_QUADRATURE_TOLERANCE)
    ke = KernelEvaluator(make_product_z2(1, k))
    f = dunkl_cosine(ke.rs, 1.5).handle
    stripped = replace(f, modes=None, modes_k=None)
    points = np.array([[-0.8], [0.3], [1.1]])
    checks = []
    for m in (0, 1):
        exact = apply_semigroup_grid(ke, f, m, 0.5, points, bound, mode)
        numeric = apply_semigroup_grid(ke, stripped, m, 0.5, points, 0.5 * bound, mode)
        checks.append(
            Check.at_most(
                f"{mode.value}_spectral_vs_quadrature",
                float(np.max(np.abs(exact - numeric))),
                bound,
                hard=mode is KernelMode.HEAT,
                subject=f"k={k:g}",
                parameter=f"m={m},t=0.5",
            ),
        )
    return checks


def _derivative_checks(config: ExperimentConfig, k: float) -> list[Check]:
    ke = KernelEvaluator(make_product_z2(1, k))
    x, y = COMPOSITION_POINTS
    checks = []
    for t in (0.2, 1.0):
        heat_worst = 0.0
        for n in range(1, ke.n_max + 1):
            exact = heat_time_derivative(ke, n, t, x, y)
            lower = heat_time_derivative(ke, n - 1, t, x, y)
            numeric = richardson_derivative(lambda s, n=n: heat_time_derivative(ke, n - 1, s, x, y), t, 1)
            heat_worst = max(heat_worst, abs(exact - float(numeric)) / max(abs(exact), abs(lower) / t))
        checks.append(
            Check.at_most("heat_derivative_fd", heat_worst, 1e-6, subject=f"k={k:g}", parameter=f"t={t:g}"),
        )
        value = poisson_kernel(ke, t, x, y)
        first = poisson_time_derivative(ke, 1, t, x, y)
        numeric = float(richardson_derivative(lambda s: poisson_kernel(ke, s, x, y), t, 1))
        checks.append(
            Check.at_most(
                "poisson_transfer_d1",
                abs(first - numeric) / max(abs(first), abs(value) / t),
                TRANSFER_BOUND,
                subject=f"k={k:g}",
                parameter=f"t={t:g}",
            ),
        )
        second = poisson_time_derivative(ke, 2, t, x, y)
        numeric = float(richardson_derivative(lambda s: poisson_kernel(ke, s, x, y), t, 2))
        checks.append(
            Check.at_most(
                "poisson_transfer_d2",
                abs(second - numeric) / max(abs(second), abs(value) / t**2),
                TRANSFER_BOUND,
                hard=False,
                subject=f"k={k:g}",
                parameter=f"t={t:g}",
            ),
        )
    return checks


def semigroup_suite(config: ExperimentConfig) -> list[Task]:
    """Semigroup laws, spectral against quadrature actions, derivative transfer."""

    tasks: list[Task] = []
    for k in config.k_values:
        subject = f"k={k:g}"
        for mode in (KernelMode.HEAT, KernelMode.POISSON):
            tasks.append(
                _guarded(f"{mode.value}_semigroup_law", subject, lambda k=k, mode=mode: _composition_checks(config, k, mode)),
            )
        for mode in (KernelMode.HEAT, KernelMode.POISSON):
            tasks.append(
                _guarded(
                    f"{mode.value}_spectral_vs_quadrature",
                    subject,
                    lambda k=k, mode=mode: _spectral_route_checks(config, k, mode),
                    hard=mode is KernelMode.HEAT,
                ),
            )
        tasks.append(_guarded("time_derivatives", subject, lambda k=k: _derivative_checks(config, k)))
    return tasks


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------


def _matrix_checks(config: ExperimentConfig, A: semigroups.MatrixGenerator, index: int) -> list[Check]:
    bound = config.tolerance("calculus")
    tol = 1e-2 * bound
    name = A.name
    checks = []

    law = np.linalg.norm(semigroups.semigroup_at(A, 0.3) @ semigroups.semigroup_at(A, 0.7) - semigroups.semigroup_at(A, 1.0), 2)
    checks.append(Check.at_most("semigroup_law", law, 1e-10, subject=name))
    checks.append(
        Check.at_most(
            "semigroup_bound_constant",
            semigroups.semigroup_bound_constant(A, NORM_TIMES[::8]),
            math.inf,
            hard=False,
            subject=name,
        ),
    )
    for t in (0.5, 1.0, 2.0):
        residual = np.linalg.norm(semigroups.subordinate_at(A, t, tol) - semigroups.spectral_subordinate(A, t), 2)
        checks.append(Check.at_most("subordination", residual, bound, subject=name, parameter=f"t={t:g}"))
    law = np.linalg.norm(
        semigroups.spectral_subordinate(A, 0.4) @ semigroups.spectral_subordinate(A, 0.6)
        - semigroups.spectral_subordinate(A, 1.0),
        2,
    )
    checks.append(Check.at_most("subordination_law", law, 1e-8, subject=name))

    rng = np.random.default_rng([config.seed, index])
    worst = 0.0
    for _ in range(5):
        lam, mu = (r * np.exp(1j * phi) for r, phi in zip(rng.uniform(0.5, 5.0, 2), rng.uniform(-1.5, 1.5, 2), strict=True))
        left = semigroups.resolvent(A, lam) - semigroups.resolvent(A, mu)
        right = (mu - lam) * semigroups.resolvent(A, lam) @ semigroups.resolvent(A, mu)
        worst = max(worst, _relative(left, right))
    checks.append(Check.at_most("resolvent_identity", worst, 1e-10, subject=name))
    checks.append(
        Check.at_most("resolvent_derivative", semigroups.resolvent_derivative_residual(A, 1.0 + 0.5j), 1e-6, subject=name),
    )
    checks.append(Check.at_most("resolvent_sector_constant", A.resolvent_constant, math.inf, hard=False, subject=name))
    return checks


def _contour_checks(config: ExperimentConfig, A: semigroups.MatrixGenerator) -> list[Check]:
    bound = config.tolerance("calculus")
    tol = 1e-2 * bound
    name = A.name
    exp = semigroups.exponential()
    poisson = semigroups.poisson_symbol(1.0)
    exp_A = semigroups.contour_calculus(exp, A, None, tol)
    poisson_A = semigroups.contour_calculus(poisson, A, None, tol)
    delta = float(A.delta or 0.0)
    other = semigroups.ContourPath(theta=np.pi / 2 + delta / 4, epsilon=0.5 * A.resolvent_radius)
    checks = [
        Check.at_most("contour_exp", np.linalg.norm(exp_A - semigroups.semigroup_at(A, 1.0), 2), bound, subject=name),
        Check.at_most(
            "contour_poisson",
            np.linalg.norm(poisson_A - semigroups.spectral_subordinate(A, 1.0), 2),
            bound,
            subject=name,
        ),
        Check.at_most(
            "path_independence",
            np.linalg.norm(semigroups.contour_calculus(exp, A, other, tol) - exp_A, 2),
            2 * bound,
            subject=name,
        ),
        Check.at_most(
            "homomorphism",
            np.linalg.norm(semigroups.contour_calculus(exp * poisson, A, None, tol) - exp_A @ poisson_A, 2),
            bound,
            subject=name,
            parameter="exp*poisson",
        ),
    ]
    reference = semigroups.poisson_derivative(A, 0, 1.0)
    for n in (1, 2, 3):
        spectral = semigroups.poisson_derivative(A, n, 1.0)
        transfer = semigroups.poisson_derivative(A, n, 1.0, semigroups.DerivativeMethod.TRANSFER, tol)
        checks.append(
            Check.at_most("poisson_derivative_transfer", _relative(transfer, spectral), 1e-6, subject=name, parameter=f"n={n}"),
        )
    for n in (1, 2):
        contour = semigroups.poisson_derivative(A, n, 1.0, semigroups.DerivativeMethod.CONTOUR, tol)
        checks.append(
            Check.at_most(
                "poisson_derivative_contour",
                np.linalg.norm(contour - semigroups.poisson_derivative(A, n, 1.0), 2),
                bound,
                subject=name,
                parameter=f"n={n}",
            ),
        )
    numeric = richardson_derivative(lambda s: semigroups.spectral_subordinate(A, s), 1.0, 2)
    second = semigroups.poisson_derivative(A, 2, 1.0, semigroups.DerivativeMethod.TRANSFER, tol)
    checks.append(
        Check.at_most(
            "poisson_derivative_fd",
            float(np.linalg.norm(second - numeric, 2)) / max(float(np.linalg.norm(second, 2)), float(np.linalg.norm(reference, 2))),
            TRANSFER_BOUND,
            subject=name,
            parameter="n=2",
        ),
    )
    return checks


def _bessel_checks(config: ExperimentConfig, A: semigroups.MatrixGenerator) -> list[Check]:
    name = A.name
    checks = []
    for gamma in (0.5, 1.0):
        residual = np.linalg.norm(semigroups.bessel_matrix(A, gamma) - semigroups.spectral_bessel_matrix(A, gamma), 2)
        checks.append(Check.at_most("bessel_spectral", residual, 1e-8, subject=name, parameter=f"gamma={gamma:g}"))
    half = semigroups.bessel_matrix(A, 0.5)
    residual = np.linalg.norm(half @ half - semigroups.bessel_matrix(A, 1.0), 2)
    checks.append(Check.at_most("bessel_composition", residual, 1e-6, subject=name, parameter="0.5+0.5"))
    base = semigroups.spectral_subordinate(A, 1.0)
    distances = [
        float(np.linalg.norm(semigroups.spectral_subordinate(semigroups.approximate_generator(A, omega), 1.0) - base, 2))
        for omega in semigroups.DEFAULT_OMEGAS
    ]
    checks.append(
        Check.at_most("omega_convergence", distances[-1] / distances[0], 0.1, subject=name, parameter="omega=1e-1..1e-3"),
    )
    return checks


def _multiplier_checks(config: ExperimentConfig, A: semigroups.MatrixGenerator, n: int) -> list[Check]:
    tol = 1e-2 * config.tolerance("calculus")
    fine = semigroups.multiplier_norm(A, n, log_spaced(1e-3, 1e3, 2 * MULTIPLIER_POINTS - 1), tol)
    coarse = float(np.max(fine.norms[::2]))
    change = abs(fine.sup / coarse - 1.0)
    return [
        Check.at_most(
            "multiplier_sup", fine.sup, math.inf, hard=False, subject=A.name, parameter=f"n={n}", error=abs(fine.sup - coarse),
        ),
        Check.at_most("multiplier_stability", change, MULTIPLIER_STABILITY, subject=A.name, parameter=f"n={n}"),
    ]


def _cauchy_checks(config: ExperimentConfig) -> list[Check]:
    path = semigroups.ContourPath(theta=3 * np.pi / 4, epsilon=0.1)
    exp = semigroups.exponential()
    checks = []
    for lam, expected, side in ((-2.0, math.exp(-2.0), "left"), (2.0, 0.0, "right"), (10.0, 0.0, "right"), (100.0, 0.0, "right")):
        result = semigroups.cauchy_filter_check(exp, path, lam)
        checks.append(
            Check.at_most(
                "cauchy_filter",
                abs(result.value - expected),
                1e-8,
                subject="exp",
                parameter=f"lambda={lam:g}",
            ),
        )
        checks.append(
            Check.at_most("cauchy_side", float(result.side != side), 0.0, subject="exp", parameter=f"lambda={lam:g}"),
        )
    return checks


def calculus_suite(config: ExperimentConfig) -> list[Task]:
    """Matrix semigroups, subordination, contour calculus, Bessel potentials, multipliers."""

    tasks: list[Task] = [_guarded("cauchy_filter", "exp", lambda: _cauchy_checks(config))]
    for index, A in enumerate(semigroups.generator_test_set(config.generators)):
        tasks.append(_guarded("matrix", A.name, lambda A=A, index=index: _matrix_checks(config, A, index)))
        tasks.append(_guarded("contour", A.name, lambda A=A: _contour_checks(config, A)))
        tasks.append(_guarded("bessel", A.name, lambda A=A: _bessel_checks(config, A)))
        for n in MULTIPLIER_ORDERS:
            tasks.append(_guarded("multiplier", A.name, lambda A=A, n=n: _multiplier_checks(config, A, n)))
    return tasks


# ---------------------------------------------------------------------------
# interpolation
# ---------------------------------------------------------------------------


def _k_constant(
    A: semigroups.MatrixGenerator,
    x: np.ndarray,
    split: tuple[float, float, float],
    times: np.ndarray,
) -> float:
    beta0, beta1, theta = split
    beta = (1 - theta) * beta0 + theta * beta1
    weighted = max(
        semigroups.k_functional_upper(A, x, float(t), beta0, beta1, theta, NORM_TIMES).weighted for t in times
    )
    return weighted / semigroups.lambda_norm_matrix(A, x, beta, NORM_TIMES)


def _interpolation_checks(config: ExperimentConfig, A: semigroups.MatrixGenerator, index: int) -> list[Check]:
    name = A.name
    band = config.ratio_band
    rng = np.random.default_rng([config.seed, index])
    x = rng.standard_normal(A.size)
    x /= np.linalg.norm(x)
    checks = []
    coarse_times = log_spaced(1e-3, 0.5, K_POINTS)
    fine_times = log_spaced(1e-3, 0.5, 2 * K_POINTS - 1)
    for split in K_SPLITS:
        coarse = _k_constant(A, x, split, coarse_times)
        fine = _k_constant(A, x, split, fine_times)
        label = "beta0={:g},beta1={:g},theta={:g}".format(*split)
        checks.append(
            Check.at_most(
                "k_functional_constant", fine, math.inf, hard=False, subject=name, parameter=label, error=abs(fine - coarse),
            ),
        )
        checks.append(Check.at_most("k_functional_stability", abs(fine / coarse - 1.0), K_STABILITY, subject=name, parameter=label))
    zero = semigroups.k_functional_upper(A, np.zeros(A.size), 0.1, 0.5, 1.5, 0.5, NORM_TIMES)
    checks.append(Check.at_most("k_functional_zero", zero.bound, 0.0, subject=name))
    for beta in (0.3, 0.5):
        checks.append(
            Check.within(
                "mild_generator_ratio",
                semigroups.mild_generator_ratio(A, x, beta, NORM_TIMES),
                band,
                subject=name,
                parameter=f"beta={beta:g}",
            ),
        )
        ratio = semigroups.lambda_norm_matrix(A, x, beta, NORM_TIMES) / semigroups.lambda_norm_poisson(
            A, x, 2 * beta, NORM_TIMES,
        )
        checks.append(Check.within("lambda_poisson_ratio", ratio, band, subject=name, parameter=f"beta={beta:g}"))
    shifted = semigroups.bessel_matrix(A, 0.5) @ x
    ratio = semigroups.lambda_norm_matrix(A, shifted, 0.8, NORM_TIMES) / semigroups.lambda_norm_matrix(A, x, 0.3, NORM_TIMES)
    checks.append(Check.within("bessel_norm_shift", ratio, band, hard=False, subject=name, parameter="beta=0.3,gamma=0.5"))
    return checks


def interpolation_suite(config: ExperimentConfig) -> list[Task]:
    """K-functional splits, mild generator ratios and Lambda-norm comparisons."""

    return [
        _guarded("interpolation", A.name, lambda A=A, index=index: _interpolation_checks(config, A, index))
        for index, A in enumerate(semigroups.generator_test_set(config.generators))
    ]


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def _equivalence_checks(config: ExperimentConfig, k: float) -> list[Check]:
    settings = EquivalenceSettings(
        time_grid=config.time_grid,
        space_grid=config.space_grid,
        tol=config.tolerance("norms"),
        band=config.ratio_band,
        dimension=config.root_system.N,
    )
    rows = equivalence_report(config.corpus, config.betas, [k], settings, config.corpus_params)
    checks = []
    for row in rows:
        for key, ratio in row.ratios.items():
            checks.append(
                Check.within(
                    f"ratio_{key}",
                    ratio,
                    row.band,
                    subject=f"{row.function},k={row.k:g}",
                    parameter=f"beta={row.beta:g}",
                ),
            )
    return checks


def _exponent_checks(config: ExperimentConfig, k: float) -> list[Check]:
    tol = config.tolerance("norms")
    ke = KernelEvaluator(make_product_z2(1, k))
    checks = []
    for beta in config.betas:
        if beta >= 1:
            continue
        f = weierstrass(ke.rs, beta).handle
        fit = decay_exponent_fit(ke, f, 1, config.time_grid, config.space_grid, tol)
        checks.append(
            Check.at_most(
                "decay_exponent",
                abs(fit.slope - (beta - 1.0)),
                EXPONENT_BOUND,
                subject=f"weierstrass,k={k:g}",
                parameter=f"beta={beta:g},slope={fit.slope:.4f}",
            ),
        )
    gamma = BESSEL_SHIFT_GAMMA
    f = weierstrass(ke.rs, BESSEL_SHIFT_BETA).handle
    potential = bessel_potential_function(ke, f, gamma, tol)
    fit = decay_exponent_fit(ke, potential, 1, config.time_grid, config.space_grid, tol)
    checks.append(
        Check.at_most(
            "bessel_shift_exponent",
            abs(fit.slope - (BESSEL_SHIFT_BETA + gamma - 1.0)),
            BESSEL_SHIFT_BOUND,
            subject=f"weierstrass,k={k:g}",
            parameter=f"gamma={gamma:g},slope={fit.slope:.4f}",
        ),
    )
    points = config.space_grid.samples(1)
    half = bessel_potential_function(ke, bessel_potential_function(ke, f, gamma / 2, tol), gamma / 2, tol)
    residual = float(np.max(np.abs(half.evaluate(points) - potential.evaluate(points))))
    checks.append(
        Check.at_most("bessel_composition", residual, 10 * tol, subject=f"weierstrass,k={k:g}", parameter=f"gamma={gamma:g}"),
    )
    return checks


def norms_suite(config: ExperimentConfig) -> list[Task]:
    """Norm-equivalence bands, exponent recovery and Bessel shifts."""

    if not config.betas:
        raise ParameterError("The beta list is empty")
    tasks: list[Task] = []
    for k in config.k_values:
        subject = f"k={k:g}"
        tasks.append(_guarded("equivalence", subject, lambda k=k: _equivalence_checks(config, k)))
        tasks.append(_guarded("exponents", subject, lambda k=k: _exponent_checks(config, k)))
    return tasks


SUITES: dict[str, Callable[[ExperimentConfig], list[Task]]] = {
    "kernels": kernels_suite,
    "semigroup": semigroup_suite,
    "calculus": calculus_suite,
    "interpolation": interpolation_suite,
    "norms": norms_suite,
}


def run_suite(name: str, config: ExperimentConfig) -> SuiteReport:
    """Run one named suite.

    Raises:
        ParameterError: If the suite name is unknown.
    """

    if name not in SUITES:
        raise ParameterError(f"Unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    tasks = SUITES[name](config)
    logger.info("Suite %s: %d tasks on %d worker(s)", name, len(tasks), config.threads)
    report = SuiteReport(name, run_tasks(tasks, config.threads))
    for check in report.flags:
        logger.warning("Flagged %s %s %s: %.4g", check.name, check.subject, check.parameter, check.value)
    logger.info("Suite %s: %d checks, %d failed", name, len(report.checks), len(report.failures))
    return report


__all__ = [
    "CHECK_COLUMNS",
    "SUITES",
    "Check",
    "SuiteReport",
    "calculus_suite",
    "interpolation_suite",
    "kernels_suite",
    "norms_suite",
    "run_suite",
    "run_tasks",
    "semigroup_suite",
]
