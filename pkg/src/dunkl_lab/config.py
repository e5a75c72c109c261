"""Experiment configuration: JSON documents, defaults and CLI overrides."""

from __future__ import annotations

import json
import logging
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .abstract_semigroup import GENERATORS
from .base import ConfigError, ParameterError
from .corpus import BUILDERS, DEFAULT_CORPUS
from .heat_poisson import TimeGrid
from .lipschitz_norms import DEFAULT_BAND, SpaceGrid
from .root_system import PRODUCT_Z2, RootSystem, make_product_z2

logger = logging.getLogger(__name__)

THREADS_ENV = "DUNKL_LAB_THREADS"
FORMATS = ("csv", "json")
TOLERANCE_KEYS = ("kernel", "semigroup", "calculus", "norms", "quadrature")
DEFAULT_TOLERANCES: dict[str, float] = {
    "kernel": 1e-6,
    "semigroup": 1e-6,
    "calculus": 1e-7,
    "norms": 1e-8,
    "quadrature": 1e-10,
}


def _check_keys(block: Any, allowed: Sequence[str], path: str) -> Mapping[str, Any]:
    if not isinstance(block, Mapping):
        raise ConfigError(f"expected an object, got {type(block).__name__}", path)
    for key in block:
        if key not in allowed:
            raise ConfigError("unknown key", _join(path, str(key)))
    return block


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _float_list(value: Any, path: str) -> list[float]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)]
    if not isinstance(value, list):
        raise ConfigError(f"expected a number or a list of numbers, got {value!r}", path)
    try:
        return [float(item) for item in value]
    except (TypeError, ValueError) as error:
        raise ConfigError(f"expected numbers ({error})", path) from error


def _string_list(value: Any, path: str) -> list[str]:
    if isinstance(value, str):
        return [value]
    if not isinstance(value, list) or not all(isinstance(item, str) for item in value):
        raise ConfigError(f"expected a list of names, got {value!r}", path)
    return list(value)


def _build(factory: Any, block: Mapping[str, Any], path: str) -> Any:
    try:
        return factory(block)
    except ConfigError:
        raise
    except (ParameterError, TypeError, ValueError) as error:
        raise ConfigError(str(error), path) from error


@dataclass
class RootSystemConfig:
    """The ``root_system`` block."""

    group: str = PRODUCT_Z2
    N: int = 1
    k: list[float] = field(default_factory=lambda: [0.0])

    @classmethod
    def from_config(cls, block: Mapping[str, Any], path: str = "root_system") -> RootSystemConfig:
        """Validate and build the block."""

        block = _check_keys(block, ("group", "N", "k"), path)
        if block.get("group", PRODUCT_Z2) != PRODUCT_Z2:
            raise ConfigError(f"unsupported group {block['group']!r}", _join(path, "group"))
        k = _float_list(block.get("k", [0.0]), _join(path, "k"))
        N = block.get("N", len(k))
        if not isinstance(N, int) or isinstance(N, bool) or N < 1:
            raise ConfigError(f"expected a positive integer, got {N!r}", _join(path, "N"))
        if len(k) not in (1, N):
            raise ConfigError(f"expected 1 or {N} multiplicities, got {len(k)}", _join(path, "k"))
        return cls(PRODUCT_Z2, N, k)

    def to_root_system(self, k: float | None = None) -> RootSystem:
        """The configured system, or a constant-multiplicity one of the same rank."""

        if k is not None:
            return make_product_z2(self.N, k)
        return make_product_z2(self.N, self.k[0] if len(self.k) == 1 else self.k)


@dataclass
class QuadratureConfig:
    """Node budgets shared by the Gaussian rules and QUADPACK."""

    laguerre_nodes: int = 64
    max_laguerre_nodes: int = 512
    jacobi_nodes: int = 32
    max_jacobi_nodes: int = 256
    quad_limit: int = 200

    def __post_init__(self) -> None:
        for name in ("laguerre_nodes", "jacobi_nodes", "quad_limit"):
            if getattr(self, name) < 2:
                raise ParameterError(f"{name} must be at least 2, got {getattr(self, name)}")
        if self.max_laguerre_nodes < self.laguerre_nodes:
            raise ParameterError("max_laguerre_nodes is below laguerre_nodes")
        if self.max_jacobi_nodes < self.jacobi_nodes:
            raise ParameterError("max_jacobi_nodes is below jacobi_nodes")

    @classmethod
    def from_config(cls, block: Mapping[str, Any]) -> QuadratureConfig:
        """Build from a configuration block."""

        defaults = cls()
        return cls(**{name: int(block.get(name, getattr(defaults, name))) for name in _QUADRATURE_KEYS})


_QUADRATURE_KEYS = ("laguerre_nodes", "max_laguerre_nodes", "jacobi_nodes", "max_jacobi_nodes", "quad_limit")
_TOP_LEVEL_KEYS = (
    "root_system",
    "k_values",
    "betas",
    "corpus",
    "corpus_params",
    "time_grid",
    "space_grid",
    "quadrature",
    "tolerances",
    "ratio_band",
    "generators",
    "output",
    "format",
    "threads",
    "seed",
)


@dataclass
class ExperimentConfig:
    """Everything a suite or report run needs.

    Attributes:
        root_system: Rank and multiplicities for single-system runs.
        k_values: Multiplicities swept by the reports (rank of ``root_system``).
        betas: Smoothness exponents swept by the reports.
        corpus: Corpus member names.
        corpus_params: Per-member parameter overrides.
        time_grid: Sample times for ``sup_t``.
        space_grid: Sample points for ``sup_x``.
        quadrature: Node budgets.
        tolerances: Check bounds keyed by suite area.
        ratio_band: Accepted band for norm ratios.
        generators: Names of the matrix generators.
        output: Report path, ``None`` for standard output.
        format: ``csv`` or ``json``.
        threads: Worker count.
        seed: Seed of every random sample.
    """

    root_system: RootSystemConfig = field(default_factory=RootSystemConfig)
    k_values: list[float] = field(default_factory=lambda: [0.0, 0.5, 1.0])
    betas: list[float] = field(default_factory=lambda: [0.3, 0.5, 0.7])
    corpus: list[str] = field(default_factory=lambda: list(DEFAULT_CORPUS))
    corpus_params: dict[str, dict[str, Any]] = field(default_factory=dict)
    time_grid: TimeGrid = field(default_factory=TimeGrid)
    space_grid: SpaceGrid = field(default_factory=SpaceGrid)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    ratio_band: tuple[float, float] = DEFAULT_BAND
    generators: list[str] = field(default_factory=lambda: list(GENERATORS))
    output: Path | None = None
    format: str = "csv"
    threads: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """Check cross-field constraints.

        Raises:
            ConfigError: Naming the offending key.
        """

        for key, value in self.tolerances.items():
            if key not in TOLERANCE_KEYS:
                raise ConfigError("unknown key", f"tolerances.{key}")
            if not value > 0:
                raise ConfigError(f"tolerance must be positive, got {value}", f"tolerances.{key}")
        if any(beta <= 0 for beta in self.betas):
            raise ConfigError(f"exponents must be positive, got {self.betas}", "betas")
        if any(k < 0 for k in self.k_values):
            raise ConfigError(f"multiplicities must be non-negative, got {self.k_values}", "k_values")
        lower, upper = self.ratio_band
        if not 0 < lower <= 1 <= upper:
            raise ConfigError(f"band must contain 1, got {self.ratio_band}", "ratio_band")
        unknown = sorted(set(self.corpus) - set(BUILDERS))
        if unknown:
            raise ConfigError(f"unknown corpus member(s): {', '.join(unknown)}", "corpus")
        unknown = sorted(set(self.generators) - set(GENERATORS))
        if unknown:
            raise ConfigError(f"unknown generator(s): {', '.join(unknown)}", "generators")
        if self.format not in FORMATS:
            raise ConfigError(f"expected one of {', '.join(FORMATS)}, got {self.format!r}", "format")
        if self.threads < 1:
            raise ConfigError(f"expected at least 1 worker, got {self.threads}", "threads")

    def tolerance(self, key: str) -> float:
        """Check bound for a suite area."""

        return self.tolerances.get(key, DEFAULT_TOLERANCES[key])

    @classmethod
    def from_mapping(cls, data: Any) -> ExperimentConfig:
        """Build from a decoded JSON document.

        Raises:
            ConfigError: On unknown keys or malformed values, naming the dotted path.
        """

        data = _check_keys(data, _TOP_LEVEL_KEYS, "")
        options: dict[str, Any] = {}
        if "root_system" in data:
            options["root_system"] = RootSystemConfig.from_config(data["root_system"])
        for key in ("k_values", "betas"):
            if key in data:
                options[key] = _float_list(data[key], key)
        for key in ("corpus", "generators"):
            if key in data:
                options[key] = _string_list(data[key], key)
        if "corpus_params" in data:
            params = _check_keys(data["corpus_params"], list(BUILDERS), "corpus_params")
            for name, block in params.items():
                _check_keys(block, BUILDERS[name][1], f"corpus_params.{name}")
            options["corpus_params"] = {name: dict(block) for name, block in params.items()}
        if "time_grid" in data:
            block = _check_keys(data["time_grid"], ("t_min", "t_max", "points"), "time_grid")
            options["time_grid"] = _build(TimeGrid.from_config, block, "time_grid")
        if "space_grid" in data:
            block = _check_keys(data["space_grid"], ("half_width", "points", "cluster_points"), "space_grid")
            options["space_grid"] = _build(SpaceGrid.from_config, block, "space_grid")
        if "quadrature" in data:
            block = _check_keys(data["quadrature"], _QUADRATURE_KEYS, "quadrature")
            options["quadrature"] = _build(QuadratureConfig.from_config, block, "quadrature")
        if "tolerances" in data:
            block = _check_keys(data["tolerances"], TOLERANCE_KEYS, "tolerances")
            options["tolerances"] = {
                **DEFAULT_TOLERANCES,
                **{key: _float_list(value, f"tolerances.{key}")[0] for key, value in block.items()},
            }
        if "ratio_band" in data:
            band = _float_list(data["ratio_band"], "ratio_band")
            if len(band) != 2:
                raise ConfigError(f"expected [lower, upper], got {band}", "ratio_band")
            options["ratio_band"] = (band[0], band[1])
        if data.get("output") is not None:
            options["output"] = Path(str(data["output"]))
        for key, kind in (("format", str), ("threads", int), ("seed", int)):
            if key in data:
                if not isinstance(data[key], kind) or isinstance(data[key], bool):
                    raise ConfigError(f"expected {kind.__name__}, got {data[key]!r}", key)
                options[key] = data[key]
        return cls(**options)

    @classmethod
    def from_file(cls, path: Path) -> ExperimentConfig:
        """Load a JSON document.

        Raises:
            ConfigError: If the file is unreadable, not JSON, or fails validation.
        """

        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as error:
            raise ConfigError(f"cannot read {path}: {error.strerror}") from error
        try:
            data = json.loads(text)
        except json.JSONDecodeError as error:
            raise ConfigError(f"{path}: line {error.lineno} column {error.colno}: {error.msg}") from error
        logger.debug("Loaded configuration from %s", path)
        return cls.from_mapping(data)

    def override(
        self,
        *,
        k_values: Sequence[float] | None = None,
        betas: Sequence[float] | None = None,
        tol: float | None = None,
        output: Path | None = None,
        format: str | None = None,
        generators: Sequence[str] | None = None,
        threads: int | None = None,
    ) -> ExperimentConfig:
        """Return a copy with command-line values applied.

        ``tol`` replaces every check bound. A ``k_values`` override also
        replaces the multiplicity of ``root_system``.
        """

        changes: dict[str, Any] = {}
        if k_values is not None:
            changes["k_values"] = [float(k) for k in k_values]
            changes["root_system"] = replace(self.root_system, k=[float(k_values[0])])
        if betas is not None:
            changes["betas"] = [float(beta) for beta in betas]
        if tol is not None:
            changes["tolerances"] = {key: float(tol) for key in TOLERANCE_KEYS}
        if output is not None:
            changes["output"] = output
        if format is not None:
            changes["format"] = format
        if generators is not None:
            changes["generators"] = list(generators)
        if threads is not None:
            changes["threads"] = threads
        return replace(self, **changes) if changes else self

    def with_environment(self, environ: Mapping[str, str] | None = None) -> ExperimentConfig:
        """Apply ``DUNKL_LAB_THREADS``.

        Raises:
            ConfigError: If the variable is not a positive integer.
        """

        value = (os.environ if environ is None else environ).get(THREADS_ENV)
        if value is None:
            return self
        try:
            threads = int(value)
        except ValueError as error:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {value!r}") from error
        return replace(self, threads=threads)


__all__ = [
    "DEFAULT_TOLERANCES",
    "FORMATS",
    "THREADS_ENV",
    "TOLERANCE_KEYS",
    "ExperimentConfig",
    "QuadratureConfig",
    "RootSystemConfig",
]
