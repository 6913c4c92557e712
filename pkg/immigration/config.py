"""Versioned JSON experiment configuration.

A config file describes one experiment completely; the command line only
adds the output directory, verbosity and artifact switches. Everything is
validated before any simulation starts, and every problem is reported as a
:class:`~immigration.errors.ConfigError` naming the dotted field path.

Example::

    {
      "schema": 1,
      "seed": 7,
      "law": {"family": "exponential", "rate": 1.0},
      "kernel": {"kind": "indicator", "eta": {"family": "exponential", "rate": 1.0}},
      "mode": {"t": 30.0, "u_grid": [0.0], "n_replicates": 100}
    }
"""

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from immigration.distributions import InterarrivalLaw
from immigration.errors import ConfigError, DomainError
from immigration.kernels import DeterministicTable, KernelSpec
from immigration.process import DEFAULT_TOL

SCHEMA_VERSION = 1
DEFAULT_OUTPUT_DIR = "immigration_results"

_TOP_LEVEL = {"schema", "seed", "law", "kernel", "mode", "dri", "pointprocess", "output_dir"}


def _section(config: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = config.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(name, "must be an object")
    return value


def _unknown(section: Dict[str, Any], allowed, prefix: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{prefix}{key}", "unknown field")


def _int(section, key, path, default=None, minimum=None) -> Optional[int]:
    value = section.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be at least {minimum}, got {value}")
    return value


def _real(section, key, path, default=None, positive=False, unit=False) -> Optional[float]:
    value = section.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if positive and value <= 0:
        raise ConfigError(path, f"must be positive, got {value}")
    if unit and not 0 < value < 1:
        raise ConfigError(path, f"must lie in (0, 1), got {value}")
    return value


def _reals(section, key, path, default=None) -> Optional[Tuple[float, ...]]:
    value = section.get(key, default)
    if value is None:
        return None
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(path, "must be a non-empty list of numbers")
    return tuple(_real({key: v}, key, f"{path}[{i}]") for i, v in enumerate(value))


@dataclass(frozen=True)
class ModeSettings:
    u_grid: Tuple[float, ...] = (0.0,)
    n_replicates: int = 1000
    t: Optional[float] = None
    t_list: Optional[Tuple[float, ...]] = None
    alpha: float = 0.01
    tol: float = DEFAULT_TOL
    c_max: Optional[float] = None
    n_permutations: int = 200
    window_c: Optional[float] = None

    @classmethod
    def from_dict(cls, section: Dict[str, Any]) -> "ModeSettings":
        p = "mode."
        _unknown(section, {f for f in cls.__dataclass_fields__}, p)
        u_grid = _reals(section, "u_grid", p + "u_grid", default=[0.0])
        if any(b < a for a, b in zip(u_grid, u_grid[1:])):
            raise ConfigError(p + "u_grid", "must be sorted")
        t_list = _reals(section, "t_list", p + "t_list")
        if t_list is not None and any(t < 0 for t in t_list):
            raise ConfigError(p + "t_list", "times must be non-negative")
        t = _real(section, "t", p + "t")
        if t is not None and t < 0:
            raise ConfigError(p + "t", "must be non-negative")
        return cls(
            u_grid=u_grid,
            n_replicates=_int(section, "n_replicates", p + "n_replicates", 1000, minimum=1),
            t=t,
            t_list=t_list,
            alpha=_real(section, "alpha", p + "alpha", 0.01, unit=True),
            tol=_real(section, "tol", p + "tol", DEFAULT_TOL, positive=True),
            c_max=_real(section, "c_max", p + "c_max", positive=True),
            n_permutations=_int(section, "n_permutations", p + "n_permutations", 200, minimum=19),
            window_c=_real(section, "window_c", p + "window_c", positive=True),
        )


@dataclass(frozen=True)
class DriSettings:
    k_max: int = 50
    grid_per_unit: int = 10
    n_mc: int = 2000

    @classmethod
    def from_dict(cls, section: Dict[str, Any]) -> "DriSettings":
        p = "dri."
        _unknown(section, {f for f in cls.__dataclass_fields__}, p)
        return cls(
            k_max=_int(section, "k_max", p + "k_max", 50, minimum=1),
            grid_per_unit=_int(section, "grid_per_unit", p + "grid_per_unit", 10, minimum=2),
            n_mc=_int(section, "n_mc", p + "n_mc", 2000, minimum=1),
        )


@dataclass(frozen=True)
class PointProcessSettings:
    intervals: Tuple[Tuple[float, float], ...] = ((0.0, 10.0),)
    n_windows: int = 10000
    horizon: float = 50.0
    n_realizations: int = 10000
    shift: float = 0.25
    shift_interval: Tuple[float, float] = (0.0, 1.0)
    laplace_h: Optional[Dict[str, Any]] = None
    laplace_t: float = 50.0
    n_mc: int = 10000

    @property
    def test_function(self) -> DeterministicTable:
        if self.laplace_h is None:
            return DeterministicTable.box(0.0, 1.0)
        return DeterministicTable.from_config(dict(self.laplace_h, kind="table"))

    @classmethod
    def from_dict(cls, section: Dict[str, Any]) -> "PointProcessSettings":
        p = "pointprocess."
        _unknown(section, {f for f in cls.__dataclass_fields__}, p)
        raw = section.get("intervals", [[0.0, 10.0]])
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ConfigError(p + "intervals", "must be a non-empty list of [a, b] pairs")
        intervals = []
        for i, pair in enumerate(raw):
            path = f"{p}intervals[{i}]"
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError(path, "must be an [a, b] pair")
            a, b = _reals({"x": pair}, "x", path)
            if b < a:
                raise ConfigError(path, "must satisfy a <= b")
            intervals.append((a, b))
        shift_interval = _reals(section, "shift_interval", p + "shift_interval", [0.0, 1.0])
        if len(shift_interval) != 2 or shift_interval[1] < shift_interval[0]:
            raise ConfigError(p + "shift_interval", "must be an [a, b] pair with a <= b")
        laplace_h = section.get("laplace_h")
        if laplace_h is not None:
            try:
                DeterministicTable.from_config(dict(laplace_h, kind="table"))
            except (TypeError, ValueError) as e:
                sub = getattr(e, "field", None)
                raise ConfigError(p + "laplace_h" + (f".{sub}" if sub else ""), str(e))
        return cls(
            intervals=tuple(intervals),
            n_windows=_int(section, "n_windows", p + "n_windows", 10000, minimum=1),
            horizon=_real(section, "horizon", p + "horizon", 50.0, positive=True),
            n_realizations=_int(section, "n_realizations", p + "n_realizations", 10000, minimum=1),
            shift=_real(section, "shift", p + "shift", 0.25),
            shift_interval=(shift_interval[0], shift_interval[1]),
            laplace_h=laplace_h,
            laplace_t=_real(section, "laplace_t", p + "laplace_t", 50.0),
            n_mc=_int(section, "n_mc", p + "n_mc", 10000, minimum=1),
        )


def _law(config: Dict[str, Any]) -> InterarrivalLaw:
    if "law" not in config:
        raise ConfigError("law", "missing")
    try:
        return InterarrivalLaw.from_config(config["law"])
    except DomainError as e:
        raise ConfigError("law" + (f".{e.field}" if e.field else ""), str(e))


def _kernel(config: Dict[str, Any]) -> Optional[KernelSpec]:
    if config.get("kernel") is None:
        return None
    try:
        return KernelSpec.from_config(config["kernel"])
    except DomainError as e:
        raise ConfigError("kernel" + (f".{e.field}" if e.field else ""), str(e))
    except TypeError as e:
        raise ConfigError("kernel", str(e))


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    law: InterarrivalLaw
    kernel: Optional[KernelSpec] = None
    mode: ModeSettings = field(default_factory=ModeSettings)
    dri: DriSettings = field(default_factory=DriSettings)
    pointprocess: PointProcessSettings = field(default_factory=PointProcessSettings)
    output_dir: str = DEFAULT_OUTPUT_DIR
    schema: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(config, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        _unknown(config, _TOP_LEVEL, "")
        if "schema" not in config:
            raise ConfigError("schema", "missing")
        if config["schema"] != SCHEMA_VERSION:
            raise ConfigError("schema", f"unsupported version {config['schema']!r}")
        if "seed" not in config:
            raise ConfigError("seed", "missing; every experiment needs an explicit seed")
        seed = _int(config, "seed", "seed", minimum=0)
        output_dir = config.get("output_dir", DEFAULT_OUTPUT_DIR)
        if not isinstance(output_dir, str) or not output_dir:
            raise ConfigError("output_dir", "must be a non-empty string")
        return cls(
            seed=seed,
            law=_law(config),
            kernel=_kernel(config),
            mode=ModeSettings.from_dict(_section(config, "mode")),
            dri=DriSettings.from_dict(_section(config, "dri")),
            pointprocess=PointProcessSettings.from_dict(_section(config, "pointprocess")),
            output_dir=output_dir,
        )

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError("<file>", f"{path} is not valid JSON: {e}")
        except OSError as e:
            raise ConfigError("<file>", f"cannot read {path}: {e}")
        return cls.from_dict(data)

    def require_kernel(self) -> KernelSpec:
        if self.kernel is None:
            raise ConfigError("kernel", "missing")
        return self.kernel

    def require_t(self) -> float:
        if self.mode.t is None:
            raise ConfigError("mode.t", "missing")
        return self.mode.t

    def require_t_list(self) -> List[float]:
        if self.mode.t_list is None:
            raise ConfigError("mode.t_list", "missing")
        return list(self.mode.t_list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": self.schema,
            "seed": self.seed,
            "law": self.law.to_config(),
            "kernel": None if self.kernel is None else self.kernel.to_config(),
            "mode": asdict(self.mode),
            "dri": asdict(self.dri),
            "pointprocess": asdict(self.pointprocess),
            "output_dir": self.output_dir,
        }
