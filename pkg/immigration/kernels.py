"""Immigration kernels X and their sampled trajectories.

A :class:`KernelSpec` describes the law of the process X attached to every
renewal epoch; :meth:`KernelSpec.sample_path` draws one trajectory as an
immutable :class:`PathSample`. All trajectories are right-continuous and vanish
on ``t < 0``.

Besides sampling, each kernel reports what the stationary evaluation needs to
truncate the infinite sum over past epochs:

* :meth:`KernelSpec.support_bound` -- a deterministic bound on the absorption
  time, when one exists; epochs older than it never contribute.
* :meth:`KernelSpec.tail_bound` -- a bound on the total contribution of points
  whose age exceeds ``x``.
"""

import abc
import math
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, List, Optional, Sequence, Tuple, Type, Union

import numpy as np

from immigration.distributions import DISCRETE_FAMILIES, EtaLaw
from immigration.errors import DomainError, NonAbsorbedPathError

ArrayLike = Union[float, Sequence[float], np.ndarray]

# (1 - delta)-quantile of |eta| used as the majorant for excluded exp-decay terms
EXP_DECAY_QUANTILE_DELTA = 1e-6


def _as_array(t: ArrayLike):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _out(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


def _check_interval(lo: float, hi: float):
    if lo > hi:
        raise DomainError(f"empty interval [{lo}, {hi}]")


class PathSample(abc.ABC):
    """One sampled trajectory of a kernel, evaluable at arbitrary real times."""

    __slots__ = ()

    @abc.abstractmethod
    def value(self, t: ArrayLike):
        """Trajectory value at ``t`` (vectorised); exactly 0 for ``t < 0``."""

    @abc.abstractmethod
    def sup(self, lo: float, hi: float, right_open: bool = False) -> float:
        """``sup |X(t)|`` over ``[lo, hi]`` (or ``[lo, hi)`` when ``right_open``)."""

    @abc.abstractmethod
    def absorption_time(self) -> Optional[float]:
        """``inf{t >= 0: X(s) = 0 for all s >= t}`` or None if X never settles at 0."""

    def sups(self, edges: ArrayLike) -> np.ndarray:
        """``sup |X|`` over every half-open cell ``[edges[i], edges[i + 1])``."""
        edges = np.asarray(edges, dtype=float)
        return np.array(
            [self.sup(lo, hi, right_open=True) for lo, hi in zip(edges[:-1], edges[1:])]
        )


class StepPath(PathSample):
    """Right-continuous step function: ``values[i]`` on ``[breakpoints[i], breakpoints[i+1])``.

    The last value extends to infinity and the path is 0 before the first
    breakpoint. Evaluation is a binary search.
    """

    __slots__ = ("_breaks", "_values")

    def __init__(self, breakpoints: ArrayLike, values: ArrayLike, scale: float = 1.0):
        self._breaks = np.asarray(breakpoints, dtype=float)
        self._values = scale * np.asarray(values, dtype=float)
        self._breaks.setflags(write=False)
        self._values.setflags(write=False)

    @property
    def breakpoints(self) -> np.ndarray:
        return self._breaks

    @property
    def values(self) -> np.ndarray:
        return self._values

    def value(self, t):
        arr, scalar = _as_array(t)
        idx = np.searchsorted(self._breaks, arr, side="right") - 1
        out = np.where(idx >= 0, self._values[np.clip(idx, 0, None)], 0.0)
        out = np.where(arr < 0, 0.0, out)
        return _out(out, scalar)

    def _piece_range(self, lo, hi, right_open):
        i_lo = np.searchsorted(self._breaks, lo, side="right") - 1
        side = "left" if right_open else "right"
        i_hi = np.searchsorted(self._breaks, hi, side=side) - 1
        return np.maximum(i_lo, 0), i_hi

    def sup(self, lo, hi, right_open=False):
        _check_interval(lo, hi)
        lo = max(lo, 0.0)
        if hi < lo or (right_open and hi <= lo):
            return 0.0
        first, last = self._piece_range(lo, hi, right_open)
        if last < first:
            return 0.0
        return float(np.abs(self._values[first : last + 1]).max())

    def sups(self, edges):
        edges = np.asarray(edges, dtype=float)
        lo = np.maximum(edges[:-1], 0.0)
        hi = edges[1:]
        nonempty = hi > lo
        first, last = self._piece_range(lo, hi, right_open=True)
        out = np.zeros(len(lo))
        for j, v in enumerate(np.abs(self._values)):
            if v == 0:
                continue
            mask = nonempty & (first <= j) & (j <= last)
            out[mask] = np.maximum(out[mask], v)
        return out

    def absorption_time(self):
        if len(self._values) == 0:
            return 0.0
        if self._values[-1] != 0:
            return None
        nonzero = np.flatnonzero(self._values)
        if len(nonzero) == 0:
            return 0.0
        return float(self._breaks[nonzero[-1] + 1])

    def __repr__(self):
        return f"StepPath(breakpoints={self._breaks.tolist()}, values={self._values.tolist()})"


class IndicatorPath(PathSample):
    """``X(t) = 1{0 <= t < eta}``; the indicator is 1 on ``[0, eta)``."""

    __slots__ = ("eta",)

    def __init__(self, eta: float):
        self.eta = float(eta)

    def value(self, t):
        arr, scalar = _as_array(t)
        out = ((arr >= 0) & (arr < self.eta)).astype(float)
        return _out(out, scalar)

    def sup(self, lo, hi, right_open=False):
        _check_interval(lo, hi)
        lo = max(lo, 0.0)
        if hi < lo or (right_open and hi <= lo):
            return 0.0
        return 1.0 if lo < self.eta else 0.0

    def sups(self, edges):
        edges = np.asarray(edges, dtype=float)
        lo = np.maximum(edges[:-1], 0.0)
        hi = edges[1:]
        return ((hi > lo) & (lo < self.eta)).astype(float)

    def absorption_time(self):
        return max(self.eta, 0.0)

    def __repr__(self):
        return f"IndicatorPath(eta={self.eta!r})"


class ExpDecayPath(PathSample):
    """``X(t) = eta * exp(-a t)`` for ``t >= 0``."""

    __slots__ = ("eta", "a")

    def __init__(self, eta: float, a: float):
        self.eta = float(eta)
        self.a = float(a)

    def value(self, t):
        arr, scalar = _as_array(t)
        out = np.where(arr >= 0, self.eta * np.exp(-self.a * np.maximum(arr, 0.0)), 0.0)
        return _out(out, scalar)

    def sup(self, lo, hi, right_open=False):
        _check_interval(lo, hi)
        lo = max(lo, 0.0)
        if hi < lo or (right_open and hi <= lo):
            return 0.0
        # |X| is nonincreasing on [0, inf)
        return abs(self.eta) * math.exp(-self.a * lo)

    def sups(self, edges):
        edges = np.asarray(edges, dtype=float)
        lo = np.maximum(edges[:-1], 0.0)
        hi = edges[1:]
        return np.where(hi > lo, abs(self.eta) * np.exp(-self.a * lo), 0.0)

    def absorption_time(self):
        return 0.0 if self.eta == 0 else None

    def __repr__(self):
        return f"ExpDecayPath(eta={self.eta!r}, a={self.a!r})"


class SpikePath(PathSample):
    """``X(t) = sum_{k>=1} 1{k + k² eta / (k² + 1) <= t < k + eta}``.

    One spike of length ``eta / (k² + 1)`` per unit interval ``[k, k + 1)``.
    """

    __slots__ = ("eta",)

    def __init__(self, eta: float):
        self.eta = float(eta)

    def _spike(self, k):
        k2 = k * k
        return k + k2 * self.eta / (k2 + 1), k + self.eta

    def value(self, t):
        arr, scalar = _as_array(t)
        k = np.floor(arr)
        start, end = self._spike(k)
        out = ((k >= 1) & (arr >= start) & (arr < end)).astype(float)
        return _out(out, scalar)

    def sup(self, lo, hi, right_open=False):
        _check_interval(lo, hi)
        if self.eta <= 0:
            return 0.0
        k = max(1, int(math.floor(lo)))
        while k <= hi:
            start, end = self._spike(k)
            reaches = start < hi if right_open else start <= hi
            if reaches and end > lo:
                return 1.0
            k += 1
        return 0.0

    def absorption_time(self):
        return 0.0 if self.eta <= 0 else None

    def __repr__(self):
        return f"SpikePath(eta={self.eta!r})"


KERNELS: Dict[str, Type["KernelSpec"]] = {}


def _register(cls):
    KERNELS[cls.kind] = cls
    return cls


class KernelSpec(abc.ABC):
    """Law of the immigration process X."""

    kind: ClassVar[str]

    @abc.abstractmethod
    def sample_path(self, rng: np.random.Generator) -> PathSample:
        """Draw one independent trajectory."""

    def sample_paths(self, rng: np.random.Generator, n: int) -> List[PathSample]:
        return [self.sample_path(rng) for _ in range(n)]

    def support_bound(self) -> Optional[float]:
        """Deterministic bound on the absorption time, if any."""
        return None

    @abc.abstractmethod
    def tail_bound(self, x: float, mu: float, min_gap: float) -> float:
        """Bound on ``sum |X_k(age_k)|`` over stationary points with age beyond ``x``.

        Kernels with a deterministic support return 0 once ``x`` passes it.
        Otherwise the bound may hold in expectation only (Campbell): an
        :class:`Indicator` with unbounded ``eta`` reports
        ``E[(eta - x)^+] / mu``, which stays positive although every sampled
        path has finite support.

        Parameters
        ----------
        x : float
            Smallest excluded age.
        mu : float
            Mean interarrival time; the point intensity is ``1 / mu``.
        min_gap : float
            Smallest gap of the realised window.
        """

    @abc.abstractmethod
    def is_nonnegative(self) -> bool:
        """Whether every trajectory is ``>= 0``."""

    def fixed_discontinuities(self) -> Tuple[float, ...]:
        """Times at which a jump happens with positive probability."""
        return ()

    @abc.abstractmethod
    def to_config(self) -> Dict[str, Any]:
        pass

    @classmethod
    @abc.abstractmethod
    def _from_config(cls, config: Dict[str, Any]) -> "KernelSpec":
        pass

    @staticmethod
    def from_config(config: Dict[str, Any]) -> "KernelSpec":
        if not isinstance(config, dict):
            raise DomainError("kernel config must be an object")
        kind = config.get("kind")
        if kind not in KERNELS:
            raise DomainError(
                f"unknown kernel kind {kind!r}; expected one of {sorted(KERNELS)}", field="kind"
            )
        return KERNELS[kind]._from_config(config)


def _eta_field(config, name="eta") -> EtaLaw:
    if name not in config:
        raise DomainError(f"missing {name!r}", field=name)
    try:
        return EtaLaw.from_config(config[name])
    except DomainError as e:
        sub = f"{name}.{e.field}" if e.field else name
        raise DomainError(str(e), field=sub)


def _eta_nonnegative(eta: EtaLaw) -> bool:
    if eta.family in DISCRETE_FAMILIES:
        return float(eta.quantile(0.0)) >= 0
    return True


@_register
@dataclass(frozen=True)
class DeterministicTable(KernelSpec):
    """Deterministic step kernel ``f``.

    ``values[i]`` holds on ``[breakpoints[i], breakpoints[i + 1])``, the last
    value for ever after, and ``f = 0`` before ``breakpoints[0]``.
    """

    breakpoints: Tuple[float, ...]
    values: Tuple[float, ...]
    kind: ClassVar[str] = "table"
    _path: StepPath = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        breaks = tuple(float(b) for b in self.breakpoints)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", breaks)
        object.__setattr__(self, "values", values)
        if not breaks:
            raise DomainError("table needs at least one breakpoint", field="breakpoints")
        if len(breaks) != len(values):
            raise DomainError("breakpoints and values differ in length", field="values")
        if not all(math.isfinite(v) for v in breaks + values):
            raise DomainError("table entries must be finite", field="values")
        if breaks[0] < 0:
            raise DomainError("breakpoints must be non-negative", field="breakpoints")
        if any(b1 <= b0 for b0, b1 in zip(breaks, breaks[1:])):
            raise DomainError("breakpoints must be strictly increasing", field="breakpoints")
        object.__setattr__(self, "_path", StepPath(breaks, values))

    @classmethod
    def zero(cls) -> "DeterministicTable":
        return cls((0.0,), (0.0,))

    @classmethod
    def box(cls, lo: float, hi: float, height: float = 1.0) -> "DeterministicTable":
        """``height`` on ``[lo, hi)`` and 0 elsewhere."""
        return cls((lo, hi), (height, 0.0))

    @property
    def path(self) -> StepPath:
        return self._path

    def value(self, t):
        return self._path.value(t)

    def support_end(self) -> float:
        """Time after which ``f`` is identically 0 (``inf`` if never)."""
        tau = self._path.absorption_time()
        return math.inf if tau is None else tau

    def integral_abs(self, x: float) -> float:
        """``∫_x^∞ |f(s)| ds``."""
        breaks = np.array(self.breakpoints + (math.inf,))
        vals = np.abs(np.array(self.values))
        if vals[-1] != 0:
            return math.inf
        lo = np.maximum(breaks[:-1], x)
        hi = breaks[1:]
        widths = np.where(np.isfinite(hi), np.maximum(hi - lo, 0.0), 0.0)
        return float(np.dot(widths, vals))

    def sample_path(self, rng):
        return self._path

    def sample_paths(self, rng, n):
        return [self._path] * n

    def support_bound(self):
        end = self.support_end()
        return end if math.isfinite(end) else None

    def tail_bound(self, x, mu, min_gap):
        return self.integral_abs(max(x, 0.0)) / mu

    def is_nonnegative(self):
        return all(v >= 0 for v in self.values)

    def fixed_discontinuities(self):
        jumps = []
        previous = 0.0
        for b, v in zip(self.breakpoints, self.values):
            if v != previous:
                jumps.append(b)
            previous = v
        return tuple(jumps)

    def to_config(self):
        return {"kind": self.kind, "breakpoints": list(self.breakpoints), "values": list(self.values)}

    @classmethod
    def _from_config(cls, config):
        for name in ("breakpoints", "values"):
            if name not in config or not isinstance(config[name], (list, tuple)):
                raise DomainError(f"{name!r} must be a list", field=name)
        return cls(tuple(config["breakpoints"]), tuple(config["values"]))


@_register
@dataclass(frozen=True)
class Indicator(KernelSpec):
    """``X(t) = 1{eta > t}``: a server busy for a random time ``eta`` (GI/G/inf)."""

    eta: EtaLaw
    kind: ClassVar[str] = "indicator"

    def sample_path(self, rng):
        return IndicatorPath(self.eta.sample(rng))

    def sample_paths(self, rng, n):
        return [IndicatorPath(e) for e in self.eta.sample(rng, n)]

    def support_bound(self):
        bound = self.eta.upper_bound
        return max(bound, 0.0) if math.isfinite(bound) else None

    def tail_bound(self, x, mu, min_gap):
        if x >= self.eta.upper_bound:
            return 0.0
        # Campbell: expected number of points older than x still busy
        return self.eta.excess_mean(max(x, 0.0)) / mu

    def is_nonnegative(self):
        return True

    def fixed_discontinuities(self):
        if self.eta.family in DISCRETE_FAMILIES:
            return tuple(v for v, p in self.eta.atoms if v > 0 and p > 0)
        return ()

    def to_config(self):
        return {"kind": self.kind, "eta": self.eta.to_config()}

    @classmethod
    def _from_config(cls, config):
        return cls(_eta_field(config))


@_register
@dataclass(frozen=True)
class ScaledExpDecay(KernelSpec):
    """``X(t) = eta * exp(-a t)``, ``a > 0``; ``eta`` may be signed."""

    eta: EtaLaw
    a: float
    kind: ClassVar[str] = "exp_decay"

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        if not (self.a > 0 and math.isfinite(self.a)):
            raise DomainError("decay rate a must be positive", field="a")

    def sample_path(self, rng):
        return ExpDecayPath(self.eta.sample(rng), self.a)

    def sample_paths(self, rng, n):
        return [ExpDecayPath(e, self.a) for e in self.eta.sample(rng, n)]

    def tail_bound(self, x, mu, min_gap):
        """Geometric majorant of the excluded terms.

        Excluded points are at least ``min_gap`` apart and ``|eta|`` is replaced
        by its ``(1 - 1e-6)``-quantile, so the bound holds with probability at
        least ``1 - 1e-6`` per excluded point.
        """
        if not min_gap > 0:
            return math.inf
        q = self.eta.abs_quantile(1.0 - EXP_DECAY_QUANTILE_DELTA)
        return q * math.exp(-self.a * max(x, 0.0)) / -math.expm1(-self.a * min_gap)

    def is_nonnegative(self):
        return _eta_nonnegative(self.eta)

    def to_config(self):
        return {"kind": self.kind, "eta": self.eta.to_config(), "a": self.a}

    @classmethod
    def _from_config(cls, config):
        if "a" not in config:
            raise DomainError("missing 'a'", field="a")
        try:
            a = float(config["a"])
        except (TypeError, ValueError):
            raise DomainError("a must be a real number", field="a")
        return cls(_eta_field(config), a)


@_register
@dataclass(frozen=True)
class ScaledTable(KernelSpec):
    """``X(t) = eta * f(t)`` for a deterministic step function ``f``."""

    eta: EtaLaw
    table: DeterministicTable
    kind: ClassVar[str] = "scaled_table"

    def sample_path(self, rng):
        return StepPath(self.table.breakpoints, self.table.values, scale=self.eta.sample(rng))

    def sample_paths(self, rng, n):
        t = self.table
        return [StepPath(t.breakpoints, t.values, scale=e) for e in self.eta.sample(rng, n)]

    def support_bound(self):
        return self.table.support_bound()

    def tail_bound(self, x, mu, min_gap):
        integral = self.table.integral_abs(max(x, 0.0))
        if integral == 0:
            return 0.0
        return self.eta.abs_mean() * integral / mu

    def is_nonnegative(self):
        return _eta_nonnegative(self.eta) and self.table.is_nonnegative()

    def fixed_discontinuities(self):
        return self.table.fixed_discontinuities()

    def to_config(self):
        table = self.table.to_config()
        table.pop("kind")
        return {"kind": self.kind, "eta": self.eta.to_config(), "table": table}

    @classmethod
    def _from_config(cls, config):
        table = config.get("table")
        if not isinstance(table, dict):
            raise DomainError("missing 'table'", field="table")
        try:
            parsed = DeterministicTable._from_config(table)
        except DomainError as e:
            raise DomainError(str(e), field=f"table.{e.field}" if e.field else "table")
        return cls(_eta_field(config), parsed)


def _per_state(rates, state_cap, name) -> Tuple[float, ...]:
    if isinstance(rates, (int, float)):
        out = [float(rates)] * state_cap
    else:
        out = [float(r) for r in rates]
    if len(out) != state_cap:
        raise DomainError(f"{name} needs {state_cap} entries (states 1..state_cap)", field=name)
    if any(not math.isfinite(r) or r < 0 for r in out):
        raise DomainError(f"{name} must be non-negative and finite", field=name)
    return tuple(out)


@_register
@dataclass(frozen=True)
class BirthDeath(KernelSpec):
    """Birth-death chain started at ``initial`` and absorbed at 0.

    ``birth_rates[i - 1]`` and ``death_rates[i - 1]`` are the rates in state
    ``i``; births are suppressed at ``state_cap``. A path that has not been
    absorbed after ``max_jumps`` jumps or by time ``max_time`` raises
    :class:`~immigration.errors.NonAbsorbedPathError`.
    """

    initial: int
    birth_rates: Union[float, Tuple[float, ...]]
    death_rates: Union[float, Tuple[float, ...]]
    state_cap: int
    max_jumps: int = 100_000
    max_time: float = 100.0
    kind: ClassVar[str] = "birth_death"

    def __post_init__(self):
        cap = int(self.state_cap)
        if cap < 1:
            raise DomainError("state_cap must be at least 1", field="state_cap")
        if not 1 <= int(self.initial) <= cap:
            raise DomainError("initial must lie in 1..state_cap", field="initial")
        births = _per_state(self.birth_rates, cap, "birth_rates")
        deaths = _per_state(self.death_rates, cap, "death_rates")
        births = births[:-1] + (0.0,)
        if deaths[0] <= 0:
            raise DomainError("death rate in state 1 must be positive", field="death_rates")
        if any(b + d <= 0 for b, d in zip(births, deaths)):
            raise DomainError("every state needs a positive total rate", field="death_rates")
        if int(self.max_jumps) < 1:
            raise DomainError("max_jumps must be positive", field="max_jumps")
        if not float(self.max_time) > 0:
            raise DomainError("max_time must be positive", field="max_time")
        object.__setattr__(self, "initial", int(self.initial))
        object.__setattr__(self, "state_cap", cap)
        object.__setattr__(self, "birth_rates", births)
        object.__setattr__(self, "death_rates", deaths)
        object.__setattr__(self, "max_jumps", int(self.max_jumps))
        object.__setattr__(self, "max_time", float(self.max_time))

    def sample_path(self, rng):
        births = self.birth_rates
        deaths = self.death_rates
        state = self.initial
        now = 0.0
        times = [0.0]
        states = [state]
        while state > 0:
            if len(times) > self.max_jumps or now > self.max_time:
                partial = StepPath(times, states)
                raise NonAbsorbedPathError(
                    f"path not absorbed after {len(times) - 1} jumps by time {now:.6g}",
                    partial_path=partial,
                )
            b = births[state - 1]
            d = deaths[state - 1]
            now += rng.exponential(1.0 / (b + d))
            state = state + 1 if rng.random() < b / (b + d) else state - 1
            times.append(now)
            states.append(state)
        if now > self.max_time:
            raise NonAbsorbedPathError(
                f"path absorbed at {now:.6g}, beyond max_time {self.max_time}",
                partial_path=StepPath(times, states),
            )
        return StepPath(times, states)

    def support_bound(self):
        return self.max_time

    def tail_bound(self, x, mu, min_gap):
        return 0.0 if x >= self.max_time else math.inf

    def is_nonnegative(self):
        return True

    def to_config(self):
        return {
            "kind": self.kind,
            "initial": self.initial,
            "birth_rates": list(self.birth_rates),
            "death_rates": list(self.death_rates),
            "state_cap": self.state_cap,
            "max_jumps": self.max_jumps,
            "max_time": self.max_time,
        }

    @classmethod
    def _from_config(cls, config):
        kwargs = {}
        for name in ("initial", "birth_rates", "death_rates", "state_cap"):
            if name not in config:
                raise DomainError(f"missing {name!r}", field=name)
            kwargs[name] = config[name]
        for name in ("max_jumps", "max_time"):
            if name in config:
                kwargs[name] = config[name]
        for name in ("initial", "state_cap", "max_jumps"):
            if name in kwargs and (isinstance(kwargs[name], bool) or not isinstance(kwargs[name], int)):
                raise DomainError(f"{name} must be an integer", field=name)
        return cls(**kwargs)


@_register
@dataclass(frozen=True)
class SpikeTrain(KernelSpec):
    """Spike kernel with summable mean but non-summable path suprema.

    ``E X(t)`` peaks at ``(k² + 1)⁻¹`` on ``[k, k + 1)`` while every unit
    interval carries a spike almost surely.
    """

    eta: EtaLaw = field(default_factory=lambda: EtaLaw.uniform(0.0, 1.0))
    kind: ClassVar[str] = "spike_train"

    def __post_init__(self):
        if not (_eta_nonnegative(self.eta) and self.eta.upper_bound <= 1.0):
            raise DomainError("spike eta must take values in [0, 1]", field="eta")

    def sample_path(self, rng):
        return SpikePath(self.eta.sample(rng))

    def sample_paths(self, rng, n):
        return [SpikePath(e) for e in self.eta.sample(rng, n)]

    def tail_bound(self, x, mu, min_gap):
        k = max(1, int(math.floor(max(x, 0.0))))
        # sum_{j>=k} 1/(j²+1) <= 1/(k²+1) + 1/k
        return self.eta.mean() * (1.0 / (k * k + 1) + 1.0 / k) / mu

    def is_nonnegative(self):
        return True

    def to_config(self):
        return {"kind": self.kind, "eta": self.eta.to_config()}

    @classmethod
    def _from_config(cls, config):
        if "eta" not in config:
            return cls()
        return cls(_eta_field(config))


def kernel_from_config(config: Dict[str, Any]) -> KernelSpec:
    return KernelSpec.from_config(config)


def sample_path(spec: KernelSpec, rng: np.random.Generator) -> PathSample:
    return spec.sample_path(rng)


def eval_path(path: PathSample, t: ArrayLike):
    return path.value(t)


def sup_over_interval(path: PathSample, lo: float, hi: float, right_open: bool = False) -> float:
    return path.sup(lo, hi, right_open=right_open)


def absorption_time(path: PathSample) -> Optional[float]:
    return path.absorption_time()
