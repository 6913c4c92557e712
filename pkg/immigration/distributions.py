"""Parametric laws for interarrival times ξ and kernel marks η.

An :class:`InterarrivalLaw` is a positive law with finite mean; besides plain
sampling it knows how to draw from its size-biased version (the law of the
interval straddling the origin in the stationary renewal process) and how to
evaluate the integrated-tail CDF (the limit law of overshoot and undershoot).

An :class:`EtaLaw` is the law of the random mark of a kernel. It admits mass
at 0, signed atoms, and the heavy-tailed Pareto family.
"""

import math
from enum import Enum
from fractions import Fraction
from functools import reduce
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special, stats

from immigration.errors import DomainError

ArrayLike = Union[float, Sequence[float], np.ndarray]

PROBABILITY_TOLERANCE = 1e-12
LATTICE_MAX_DENOMINATOR = 1000
LATTICE_RELATIVE_TOLERANCE = 1e-9
QUAD_ABS_TOLERANCE = 1e-10


class Family(str, Enum):
    EXPONENTIAL = "exponential"
    GAMMA = "gamma"
    UNIFORM = "uniform"
    LOGNORMAL = "lognormal"
    POINT_MASS = "point_mass"
    FINITE_DISCRETE = "finite_discrete"
    PARETO = "pareto"


PARAMETERS: Dict[Family, Tuple[str, ...]] = {
    Family.EXPONENTIAL: ("rate",),
    Family.GAMMA: ("shape", "scale"),
    Family.UNIFORM: ("lo", "hi"),
    Family.LOGNORMAL: ("mu", "sigma"),
    Family.POINT_MASS: ("value",),
    Family.FINITE_DISCRETE: ("atoms",),
    Family.PARETO: ("alpha", "xm"),
}

DISCRETE_FAMILIES = {Family.POINT_MASS, Family.FINITE_DISCRETE}


class StationaryDelay(NamedTuple):
    """One draw of the straddling interval: ``s0 = u * xi0``."""

    s0: Union[float, np.ndarray]
    xi0: Union[float, np.ndarray]
    u: Union[float, np.ndarray]

    @property
    def undershoot(self):
        """Distance from the origin back to the last point before it."""
        return self.xi0 - self.s0


def _as_float_array(x: ArrayLike) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _maybe_scalar(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


class _Law:
    """Shared machinery of interarrival and mark laws.

    Subclasses restrict the admissible families and parameter ranges through
    ``_families`` and ``_validate``.
    """

    _families: Tuple[Family, ...] = tuple(Family)

    def __init__(self, family: Union[str, Family], **params: Any):
        try:
            self.family = Family(family)
        except ValueError:
            raise DomainError(f"unknown law family {family!r}", field="family")
        if self.family not in self._families:
            raise DomainError(
                f"family {self.family.value!r} is not allowed for {type(self).__name__}",
                field="family",
            )
        expected = PARAMETERS[self.family]
        missing = [p for p in expected if p not in params]
        extra = [p for p in params if p not in expected]
        if missing:
            raise DomainError(f"missing parameter {missing[0]!r}", field=missing[0])
        if extra:
            raise DomainError(f"unexpected parameter {extra[0]!r}", field=extra[0])

        if self.family == Family.FINITE_DISCRETE:
            atoms = params["atoms"]
            try:
                pairs = [(float(v), float(p)) for v, p in atoms]
            except (TypeError, ValueError):
                raise DomainError("atoms must be a list of (value, probability) pairs", field="atoms")
            if not pairs:
                raise DomainError("atoms must not be empty", field="atoms")
            pairs.sort()
            self._values = np.array([v for v, _ in pairs])
            self._probs = np.array([p for _, p in pairs])
            self.params: Dict[str, Any] = {"atoms": pairs}
        else:
            try:
                self.params = {k: float(params[k]) for k in expected}
            except (TypeError, ValueError):
                raise DomainError(f"parameters of {self.family.value} must be real numbers")
            for k, v in self.params.items():
                if not math.isfinite(v):
                    raise DomainError(f"{k} must be finite, got {v}", field=k)
            if self.family == Family.POINT_MASS:
                self._values = np.array([self.params["value"]])
                self._probs = np.array([1.0])
        self._validate()

    # construction helpers

    @classmethod
    def exponential(cls, rate: float):
        return cls(Family.EXPONENTIAL, rate=rate)

    @classmethod
    def gamma(cls, shape: float, scale: float):
        return cls(Family.GAMMA, shape=shape, scale=scale)

    @classmethod
    def uniform(cls, lo: float, hi: float):
        return cls(Family.UNIFORM, lo=lo, hi=hi)

    @classmethod
    def lognormal(cls, mu: float, sigma: float):
        return cls(Family.LOGNORMAL, mu=mu, sigma=sigma)

    @classmethod
    def point_mass(cls, value: float):
        return cls(Family.POINT_MASS, value=value)

    @classmethod
    def finite_discrete(cls, atoms: Sequence[Tuple[float, float]]):
        return cls(Family.FINITE_DISCRETE, atoms=atoms)

    @classmethod
    def pareto(cls, alpha: float, xm: float):
        return cls(Family.PARETO, alpha=alpha, xm=xm)

    def _validate(self):
        p = self.params
        fam = self.family
        if fam == Family.EXPONENTIAL and p["rate"] <= 0:
            raise DomainError("rate must be positive", field="rate")
        if fam == Family.GAMMA:
            if p["shape"] <= 0:
                raise DomainError("shape must be positive", field="shape")
            if p["scale"] <= 0:
                raise DomainError("scale must be positive", field="scale")
        if fam == Family.UNIFORM:
            if p["lo"] < 0:
                raise DomainError("lo must be non-negative", field="lo")
            if p["hi"] <= p["lo"]:
                raise DomainError("hi must exceed lo", field="hi")
        if fam == Family.LOGNORMAL and p["sigma"] <= 0:
            raise DomainError("sigma must be positive", field="sigma")
        if fam == Family.PARETO:
            if p["alpha"] <= 0:
                raise DomainError("alpha must be positive", field="alpha")
            if p["xm"] <= 0:
                raise DomainError("xm must be positive", field="xm")
        if fam == Family.FINITE_DISCRETE:
            if np.any(self._probs < 0):
                raise DomainError("probabilities must be non-negative", field="atoms")
            if abs(self._probs.sum() - 1.0) > PROBABILITY_TOLERANCE:
                raise DomainError(
                    f"probabilities sum to {self._probs.sum()!r}, not 1", field="atoms"
                )
            if not np.all(np.isfinite(self._values)):
                raise DomainError("atom values must be finite", field="atoms")

    # serialization

    def to_config(self) -> Dict[str, Any]:
        config: Dict[str, Any] = {"family": self.family.value}
        if self.family == Family.FINITE_DISCRETE:
            config["atoms"] = [[v, p] for v, p in self.params["atoms"]]
        else:
            config.update(self.params)
        return config

    @classmethod
    def from_config(cls, config: Dict[str, Any]):
        if not isinstance(config, dict):
            raise DomainError("law config must be an object")
        if "family" not in config:
            raise DomainError("missing 'family'", field="family")
        params = {k: v for k, v in config.items() if k != "family"}
        return cls(config["family"], **params)

    def __eq__(self, other):
        return type(self) is type(other) and self.to_config() == other.to_config()

    def __hash__(self):
        return hash((type(self).__name__, repr(self.to_config())))

    def __repr__(self):
        if self.family == Family.FINITE_DISCRETE:
            args = f"atoms={self.params['atoms']}"
        else:
            args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({self.family.value}, {args})"

    # analytic quantities

    def _frozen(self):
        p = self.params
        fam = self.family
        if fam == Family.EXPONENTIAL:
            return stats.expon(scale=1.0 / p["rate"])
        if fam == Family.GAMMA:
            return stats.gamma(a=p["shape"], scale=p["scale"])
        if fam == Family.UNIFORM:
            return stats.uniform(loc=p["lo"], scale=p["hi"] - p["lo"])
        if fam == Family.LOGNORMAL:
            return stats.lognorm(s=p["sigma"], scale=math.exp(p["mu"]))
        if fam == Family.PARETO:
            return stats.pareto(b=p["alpha"], scale=p["xm"])
        raise AssertionError(fam)

    def mean(self) -> float:
        """Exact mean of the law (``inf`` for Pareto with ``alpha <= 1``)."""
        p = self.params
        fam = self.family
        if fam == Family.EXPONENTIAL:
            return 1.0 / p["rate"]
        if fam == Family.GAMMA:
            return p["shape"] * p["scale"]
        if fam == Family.UNIFORM:
            return 0.5 * (p["lo"] + p["hi"])
        if fam == Family.LOGNORMAL:
            return math.exp(p["mu"] + 0.5 * p["sigma"] ** 2)
        if fam == Family.PARETO:
            a = p["alpha"]
            return math.inf if a <= 1 else a * p["xm"] / (a - 1)
        return float(np.dot(self._values, self._probs))

    def second_moment(self) -> float:
        p = self.params
        fam = self.family
        if fam == Family.EXPONENTIAL:
            return 2.0 / p["rate"] ** 2
        if fam == Family.GAMMA:
            k, theta = p["shape"], p["scale"]
            return k * (k + 1) * theta**2
        if fam == Family.UNIFORM:
            lo, hi = p["lo"], p["hi"]
            return (lo * lo + lo * hi + hi * hi) / 3.0
        if fam == Family.LOGNORMAL:
            return math.exp(2 * p["mu"] + 2 * p["sigma"] ** 2)
        if fam == Family.PARETO:
            a = p["alpha"]
            return math.inf if a <= 2 else a * p["xm"] ** 2 / (a - 2)
        return float(np.dot(self._values**2, self._probs))

    def variance(self) -> float:
        return self.second_moment() - self.mean() ** 2

    def cdf(self, x: ArrayLike):
        arr, scalar = _as_float_array(x)
        if self.family in DISCRETE_FAMILIES:
            cum = np.concatenate([[0.0], np.cumsum(self._probs)])
            out = cum[np.searchsorted(self._values, arr, side="right")]
            out = np.minimum(out, 1.0)
        else:
            out = self._frozen().cdf(arr)
        return _maybe_scalar(np.asarray(out, dtype=float), scalar)

    def survival(self, x: ArrayLike):
        arr, scalar = _as_float_array(x)
        if self.family in DISCRETE_FAMILIES:
            out = 1.0 - np.asarray(self.cdf(arr), dtype=float)
            out = np.maximum(out, 0.0)
        else:
            out = self._frozen().sf(arr)
        return _maybe_scalar(np.asarray(out, dtype=float), scalar)

    def quantile(self, q: ArrayLike):
        arr, scalar = _as_float_array(q)
        if np.any((arr < 0) | (arr > 1)):
            raise DomainError("quantile level must lie in [0, 1]")
        if self.family in DISCRETE_FAMILIES:
            cum = np.cumsum(self._probs)
            idx = np.searchsorted(cum, arr - PROBABILITY_TOLERANCE, side="left")
            out = self._values[np.clip(idx, 0, len(self._values) - 1)]
        else:
            out = self._frozen().ppf(arr)
        return _maybe_scalar(np.asarray(out, dtype=float), scalar)

    def expected_min(self, x: ArrayLike):
        """``E[min(max(X, 0), x)]``, i.e. the integral of the tail over ``[0, x]``."""
        arr, scalar = _as_float_array(x)
        if np.any(arr < 0):
            raise DomainError("x must be non-negative", field="x")
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self._expected_min(arr)
        if self.family not in DISCRETE_FAMILIES:
            out = np.where(np.isposinf(arr), self.mean(), out)
        return _maybe_scalar(np.asarray(out, dtype=float), scalar)

    def _expected_min(self, arr: np.ndarray):
        p = self.params
        fam = self.family
        if fam == Family.EXPONENTIAL:
            rate = p["rate"]
            out = -np.expm1(-rate * arr) / rate
        elif fam == Family.GAMMA:
            k, theta = p["shape"], p["scale"]
            out = k * theta * special.gammainc(k + 1, arr / theta) + arr * special.gammaincc(
                k, arr / theta
            )
        elif fam == Family.UNIFORM:
            lo, hi = p["lo"], p["hi"]
            width = hi - lo
            inside = lo + (width**2 - (hi - arr) ** 2) / (2 * width)
            out = np.where(arr <= lo, arr, np.where(arr >= hi, 0.5 * (lo + hi), inside))
        elif fam == Family.LOGNORMAL:
            m, s = p["mu"], p["sigma"]
            log_x = np.log(arr)
            partial = math.exp(m + 0.5 * s * s) * special.ndtr((log_x - m - s * s) / s)
            out = partial + arr * special.ndtr(-(log_x - m) / s)
            out = np.where(arr > 0, out, 0.0)
        elif fam == Family.PARETO:
            a, xm = p["alpha"], p["xm"]
            safe = np.maximum(arr, xm)
            if a == 1:
                beyond = xm + xm * np.log(safe / xm)
            else:
                beyond = xm + xm**a * (safe ** (1 - a) - xm ** (1 - a)) / (1 - a)
            out = np.where(arr <= xm, arr, beyond)
        else:
            positive = np.maximum(self._values, 0.0)
            out = np.minimum(positive[None, :], arr.reshape(-1, 1)) @ self._probs
            out = out.reshape(arr.shape)
        return out

    # sampling

    def sample(self, rng: np.random.Generator, size: Optional[int] = None):
        """I.i.d. draws; a python float when ``size`` is None."""
        p = self.params
        fam = self.family
        if fam == Family.EXPONENTIAL:
            out = rng.exponential(1.0 / p["rate"], size)
        elif fam == Family.GAMMA:
            out = rng.gamma(p["shape"], p["scale"], size)
        elif fam == Family.UNIFORM:
            # 1 - U lies in (0, 1], keeping draws strictly above lo
            out = p["lo"] + (p["hi"] - p["lo"]) * (1.0 - rng.random(size))
        elif fam == Family.LOGNORMAL:
            out = rng.lognormal(p["mu"], p["sigma"], size)
        elif fam == Family.PARETO:
            out = p["xm"] * (1.0 + rng.pareto(p["alpha"], size))
        elif fam == Family.POINT_MASS:
            out = p["value"] if size is None else np.full(size, p["value"])
        else:
            out = rng.choice(self._values, size=size, p=self._probs)
        return float(out) if size is None else np.asarray(out, dtype=float)

    # lattice structure

    @property
    def lattice_span(self) -> Optional[float]:
        """Span ``d`` of the lattice ``dZ`` carrying the law, or None when nonlattice.

        Atoms are declared commensurable when every ratio to the smallest
        positive atom is within a relative 1e-9 of a fraction with denominator
        at most ``LATTICE_MAX_DENOMINATOR`` (1000). A cap of 10^6 would make
        every ratio commensurable at that tolerance, since continued fractions
        with denominators near 10^6 approximate any real to about 1e-12; atoms
        such as ``(1, 1.0001)`` (denominator 10^4) therefore count as nonlattice.
        """
        if self.family not in DISCRETE_FAMILIES:
            return None
        values = np.abs(self._values[(self._probs > 0) & (self._values != 0)])
        if len(values) == 0:
            return None
        base = float(values.min())
        fractions: List[Fraction] = []
        for v in values:
            ratio = float(v) / base
            frac = Fraction(ratio).limit_denominator(LATTICE_MAX_DENOMINATOR)
            if abs(float(frac) - ratio) > LATTICE_RELATIVE_TOLERANCE * ratio:
                return None
            fractions.append(frac)
        common = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fractions))
        numerators = [int(f * common) for f in fractions]
        return base * reduce(math.gcd, numerators) / common

    @property
    def is_lattice(self) -> bool:
        return self.lattice_span is not None

    @property
    def atoms(self) -> List[Tuple[float, float]]:
        """``(value, probability)`` pairs of a discrete law, empty otherwise."""
        if self.family not in DISCRETE_FAMILIES:
            return []
        return [(float(v), float(p)) for v, p in zip(self._values, self._probs)]


class InterarrivalLaw(_Law):
    """Positive law of the renewal increments ξ with finite mean μ."""

    _families = (
        Family.EXPONENTIAL,
        Family.GAMMA,
        Family.UNIFORM,
        Family.LOGNORMAL,
        Family.POINT_MASS,
        Family.FINITE_DISCRETE,
    )

    def _validate(self):
        super()._validate()
        if self.family in DISCRETE_FAMILIES:
            if np.any(self._values <= 0):
                field = "value" if self.family == Family.POINT_MASS else "atoms"
                raise DomainError("interarrival atoms must be positive", field=field)
        mu = self.mean()
        if not (math.isfinite(mu) and mu > 0):
            raise DomainError(f"interarrival mean must be finite and positive, got {mu}")

    def sample_size_biased(self, rng: np.random.Generator, size: Optional[int] = None):
        """Draw ξ₀ from ``P{ξ₀ ∈ dx} = x P{ξ ∈ dx} / μ``.

        Every family has an exact sampler: the conjugate shape shift for
        exponential and gamma laws, inverse transform of the density
        ``2x / (hi² - lo²)`` for uniform laws, the mean shift
        ``LogNormal(mu + sigma², sigma)`` for log-normal laws, and reweighted
        atoms for discrete laws.
        """
        p = self.params
        fam = self.family
        if fam == Family.EXPONENTIAL:
            out = rng.gamma(2.0, 1.0 / p["rate"], size)
        elif fam == Family.GAMMA:
            out = rng.gamma(p["shape"] + 1.0, p["scale"], size)
        elif fam == Family.UNIFORM:
            lo, hi = p["lo"], p["hi"]
            v = 1.0 - rng.random(size)
            out = np.sqrt(lo * lo + v * (hi * hi - lo * lo))
        elif fam == Family.LOGNORMAL:
            out = rng.lognormal(p["mu"] + p["sigma"] ** 2, p["sigma"], size)
        elif fam == Family.POINT_MASS:
            out = p["value"] if size is None else np.full(size, p["value"])
        else:
            weights = self._values * self._probs
            out = rng.choice(self._values, size=size, p=weights / weights.sum())
        return float(out) if size is None else np.asarray(out, dtype=float)

    def sample_stationary_delay(
        self, rng: np.random.Generator, size: Optional[int] = None
    ) -> StationaryDelay:
        """Draw ``(s0, xi0, u)`` with ξ₀ size-biased, ``u ~ U[0, 1)`` and ``s0 = u ξ₀``.

        ``s0`` follows the integrated-tail law; ``xi0 - s0`` is the matching
        undershoot, which has the same law. ``s0`` is taken as
        ``xi0 - (xi0 - u * xi0)``, which agrees with ``u * xi0`` to within one ulp of ``xi0`` and
        makes ``s0 + undershoot == xi0`` hold exactly in floating point.
        """
        xi0 = self.sample_size_biased(rng, size)
        u = rng.random(size)
        if size is None:
            u = float(u)
        # both subtractions are exact (Sterbenz), so s0 + gap == xi0 bit for bit
        gap = xi0 - u * xi0
        s0 = xi0 - gap
        return StationaryDelay(s0=s0, xi0=xi0, u=u)

    def integrated_tail_cdf(self, x: ArrayLike, method: str = "closed"):
        """Integrated-tail CDF ``F*(x) = μ⁻¹ ∫₀ˣ P{ξ > y} dy``.

        Parameters
        ----------
        x : float or array
            Non-negative evaluation point(s).
        method : {"closed", "quad"}
            Closed form per family, or adaptive quadrature of the survival
            function (absolute error below 1e-10).
        """
        arr, scalar = _as_float_array(x)
        if np.any(arr < 0):
            raise DomainError("integrated tail CDF is defined for x >= 0", field="x")
        mu = self.mean()
        if method == "closed":
            out = np.asarray(self.expected_min(arr), dtype=float) / mu
        elif method == "quad":
            breaks = None
            if self.family in DISCRETE_FAMILIES:
                breaks = list(self._values)
            flat = [
                integrate.quad(
                    self.survival,
                    0.0,
                    float(v),
                    epsabs=QUAD_ABS_TOLERANCE * mu,
                    epsrel=0.0,
                    limit=200,
                    points=([b for b in breaks if 0 < b < v] or None) if breaks else None,
                )[0]
                if v > 0
                else 0.0
                for v in arr.ravel()
            ]
            out = np.asarray(flat).reshape(arr.shape) / mu
        else:
            raise DomainError(f"unknown method {method!r}", field="method")
        return _maybe_scalar(np.clip(out, 0.0, 1.0), scalar)


class EtaLaw(_Law):
    """Law of the kernel mark η.

    Same families as :class:`InterarrivalLaw` plus Pareto; point masses and
    discrete atoms may be zero or negative, and the mean may be infinite.
    """

    def abs_mean(self) -> float:
        if self.family in DISCRETE_FAMILIES:
            return float(np.dot(np.abs(self._values), self._probs))
        return self.mean()

    def abs_quantile(self, q: float) -> float:
        """Quantile of ``|η|`` at level ``q``."""
        if not 0 <= q <= 1:
            raise DomainError("quantile level must lie in [0, 1]")
        if self.family in DISCRETE_FAMILIES:
            values = np.abs(self._values)
            order = np.argsort(values)
            cum = np.cumsum(self._probs[order])
            idx = int(np.searchsorted(cum, q - PROBABILITY_TOLERANCE, side="left"))
            return float(values[order][min(idx, len(values) - 1)])
        return float(self.quantile(q))

    def excess_mean(self, x: float) -> float:
        """``E[(η - x)⁺]`` for ``x >= 0``; infinite when ``E[η⁺]`` is."""
        if x < 0:
            raise DomainError("x must be non-negative", field="x")
        if self.family in DISCRETE_FAMILIES:
            return float(np.dot(np.maximum(self._values - x, 0.0), self._probs))
        mean = self.mean()
        if not math.isfinite(mean):
            return math.inf
        return max(mean - float(self.expected_min(x)), 0.0)

    @property
    def upper_bound(self) -> float:
        """Essential supremum of η (``inf`` for unbounded families)."""
        if self.family in DISCRETE_FAMILIES:
            return float(self._values[self._probs > 0].max())
        if self.family == Family.UNIFORM:
            return self.params["hi"]
        return math.inf


def law_from_config(config: Dict[str, Any]) -> InterarrivalLaw:
    return InterarrivalLaw.from_config(config)


def eta_from_config(config: Dict[str, Any]) -> EtaLaw:
    return EtaLaw.from_config(config)
