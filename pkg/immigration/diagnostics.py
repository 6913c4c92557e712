"""Numerical evidence for the hypotheses and limit claims of the model.

* dRi checks estimate the per-unit-interval terms of the mean criterion
  ``sum_k sup_{t in [k, k+1)} E[|X(t)| ∧ 1]`` and of the path criterion
  ``sum_k E[sup_{t in [k, k+1)} |X(t)| ∧ 1]`` and read a verdict off them.
* Point-process checks compare the stationary renewal window with its intensity,
  shift invariance and the overshoot law, and compare the Laplace functionals
  of the transient and stationary point sets.
* :func:`convergence_test` compares transient fdd samples against stationary
  ones for a list of times ``t``.

Verdicts and decisions are evidence, never proofs; hypothesis violations are
reported as warnings so that the counterexample runs complete.
"""

import math
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import stats as sps

from immigration import stats
from immigration.distributions import Family, InterarrivalLaw
from immigration.errors import DomainError, NonAbsorbedPathError, TruncationError
from immigration.kernels import DeterministicTable, Indicator, KernelSpec
from immigration.process import DEFAULT_TOL, Stationary, Transient, fdd_sample
from immigration.renewal import build_stationary_window, shift_window, simulate_forward
from immigration.utils.logging_utils import get_logger
from immigration.utils.rng import (
    PERMUTATION_KEY,
    PRECHECK_KEY,
    STATIONARY_KEY,
    TRANSIENT_KEY,
    make_stream,
    split,
)

DEFAULT_ALPHA = 0.01
DEFAULT_PERMUTATIONS = 200
CI_LEVEL = 0.99
# the overshoot law is only approached for horizons well beyond the mean
MIN_OVERSHOOT_HORIZON_MEANS = 20.0

# verdict thresholds
GEOMETRIC_RATIO_MAX = 0.99
GEOMETRIC_RESIDUAL_FRACTION = 1e-3
POWER_LAW_MIN_EXPONENT = 1.5
POWER_LAW_RESIDUAL_FRACTION = 0.1
DIVERGENT_LOG_SLOPE = 0.5

# hypothesis pre-check of convergence_test
PRECHECK_K_MAX = 50
PRECHECK_GRID = 4
PRECHECK_N_MC = 2000


class Verdict(str, Enum):
    CONVERGENT = "ConvergentEvidence"
    DIVERGENT = "DivergentEvidence"
    INCONCLUSIVE = "Inconclusive"


class DriReport(NamedTuple):
    criterion: str
    terms: np.ndarray
    std_errors: np.ndarray
    partial_sums: np.ndarray
    verdict: Verdict
    k_max: int
    n_mc: int
    fit: Dict[str, Any]
    grid_per_unit: Optional[int] = None

    def to_json(self):
        return {
            "criterion": self.criterion,
            "verdict": self.verdict.value,
            "k_max": self.k_max,
            "n_mc": self.n_mc,
            "grid_per_unit": self.grid_per_unit,
            "fit": self.fit,
            "terms": self.terms,
            "std_errors": self.std_errors,
            "partial_sums": self.partial_sums,
        }


def _log_fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    slope, intercept = np.polyfit(x, np.log(y), 1)
    return float(slope), float(intercept)


def dri_verdict(terms: Sequence[float]) -> Tuple[Verdict, Dict[str, Any]]:
    """Read a verdict off nonnegative per-interval terms ``a_0, ..., a_{K-1}``.

    Rules, in order:

    1. all terms zero, or the last ``max(2, K // 4)`` terms zero: convergent;
    2. a log-linear fit of the positive terms of the second half gives a ratio
       ``r < 0.99`` whose extrapolated remainder is below ``1e-3`` of the
       partial sum: convergent;
    3. a power-law fit ``a_k ~ k^(-p)`` of the same terms gives ``p >= 1.5``
       with extrapolated remainder below 10% of the partial sum: convergent;
    4. the partial sums grow at least like ``0.5 log k`` over the second half:
       divergent;
    5. otherwise inconclusive.
    """
    a = np.asarray(terms, dtype=float)
    K = len(a)
    partial = np.cumsum(a)
    total = float(partial[-1]) if K else 0.0
    fit: Dict[str, Any] = {}
    if total == 0 or np.all(a[-max(2, K // 4):] == 0):
        fit["rule"] = "zero_tail"
        return Verdict.CONVERGENT, fit

    k = np.arange(K)
    half = k >= K // 2
    positive = half & (a > 0) & (k >= 1)
    if positive.sum() >= 3:
        kk = k[positive].astype(float)
        yy = a[positive]
        slope, intercept = _log_fit(kk, yy)
        r = math.exp(slope)
        fit["geometric_ratio"] = r
        if r < GEOMETRIC_RATIO_MAX:
            last = math.exp(intercept + slope * (K - 1))
            remainder = last * r / (1 - r)
            fit["geometric_remainder"] = remainder
            if remainder < GEOMETRIC_RESIDUAL_FRACTION * total:
                fit["rule"] = "geometric"
                return Verdict.CONVERGENT, fit
        slope, intercept = _log_fit(np.log(kk), yy)
        p = -slope
        fit["power_exponent"] = p
        if p >= POWER_LAW_MIN_EXPONENT:
            last = math.exp(intercept) * (K - 1) ** slope
            remainder = last * (K - 1) / (p - 1)
            fit["power_remainder"] = remainder
            if remainder < POWER_LAW_RESIDUAL_FRACTION * total:
                fit["rule"] = "power_law"
                return Verdict.CONVERGENT, fit

    if half.sum() >= 2:
        log_k = np.log(k[half] + 1.0)
        growth = float(np.polyfit(log_k, partial[half], 1)[0])
        fit["log_slope"] = growth
        if growth >= DIVERGENT_LOG_SLOPE:
            fit["rule"] = "log_growth"
            return Verdict.DIVERGENT, fit
    fit["rule"] = "none"
    return Verdict.INCONCLUSIVE, fit


def _check_dri_args(k_max: int, n_mc: int):
    if k_max < 1:
        raise DomainError("k_max must be at least 1", field="k_max")
    if n_mc < 1:
        raise DomainError("n_mc must be at least 1", field="n_mc")


def _report(criterion, sums, squares, n_mc, k_max, grid_per_unit=None) -> DriReport:
    terms = sums / n_mc
    var = np.maximum(squares / n_mc - terms**2, 0.0)
    std_errors = np.sqrt(var / n_mc)
    verdict, fit = dri_verdict(terms)
    get_logger().info(f"dRi {criterion} criterion: {verdict.value} ({fit.get('rule')})")
    return DriReport(
        criterion=criterion,
        terms=terms,
        std_errors=std_errors,
        partial_sums=np.cumsum(terms),
        verdict=verdict,
        k_max=k_max,
        n_mc=n_mc,
        fit=fit,
        grid_per_unit=grid_per_unit,
    )


def dri_mean_check(
    spec: KernelSpec, k_max: int, grid_per_unit: int, n_mc: int, rng: np.random.Generator
) -> DriReport:
    """Mean criterion: per-k term ``max_j E[|X(k + j/G)| ∧ 1]`` over ``G`` grid points."""
    _check_dri_args(k_max, n_mc)
    if grid_per_unit < 2:
        raise DomainError("grid_per_unit must be at least 2", field="grid_per_unit")
    grid = (np.arange(k_max)[:, None] + np.arange(grid_per_unit)[None, :] / grid_per_unit).ravel()
    sums = np.zeros(len(grid))
    squares = np.zeros(len(grid))
    for path in spec.sample_paths(rng, n_mc):
        v = np.minimum(np.abs(path.value(grid)), 1.0)
        sums += v
        squares += v * v
    means = (sums / n_mc).reshape(k_max, grid_per_unit)
    best = means.argmax(axis=1)
    rows = np.arange(k_max)
    sums = sums.reshape(k_max, grid_per_unit)[rows, best]
    squares = squares.reshape(k_max, grid_per_unit)[rows, best]
    return _report("mean", sums, squares, n_mc, k_max, grid_per_unit)


def dri_path_check(
    spec: KernelSpec, k_max: int, n_mc: int, rng: np.random.Generator
) -> DriReport:
    """Path criterion: per-k term ``E[sup_{[k, k+1)} |X| ∧ 1]``."""
    _check_dri_args(k_max, n_mc)
    edges = np.arange(k_max + 1, dtype=float)
    sums = np.zeros(k_max)
    squares = np.zeros(k_max)
    for path in spec.sample_paths(rng, n_mc):
        v = np.minimum(path.sups(edges), 1.0)
        sums += v
        squares += v * v
    return _report("path", sums, squares, n_mc, k_max)


class LaplaceComparison(NamedTuple):
    transient_estimate: float
    stationary_estimate: float
    transient_halfwidth: float
    stationary_halfwidth: float
    t: float
    n_mc: int
    reference: Optional[float] = None
    warnings: Tuple[str, ...] = ()

    @property
    def ci_halfwidths(self) -> Tuple[float, float]:
        return self.transient_halfwidth, self.stationary_halfwidth

    def to_json(self):
        return dict(self._asdict(), warnings=list(self.warnings))


def _lattice_warning(law: InterarrivalLaw) -> Optional[str]:
    if law.is_lattice:
        msg = f"interarrival law {law!r} is lattice (span {law.lattice_span:.6g}); limit theorems assume a nonlattice law"
        get_logger().warning(msg)
        return msg
    return None


def _check_test_function(h: DeterministicTable) -> float:
    if not isinstance(h, DeterministicTable):
        raise DomainError("h must be a DeterministicTable", field="h")
    if not h.is_nonnegative():
        raise DomainError("h must be non-negative", field="h")
    support = h.support_end()
    if not math.isfinite(support):
        raise DomainError("h must have compact support", field="h")
    return support


def poisson_laplace_reference(h: DeterministicTable, rate: float) -> float:
    """``E exp(-sum_j h(P_j))`` for a homogeneous Poisson process of intensity ``rate``.

    Equals ``exp(-rate * ∫ (1 - e^{-h(x)}) dx)``, integrated exactly over the steps of ``h``.
    """
    support = _check_test_function(h)
    breaks = np.array(h.breakpoints + (max(support, h.breakpoints[-1]),))
    widths = np.diff(breaks)
    exponent = float(np.dot(widths, -np.expm1(-np.array(h.values))))
    return math.exp(-rate * exponent)


def _mean_halfwidth(x: np.ndarray) -> Tuple[float, float]:
    z = sps.norm.ppf(0.5 + CI_LEVEL / 2)
    sd = float(x.std(ddof=1)) if len(x) > 1 else 0.0
    return float(x.mean()), z * sd / math.sqrt(len(x))


def laplace_functional_compare(
    law: InterarrivalLaw,
    h: DeterministicTable,
    t: float,
    n_mc: int,
    rng: np.random.Generator,
) -> LaplaceComparison:
    """Estimate ``E exp(-sum_{k>=0} h(t - S_k))`` and ``E exp(-sum_j h(S*_j))``.

    Both estimates come with 99% CLT half-widths. For exponential laws the
    Poisson reference value is attached.
    """
    support = _check_test_function(h)
    if n_mc < 1:
        raise DomainError("n_mc must be at least 1", field="n_mc")
    warnings = []
    lattice = _lattice_warning(law)
    if lattice:
        warnings.append(lattice)

    transient_rng, stationary_rng = split(rng, 2)
    transient = np.empty(n_mc)
    stationary = np.empty(n_mc)
    reach = max(support, 0.0)
    c = max(reach, law.mean())
    for i in range(n_mc):
        if support == 0:
            transient[i] = stationary[i] = 1.0
            continue
        epochs = simulate_forward(law, t, transient_rng).epochs if t >= 0 else np.empty(0)
        ages = t - epochs[epochs > t - reach]
        transient[i] = math.exp(-float(np.sum(h.value(ages))))
        points = build_stationary_window(law, c, stationary_rng).points
        inside = points[(points >= 0) & (points < reach)]
        stationary[i] = math.exp(-float(np.sum(h.value(inside))))

    t_est, t_hw = _mean_halfwidth(transient)
    s_est, s_hw = _mean_halfwidth(stationary)
    reference = None
    if law.family == Family.EXPONENTIAL:
        reference = poisson_laplace_reference(h, law.params["rate"])
    return LaplaceComparison(
        transient_estimate=t_est,
        stationary_estimate=s_est,
        transient_halfwidth=t_hw,
        stationary_halfwidth=s_hw,
        t=float(t),
        n_mc=n_mc,
        reference=reference,
        warnings=tuple(warnings),
    )


class IntensityResult(NamedTuple):
    a: float
    b: float
    empirical_mean: float
    expected: float
    z_score: float


def intensity_check(
    law: InterarrivalLaw,
    intervals: Sequence[Tuple[float, float]],
    n_windows: int,
    rng: np.random.Generator,
) -> List[IntensityResult]:
    """Mean number of stationary points in ``[a, b)`` against ``(b - a) / mu``."""
    if n_windows < 1:
        raise DomainError("n_windows must be at least 1", field="n_windows")
    intervals = [(float(a), float(b)) for a, b in intervals]
    for a, b in intervals:
        if b < a:
            raise DomainError(f"interval ({a}, {b}) is reversed", field="intervals")
    c = max([abs(x) for ab in intervals for x in ab] + [law.mean()])
    counts = np.zeros((n_windows, len(intervals)))
    for i in range(n_windows):
        window = build_stationary_window(law, c, rng)
        counts[i] = [window.count_in(a, b) for a, b in intervals]

    mu = law.mean()
    results = []
    for j, (a, b) in enumerate(intervals):
        x = counts[:, j]
        mean = float(x.mean())
        expected = (b - a) / mu
        se = float(x.std(ddof=1)) / math.sqrt(n_windows) if n_windows > 1 else 0.0
        if se > 0:
            z = (mean - expected) / se
        else:
            z = 0.0 if math.isclose(mean, expected, abs_tol=1e-12) else math.copysign(math.inf, mean - expected)
        results.append(IntensityResult(a, b, mean, expected, z))
    return results


class OvershootReport(NamedTuple):
    horizon: float
    n_realizations: int
    overshoot: stats.TestResult
    undershoot: stats.TestResult
    lattice: bool
    warnings: Tuple[str, ...] = ()

    def to_json(self):
        return dict(self._asdict(), warnings=list(self.warnings))


def overshoot_check(
    law: InterarrivalLaw, horizon: float, n_realizations: int, rng: np.random.Generator
) -> OvershootReport:
    """One-sample KS of ``S_{ν(T)} - T`` and ``T - S_{ν(T)-1}`` against the integrated-tail law."""
    if n_realizations < 1:
        raise DomainError("n_realizations must be at least 1", field="n_realizations")
    warnings = []
    if horizon < MIN_OVERSHOOT_HORIZON_MEANS * law.mean():
        msg = f"horizon {horizon} is below {MIN_OVERSHOOT_HORIZON_MEANS:g} mean interarrival times"
        get_logger().warning(msg)
        warnings.append(msg)
    lattice = _lattice_warning(law)
    if lattice:
        warnings.append(lattice)

    over = np.empty(n_realizations)
    under = np.empty(n_realizations)
    for i in range(n_realizations):
        realization = simulate_forward(law, horizon, rng)
        over[i] = realization.overshoot
        under[i] = realization.undershoot

    def cdf(x):
        return law.integrated_tail_cdf(np.maximum(x, 0.0))

    return OvershootReport(
        horizon=float(horizon),
        n_realizations=n_realizations,
        overshoot=stats.ks_one_sample(over, cdf),
        undershoot=stats.ks_one_sample(under, cdf),
        lattice=law.is_lattice,
        warnings=tuple(warnings),
    )


class ShiftInvarianceReport(NamedTuple):
    shift: float
    interval: Tuple[float, float]
    plain_mean: float
    shifted_mean: float
    test: stats.TestResult
    reject: bool

    def to_json(self):
        return self._asdict()


def shift_invariance_check(
    law: InterarrivalLaw,
    shift: float,
    interval: Tuple[float, float],
    n_windows: int,
    rng: np.random.Generator,
    alpha: float = DEFAULT_ALPHA,
) -> ShiftInvarianceReport:
    """Chi-square homogeneity of point counts in ``interval`` for plain and shifted windows.

    The two count samples come from independent windows.
    """
    a, b = float(interval[0]), float(interval[1])
    if b < a:
        raise DomainError("interval is reversed", field="interval")
    c = max(abs(a), abs(b)) + abs(shift) + law.mean()
    plain_rng, shifted_rng = split(rng, 2)
    plain = np.empty(n_windows, dtype=int)
    shifted = np.empty(n_windows, dtype=int)
    for i in range(n_windows):
        plain[i] = build_stationary_window(law, c, plain_rng).count_in(a, b)
        window = build_stationary_window(law, c, shifted_rng)
        shifted[i] = shift_window(window, shift).count_in(a, b)
    test = stats.chisq_two_sample_counts(plain, shifted)
    return ShiftInvarianceReport(
        shift=float(shift),
        interval=(a, b),
        plain_mean=float(plain.mean()),
        shifted_mean=float(shifted.mean()),
        test=test,
        reject=test.p_value < alpha,
    )


class ComparisonReport(NamedTuple):
    """Transient-versus-stationary comparison at one time ``t``.

    Rejects when some coordinate KS p-value is below ``alpha / len(u_grid)``
    (Bonferroni) or the energy-distance p-value is below ``alpha``.
    """

    t: Optional[float]
    u_grid: np.ndarray
    ks: Tuple[stats.TestResult, ...]
    energy: stats.TestResult
    alpha: float
    reject: bool

    @property
    def bonferroni_alpha(self) -> float:
        return self.alpha / len(self.ks)

    def to_json(self):
        return {
            "t": self.t,
            "u_grid": self.u_grid,
            "alpha": self.alpha,
            "bonferroni_alpha": self.bonferroni_alpha,
            "note": f"per-coordinate KS at alpha/{len(self.ks)} (Bonferroni), energy distance at alpha",
            "ks": list(self.ks),
            "energy": self.energy,
            "reject": self.reject,
        }


def compare_samples(
    a: np.ndarray,
    b: np.ndarray,
    u_grid: Sequence[float],
    alpha: float,
    n_permutations: int,
    rng: np.random.Generator,
    t: Optional[float] = None,
) -> ComparisonReport:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1] or a.shape[1] != len(u_grid):
        raise DomainError("sample columns must match u_grid")
    ks = tuple(stats.ks_two_sample(a[:, j], b[:, j]) for j in range(a.shape[1]))
    energy = stats.energy_distance(a, b, n_permutations, rng)
    m = len(ks)
    reject = any(r.p_value < alpha / m for r in ks) or energy.p_value < alpha
    return ComparisonReport(
        t=None if t is None else float(t),
        u_grid=np.asarray(u_grid, dtype=float),
        ks=ks,
        energy=energy,
        alpha=alpha,
        reject=reject,
    )


class ConvergenceStudy(NamedTuple):
    reports: Tuple[ComparisonReport, ...]
    warnings: Tuple[str, ...]
    hypothesis_violation: Optional[str]
    rejection_decays: Optional[bool]
    transient_means: Dict[float, List[float]]

    def to_json(self):
        return {
            "reports": list(self.reports),
            "warnings": list(self.warnings),
            "hypothesis_violation": self.hypothesis_violation,
            "rejection_decays": self.rejection_decays,
            "transient_means": {str(k): v for k, v in self.transient_means.items()},
        }


def hypothesis_warnings(law: InterarrivalLaw, spec: KernelSpec, seed: int) -> List[str]:
    """Warnings for a lattice law, an infinite mean absorption time or divergent dRi evidence."""
    logger = get_logger()
    warnings = []
    lattice = _lattice_warning(law)
    if lattice:
        warnings.append(lattice)
    if isinstance(spec, Indicator) and not math.isfinite(spec.eta.mean()):
        msg = "E[tau] = E[eta] is infinite: the stationary process is infinite almost surely"
        logger.warning(msg)
        warnings.append(msg)
    try:
        report = dri_mean_check(
            spec, PRECHECK_K_MAX, PRECHECK_GRID, PRECHECK_N_MC, make_stream(seed, PRECHECK_KEY)
        )
    except NonAbsorbedPathError as e:
        msg = f"kernel paths are not absorbed within budget ({e}); E[tau] may be infinite"
        logger.warning(msg)
        warnings.append(msg)
        return warnings
    if report.verdict == Verdict.DIVERGENT:
        msg = "mean dRi criterion shows divergent evidence; E[tau] may be infinite"
        logger.warning(msg)
        warnings.append(msg)
    return warnings


def convergence_test(
    law: InterarrivalLaw,
    spec: KernelSpec,
    t_list: Sequence[float],
    u_grid: Sequence[float],
    n_replicates: int,
    alpha: float,
    seed: int,
    n_permutations: int = DEFAULT_PERMUTATIONS,
    tol: float = DEFAULT_TOL,
    c_max: Optional[float] = None,
    n_jobs: int = 1,
    progress: bool = False,
) -> ConvergenceStudy:
    """Compare ``(Y(t + u_j))_j`` with ``(Y*(u_j))_j`` for every ``t`` in ``t_list``.

    The stationary sample is drawn once and reused for every ``t``. When its
    evaluation fails the truncation budget the study records a hypothesis
    violation and carries only the transient means.
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)", field="alpha")
    if not len(t_list):
        raise DomainError("t_list must not be empty", field="t_list")
    logger = get_logger()
    warnings = hypothesis_warnings(law, spec, seed)

    transient = {}
    for i, t in enumerate(t_list):
        transient[float(t)] = fdd_sample(
            law, spec, Transient(float(t)), u_grid, n_replicates, seed,
            stream_keys=(TRANSIENT_KEY, i), n_jobs=n_jobs, progress=progress,
        )
    means = {t: sample.mean(axis=0).tolist() for t, sample in transient.items()}

    try:
        stationary = fdd_sample(
            law, spec, Stationary(tol, c_max), u_grid, n_replicates, seed,
            stream_keys=(STATIONARY_KEY,), n_jobs=n_jobs, progress=progress,
        )
    except TruncationError as e:
        logger.warning(f"stationary evaluation failed: {e}")
        return ConvergenceStudy((), tuple(warnings), str(e), None, means)

    reports = []
    for i, (t, sample) in enumerate(transient.items()):
        report = compare_samples(
            sample, stationary, u_grid, alpha, n_permutations,
            make_stream(seed, PERMUTATION_KEY, i), t=t,
        )
        logger.info(
            f"t={t:g}: min KS p={min(r.p_value for r in report.ks):.3g}, "
            f"energy p={report.energy.p_value:.3g}, reject={report.reject}"
        )
        reports.append(report)

    decays = None
    if len(reports) > 1:
        ordered = [r.reject for r in sorted(reports, key=lambda r: r.t)]
        decays = not ordered[-1] and all(x >= y for x, y in zip(ordered, ordered[1:]))
    return ConvergenceStudy(tuple(reports), tuple(warnings), None, decays, means)
