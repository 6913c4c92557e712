"""Two-sample and goodness-of-fit statistics on simulated samples.

Empirical CDFs are right-continuous step functions evaluated at the merged
order statistics, which fixes the convention for the heavy ties produced by
integer-valued processes. Kolmogorov-Smirnov p-values are asymptotic; they are
meant for decisions with ``n, m >= 50``.
"""

from enum import Enum
from typing import Any, Callable, Dict, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist

from immigration.errors import DomainError, PreconditionError, UndefinedTestError
from immigration.utils.rng import child_seed, split

# energy distance uses every pair up to this many pooled rows and a recorded subsample beyond
ENERGY_MAX_ROWS = 3000
MIN_PERMUTATIONS = 19
PROBABILITY_SUM_TOLERANCE = 1e-9
# permutation statistics this close to the observed one count as ties
_TIE_RTOL = 1e-12


class Method(str, Enum):
    KS_TWO_SAMPLE = "ks_two_sample"
    KS_ONE_SAMPLE = "ks_one_sample"
    ENERGY = "energy_distance"
    CHISQ_GOF = "chisq_gof"
    CHISQ_HOMOGENEITY = "chisq_homogeneity"


class TestResult(NamedTuple):
    statistic: float
    p_value: float
    n: int
    m: Optional[int]
    method: Method
    details: Optional[Dict[str, Any]] = None

    def to_json(self):
        out = {
            "method": self.method.value,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n": self.n,
            "m": self.m,
        }
        if self.details:
            out.update(self.details)
        return out


class EmpiricalDistribution:
    """Sorted sample with its right-continuous empirical CDF."""

    __slots__ = ("samples",)

    def __init__(self, samples: Sequence[float]):
        arr = np.sort(np.asarray(samples, dtype=float).ravel())
        if len(arr) == 0:
            raise DomainError("an empirical distribution needs at least one sample")
        if np.isnan(arr).any():
            raise DomainError("samples must not contain NaN")
        arr.setflags(write=False)
        self.samples = arr

    @property
    def n(self) -> int:
        return len(self.samples)

    def cdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.n

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"EmpiricalDistribution(n={self.n})"


Sample = Union[EmpiricalDistribution, Sequence[float], np.ndarray]


def _empirical(x: Sample) -> EmpiricalDistribution:
    return x if isinstance(x, EmpiricalDistribution) else EmpiricalDistribution(x)


def ks_two_sample(a: Sample, b: Sample) -> TestResult:
    """Two-sample Kolmogorov-Smirnov test.

    ``D = sup |F_a - F_b|`` over the merged sample; the p-value is the
    Kolmogorov survival function at ``sqrt(nm / (n + m)) D``.
    """
    a = _empirical(a)
    b = _empirical(b)
    merged = np.concatenate([a.samples, b.samples])
    d = float(np.abs(a.cdf(merged) - b.cdf(merged)).max())
    n, m = a.n, b.n
    p = float(stats.kstwobign.sf(np.sqrt(n * m / (n + m)) * d))
    return TestResult(d, min(max(p, 0.0), 1.0), n, m, Method.KS_TWO_SAMPLE)


def ks_one_sample(a: Sample, cdf: Callable[[np.ndarray], np.ndarray]) -> TestResult:
    """One-sample Kolmogorov-Smirnov test against a continuous ``cdf``.

    ``cdf`` must accept arrays; it is probed at ``±inf`` and must map those to
    0 and 1, and must be nondecreasing with values in ``[0, 1]`` on the sample.
    """
    a = _empirical(a)
    ends = np.asarray(cdf(np.array([-np.inf, np.inf])), dtype=float)
    if not (abs(ends[0]) < 1e-12 and abs(ends[1] - 1.0) < 1e-12):
        raise PreconditionError(f"cdf must run from 0 to 1, got {ends.tolist()}")
    f = np.asarray(cdf(a.samples), dtype=float)
    if np.any((f < 0) | (f > 1)) or np.any(np.diff(f) < 0):
        raise PreconditionError("cdf must be nondecreasing with values in [0, 1]")
    n = a.n
    i = np.arange(1, n + 1)
    d = float(max((i / n - f).max(), (f - (i - 1) / n).max()))
    p = float(stats.kstwo.sf(d, n))
    return TestResult(d, min(max(p, 0.0), 1.0), n, None, Method.KS_ONE_SAMPLE)


def _as_rows(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or len(arr) == 0:
        raise DomainError("samples must be a non-empty matrix of rows")
    return arr


def energy_distance(
    a,
    b,
    n_permutations: int,
    rng: np.random.Generator,
    max_rows: int = ENERGY_MAX_ROWS,
) -> TestResult:
    """Energy distance ``2E|A-B| - E|A-A'| - E|B-B'|`` with a permutation p-value.

    Means run over all ordered pairs, diagonals included, so identical samples
    give exactly 0. Each permutation draws from its own child stream of
    ``rng``. Samples with more than ``max_rows`` pooled rows are subsampled
    proportionally; the subsample seed is reported in ``details``.
    """
    a = _as_rows(a)
    b = _as_rows(b)
    if a.shape[1] != b.shape[1]:
        raise DomainError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]} columns")
    if n_permutations < MIN_PERMUTATIONS:
        raise DomainError(
            f"n_permutations must be at least {MIN_PERMUTATIONS}", field="n_permutations"
        )
    n_full, m_full = len(a), len(b)
    details: Dict[str, Any] = {"n_permutations": n_permutations}
    sub_rng, perm_rng = split(rng, 2)
    if n_full + m_full > max_rows:
        seed = child_seed(sub_rng)
        details["subsample_seed"] = seed
        picker = np.random.default_rng(seed)
        n_keep = max(1, int(round(max_rows * n_full / (n_full + m_full))))
        m_keep = max(1, max_rows - n_keep)
        a = a[np.sort(picker.choice(n_full, size=min(n_keep, n_full), replace=False))]
        b = b[np.sort(picker.choice(m_full, size=min(m_keep, m_full), replace=False))]
    n, m = len(a), len(b)
    details["rows_used"] = [n, m]

    pooled = np.vstack([a, b])
    dist = cdist(pooled, pooled)
    row_sums = dist.sum(axis=1)
    total = row_sums.sum()

    def statistic(z: np.ndarray) -> np.ndarray:
        # z: (N, P) membership indicators of the first sample
        dz = dist @ z
        s_aa = (z * dz).sum(axis=0)
        s_ab = z.T @ row_sums - s_aa
        s_bb = total - 2 * s_ab - s_aa
        return 2 * s_ab / (n * m) - s_aa / n**2 - s_bb / m**2

    observed_z = np.zeros((n + m, 1))
    observed_z[:n] = 1.0
    observed = float(statistic(observed_z)[0])

    perm_z = np.zeros((n + m, n_permutations))
    for j, stream in enumerate(split(perm_rng, n_permutations)):
        perm_z[stream.permutation(n + m)[:n], j] = 1.0
    perm_stats = statistic(perm_z)

    tie = _TIE_RTOL * max(1.0, abs(observed))
    exceed = int(np.sum(perm_stats >= observed - tie))
    p = (1 + exceed) / (n_permutations + 1)
    return TestResult(max(observed, 0.0), p, n_full, m_full, Method.ENERGY, details)


def chisq_gof_counts(
    observed_counts: Sequence[int],
    expected_probs: Sequence[float],
    min_expected: float = 5.0,
) -> TestResult:
    """Pearson chi-square goodness of fit for binned counts.

    Bins whose expected count is below ``min_expected`` are pooled into one
    tail bin, which is merged into the last kept bin if it is still too small.
    A bin of probability 0 holding observations gives statistic ``inf`` and
    p-value 0.
    """
    obs = np.asarray(observed_counts, dtype=float)
    probs = np.asarray(expected_probs, dtype=float)
    if obs.shape != probs.shape or obs.ndim != 1:
        raise DomainError("observed_counts and expected_probs must be 1-d of equal length")
    if np.any(obs < 0) or np.any(obs != np.round(obs)):
        raise DomainError("observed counts must be non-negative integers")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > PROBABILITY_SUM_TOLERANCE:
        raise DomainError("expected probabilities must be non-negative and sum to 1")
    total = obs.sum()
    if total == 0:
        raise UndefinedTestError("no observations")
    if np.any((probs == 0) & (obs > 0)):
        return TestResult(
            float("inf"), 0.0, int(total), None, Method.CHISQ_GOF, {"impossible_bin": True}
        )

    expected = total * probs
    keep = expected >= min_expected
    kept_obs = list(obs[keep])
    kept_exp = list(expected[keep])
    tail_obs = obs[~keep].sum()
    tail_exp = expected[~keep].sum()
    if tail_exp > 0:
        if tail_exp < min_expected and kept_exp:
            kept_obs[-1] += tail_obs
            kept_exp[-1] += tail_exp
        else:
            kept_obs.append(tail_obs)
            kept_exp.append(tail_exp)
    bins = len(kept_exp)
    if bins < 2:
        raise UndefinedTestError("all mass pooled into one bin")
    o = np.array(kept_obs)
    e = np.array(kept_exp)
    stat = float(((o - e) ** 2 / e).sum())
    df = bins - 1
    return TestResult(
        stat, float(stats.chi2.sf(stat, df)), int(total), None, Method.CHISQ_GOF, {"df": df}
    )


def chisq_two_sample_counts(
    a_counts: Sequence[int], b_counts: Sequence[int], min_expected: float = 5.0
) -> TestResult:
    """Chi-square homogeneity test of two samples of integer values.

    Values whose pooled frequency would leave an expected cell below
    ``min_expected`` are collected in one tail column. Two samples sharing a
    single value are homogeneous: statistic 0, p-value 1.
    """
    a = np.asarray(a_counts).ravel()
    b = np.asarray(b_counts).ravel()
    if len(a) == 0 or len(b) == 0:
        raise UndefinedTestError("both samples need observations")
    values = np.union1d(a, b)
    table = np.array(
        [
            [np.count_nonzero(a == v) for v in values],
            [np.count_nonzero(b == v) for v in values],
        ],
        dtype=float,
    )
    n, m = len(a), len(b)
    smaller = min(n, m)
    column_totals = table.sum(axis=0)
    # expected count in the smaller row is total * smaller / (n + m)
    keep = column_totals * smaller / (n + m) >= min_expected
    kept = table[:, keep]
    rest = table[:, ~keep].sum(axis=1, keepdims=True)
    if rest.sum() > 0:
        if rest.sum() * smaller / (n + m) < min_expected and kept.shape[1]:
            kept[:, -1:] += rest
        else:
            kept = np.hstack([kept, rest])
    if kept.shape[1] < 2:
        return TestResult(0.0, 1.0, n, m, Method.CHISQ_HOMOGENEITY, {"df": 0})
    stat, p, df, _ = stats.chi2_contingency(kept, correction=False)
    return TestResult(float(stat), float(p), n, m, Method.CHISQ_HOMOGENEITY, {"df": int(df)})
