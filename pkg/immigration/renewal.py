"""Zero-delayed renewal sequences and two-sided stationary renewal windows.

The stationary window follows the canonical indexing ``t_{-1} < 0 <= t_0``:
``t_0 = U xi0`` and ``t_{-1} = -(1 - U) xi0`` with ``xi0`` size-biased, and
the remaining gaps on both sides are independent copies of ξ.
"""

import copy
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Tuple

import numpy as np

from immigration.distributions import InterarrivalLaw
from immigration.errors import DomainError, PreconditionError
from immigration.utils import io
from immigration.utils.rng import split

# extra increments drawn per batch beyond the expected number needed
_BATCH_SLACK = 8


def _walk(law: InterarrivalLaw, start: float, limit: float, rng: np.random.Generator) -> np.ndarray:
    """Points ``start + ξ_1, start + ξ_1 + ξ_2, ...`` up to the first one above ``limit``.

    The first point exceeding ``limit`` is kept as a sentinel. Returns an empty
    array when ``start > limit`` already.
    """
    mu = law.mean()
    chunks = []
    last = start
    while last <= limit:
        n = int(math.ceil(1.1 * (limit - last) / mu)) + _BATCH_SLACK
        steps = last + np.cumsum(law.sample(rng, n))
        cut = int(np.searchsorted(steps, limit, side="right"))
        if cut < n:
            chunks.append(steps[: cut + 1])
            break
        chunks.append(steps)
        last = float(steps[-1])
    if not chunks:
        return np.empty(0)
    return np.concatenate(chunks)


@dataclass(frozen=True, eq=False)
class RenewalRealization:
    """Epochs ``0 = S_0 < S_1 < ... <= horizon`` of a zero-delayed renewal sequence.

    ``next_epoch`` is ``S_{ν(horizon)}``, the first epoch beyond the horizon.
    """

    epochs: np.ndarray
    horizon: float
    next_epoch: float

    @property
    def count(self) -> int:
        """``ν(horizon)``: number of epochs in ``[0, horizon]``."""
        return len(self.epochs)

    @property
    def overshoot(self) -> float:
        """``S_{ν(T)} - T``."""
        return self.next_epoch - self.horizon

    @property
    def undershoot(self) -> float:
        """``T - S_{ν(T)-1}``."""
        return self.horizon - float(self.epochs[-1])


def simulate_forward(
    law: InterarrivalLaw, horizon: float, rng: np.random.Generator
) -> RenewalRealization:
    """Simulate ``S_0 = 0, S_n = ξ_1 + ... + ξ_n`` on ``[0, horizon]``.

    Parameters
    ----------
    law : InterarrivalLaw
        Increment law.
    horizon : float
        Non-negative end of the observation interval.
    rng : numpy.random.Generator
        Stream the increments are drawn from.

    Returns
    -------
    RenewalRealization
        The epochs up to the horizon plus the first epoch past it.
    """
    if not horizon >= 0:
        raise DomainError(f"horizon must be non-negative, got {horizon}", field="horizon")
    points = _walk(law, 0.0, horizon, rng)
    epochs = np.concatenate([[0.0], points[:-1]])
    epochs.setflags(write=False)
    return RenewalRealization(epochs=epochs, horizon=float(horizon), next_epoch=float(points[-1]))


@dataclass(frozen=True, eq=False)
class StationaryWindow:
    """Points ``t_k`` of the stationary renewal process covering ``[-c, c]``.

    ``points`` is sorted and ``points[zero_index]`` is ``t_0``, the first point
    at or after the origin. The outermost points on both sides lie outside
    ``[-c, c]``. The window keeps the generators of its forward and backward
    walks so :meth:`extended` can grow it without redrawing existing points.
    """

    law: InterarrivalLaw
    points: np.ndarray
    zero_index: int
    c: float
    xi0: float
    u: float
    _forward: np.random.Generator = field(repr=False, compare=False)
    _backward: np.random.Generator = field(repr=False, compare=False)

    def __post_init__(self):
        self.points.setflags(write=False)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Tuple[int, float]]:
        for i, p in zip(self.indices, self.points):
            yield int(i), float(p)

    @property
    def indices(self) -> np.ndarray:
        """Canonical index ``k`` of every stored point."""
        return np.arange(len(self.points)) - self.zero_index

    @property
    def k_min(self) -> int:
        return -self.zero_index

    @property
    def k_max(self) -> int:
        return len(self.points) - 1 - self.zero_index

    def index_of(self, k: int) -> float:
        """Point ``t_k``."""
        pos = self.zero_index + k
        if not 0 <= pos < len(self.points):
            raise IndexError(f"t_{k} lies outside the window [{self.k_min}, {self.k_max}]")
        return float(self.points[pos])

    def count_in(self, a: float, b: float) -> int:
        """Number of points in ``[a, b)``."""
        if b < a:
            raise DomainError(f"empty interval [{a}, {b})")
        lo, hi = np.searchsorted(self.points, [a, b], side="left")
        return int(hi - lo)

    def min_gap(self) -> float:
        if len(self.points) < 2:
            return math.inf
        return float(np.diff(self.points).min())

    def extended(self, c: float) -> "StationaryWindow":
        """Window covering ``[-c, c]`` that keeps every existing point."""
        if c <= self.c:
            return self
        forward = copy.deepcopy(self._forward)
        backward = copy.deepcopy(self._backward)
        ahead = _walk(self.law, float(self.points[-1]), c, forward)
        behind = -_walk(self.law, -float(self.points[0]), c, backward)[::-1]
        points = np.concatenate([behind, self.points, ahead])
        return replace(
            self,
            points=points,
            zero_index=self.zero_index + len(behind),
            c=float(c),
            _forward=forward,
            _backward=backward,
        )

    def restricted(self, c: float) -> "StationaryWindow":
        """Points of ``[-c, c]`` plus one sentinel on each side."""
        if not 0 < c <= self.c:
            raise DomainError(f"c must lie in (0, {self.c}], got {c}", field="c")
        first = max(int(np.searchsorted(self.points, -c, side="left")) - 1, 0)
        last = min(int(np.searchsorted(self.points, c, side="right")), len(self.points) - 1)
        return replace(
            self,
            points=self.points[first : last + 1].copy(),
            zero_index=self.zero_index - first,
            c=float(c),
        )

    def rows(self):
        return [(int(k), float(p)) for k, p in zip(self.indices, self.points)]

    def to_csv(self, path: str) -> str:
        """Write ``index,point`` rows."""
        return io.write_csv(path, ["index", "point"], self.rows())

    def to_json(self):
        return {
            "c": self.c,
            "xi0": self.xi0,
            "u": self.u,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "law": self.law.to_config(),
        }


def build_stationary_window(
    law: InterarrivalLaw, c: float, rng: np.random.Generator
) -> StationaryWindow:
    """Build the stationary renewal point set on ``[-c, c]``.

    ``(xi0, U)`` come from :meth:`InterarrivalLaw.sample_stationary_delay`; the
    forward walk from ``t_0`` and the backward walk from ``t_{-1}`` use
    independent child streams of ``rng``.
    """
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}", field="c")
    delay_rng, forward, backward = split(rng, 3)
    delay = law.sample_stationary_delay(delay_rng)
    t0 = delay.s0
    t_minus_1 = -delay.undershoot
    ahead = _walk(law, t0, c, forward)
    behind = -_walk(law, -t_minus_1, c, backward)[::-1]
    points = np.concatenate([behind, [t_minus_1, t0], ahead])
    return StationaryWindow(
        law=law,
        points=points,
        zero_index=len(behind) + 1,
        c=float(c),
        xi0=delay.xi0,
        u=delay.u,
        _forward=forward,
        _backward=backward,
    )


def shift_window(window: StationaryWindow, t: float) -> StationaryWindow:
    """Translate every point by ``-t`` and re-index so that ``t_{-1} < 0 <= t_0``.

    The shifted window covers ``[-(c - |t|), c - |t|]``; ``xi0`` and ``u``
    describe its new straddling interval.
    """
    if abs(t) >= window.c:
        raise PreconditionError(f"shift {t} does not fit inside the window half-width {window.c}")
    if t == 0:
        return window
    points = window.points - t
    zero_index = int(np.searchsorted(points, 0.0, side="left"))
    xi0 = float(points[zero_index] - points[zero_index - 1])
    return replace(
        window,
        points=points,
        zero_index=zero_index,
        c=window.c - abs(t),
        xi0=xi0,
        u=float(points[zero_index]) / xi0,
    )
