"""Transient and stationary random processes with immigration on a u-grid.

``Y(t + u) = sum_{k>=0} X_{k+1}(t + u - S_k)`` is evaluated exactly from a
forward renewal realization. ``Y*(u) = sum_k X_{k+1}(u + t_k)`` runs over the
stationary window; points with ``t_k > c`` are cut off and the kernel's tail
bound certifies the neglected contribution.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import tqdm

from immigration.distributions import InterarrivalLaw
from immigration.errors import DomainError, TruncationError
from immigration.kernels import KernelSpec
from immigration.renewal import build_stationary_window, simulate_forward
from immigration.utils import io
from immigration.utils.logging_utils import current_level, get_logger, init_worker, replicate_logger
from immigration.utils.rng import STATIONARY_KEY, TRANSIENT_KEY, make_stream, split

DEFAULT_TOL = 1e-8
# initial truncation half-width is max|u| + C0_MEAN_MULTIPLE * mu
C0_MEAN_MULTIPLE = 10.0
MAX_DOUBLINGS = 5


class Transient(NamedTuple):
    """Evaluate ``Y(t + u)``."""

    t: float

    @property
    def kind(self) -> str:
        return "transient"

    def to_json(self):
        return {"kind": self.kind, "t": self.t}


class Stationary(NamedTuple):
    """Evaluate ``Y*(u)`` with tail bound below ``tol``."""

    tol: float = DEFAULT_TOL
    c_max: Optional[float] = None

    @property
    def kind(self) -> str:
        return "stationary"

    def to_json(self):
        return {"kind": self.kind, "tol": self.tol, "c_max": self.c_max}


Mode = Union[Transient, Stationary]


class ProcessSample(NamedTuple):
    """One replicate of the process on ``u_grid``.

    ``truncation_bound`` is None for transient samples (which are exact) and
    the kernel tail bound for stationary ones, 0.0 when the window holds
    every contributing point. For kernels without a deterministic support the
    bound is on the expected neglected mass, see :meth:`KernelSpec.tail_bound`.
    """

    u_grid: np.ndarray
    values: np.ndarray
    kind: str
    t: Optional[float] = None
    c_used: Optional[float] = None
    truncation_bound: Optional[float] = None
    n_paths: int = 0


def _check_grid(u_grid: Sequence[float]) -> np.ndarray:
    u = np.asarray(u_grid, dtype=float).ravel()
    if len(u) == 0:
        raise DomainError("u_grid must not be empty", field="u_grid")
    if not np.all(np.isfinite(u)):
        raise DomainError("u_grid must be finite", field="u_grid")
    if np.any(np.diff(u) < 0):
        raise DomainError("u_grid must be sorted", field="u_grid")
    return u


def _accumulate(values: np.ndarray, paths, ages: np.ndarray, u: np.ndarray):
    for path, age in zip(paths, ages):
        values += path.value(age + u)


def eval_transient(
    law: InterarrivalLaw,
    spec: KernelSpec,
    t: float,
    u_grid: Sequence[float],
    rng: np.random.Generator,
) -> ProcessSample:
    """Exact ``Y(t + u_j)`` for one replicate.

    Epochs are simulated on ``[0, t + max(u)]``; a kernel path is drawn only
    for epochs whose support can reach the grid. Arguments ``t + u < 0`` are
    legal and evaluate to 0.
    """
    u = _check_grid(u_grid)
    t = float(t)
    values = np.zeros(len(u))
    horizon = t + u[-1]
    if horizon < 0:
        return ProcessSample(u_grid=u, values=values, kind="transient", t=t)
    epoch_rng, path_rng = split(rng, 2)
    epochs = simulate_forward(law, horizon, epoch_rng).epochs
    support = spec.support_bound()
    if support is not None:
        epochs = epochs[epochs > t + u[0] - support]
    paths = spec.sample_paths(path_rng, len(epochs))
    _accumulate(values, paths, t - epochs, u)
    return ProcessSample(u_grid=u, values=values, kind="transient", t=t, n_paths=len(paths))


def eval_stationary(
    law: InterarrivalLaw,
    spec: KernelSpec,
    u_grid: Sequence[float],
    tol: float,
    rng: np.random.Generator,
    c_max: Optional[float] = None,
) -> ProcessSample:
    """``Y*(u_j)`` for one replicate with certified truncation.

    Points ``t_k < -max(u)`` never contribute. The window starts at
    ``c0 = max|u| + 10 mu`` (or further out if the kernel support requires it)
    and doubles until ``spec.tail_bound(c + min(u))`` drops below ``tol``.
    Paths are attached to points lazily and in index order, so extending the
    window never changes the contribution of points already included.

    Raises
    ------
    TruncationError
        When the bound is still at least ``tol`` at ``c_max`` (default
        ``c0 * 2**5``), or when it cannot fall below ``tol`` at all.
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}", field="tol")
    u = _check_grid(u_grid)
    logger = get_logger()
    mu = law.mean()
    c = float(np.abs(u).max()) + C0_MEAN_MULTIPLE * mu
    support = spec.support_bound()
    if support is not None:
        c = max(c, support - u[0])
    if c_max is None:
        c_max = c * 2**MAX_DOUBLINGS
    c = min(c, c_max)

    window_rng, path_rng = split(rng, 2)
    window = build_stationary_window(law, c, window_rng)
    values = np.zeros(len(u))
    lower = -u[-1]
    included_up_to = lower
    n_paths = 0

    while True:
        points = window.points
        first = np.searchsorted(points, included_up_to, side="left" if n_paths == 0 else "right")
        last = np.searchsorted(points, c, side="right")
        new = points[first:last]
        _accumulate(values, spec.sample_paths(path_rng, len(new)), new, u)
        n_paths += len(new)
        if len(new):
            included_up_to = float(new[-1])

        gap = window.min_gap()
        bound = float(spec.tail_bound(c + u[0], mu, gap))
        logger.debug(f"stationary truncation c={c:.6g} paths={n_paths} bound={bound:.3g}")
        if bound < tol:
            break
        if c >= c_max or math.isinf(spec.tail_bound(c_max + u[0], mu, gap)):
            raise TruncationError(
                f"tail bound {bound:.3g} not below tol {tol:.3g} (c={c:.6g}, c_max={c_max:.6g})",
                values=values.copy(),
                bound=bound,
                c_used=c,
            )
        c = min(2 * c, c_max)
        window = window.extended(c)

    return ProcessSample(
        u_grid=u,
        values=values,
        kind="stationary",
        c_used=c,
        truncation_bound=bound,
        n_paths=n_paths,
    )


def _stream_keys(mode: Mode, stream_keys: Optional[Tuple[int, ...]]) -> Tuple[int, ...]:
    if stream_keys is not None:
        return tuple(stream_keys)
    return (TRANSIENT_KEY,) if isinstance(mode, Transient) else (STATIONARY_KEY,)


def _replicate(law, spec, mode, u, seed, keys, index) -> ProcessSample:
    rng = make_stream(seed, *keys, index)
    try:
        if isinstance(mode, Transient):
            return eval_transient(law, spec, mode.t, u, rng)
        return eval_stationary(law, spec, u, mode.tol, rng, c_max=mode.c_max)
    except TruncationError as e:
        replicate_logger(index).warning(f"truncation failed at c={e.c_used:.6g}, bound {e.bound:.3g}")
        raise e.with_replicate(index)


def _replicate_chunk(args) -> List[ProcessSample]:
    law, spec, mode, u, seed, keys, indices = args
    return [_replicate(law, spec, mode, u, seed, keys, i) for i in indices]


def simulate_replicates(
    law: InterarrivalLaw,
    spec: KernelSpec,
    mode: Mode,
    u_grid: Sequence[float],
    n_replicates: int,
    seed: int,
    stream_keys: Optional[Tuple[int, ...]] = None,
    n_jobs: int = 1,
    progress: bool = False,
) -> List[ProcessSample]:
    """Independent replicates, replicate ``i`` drawn from ``make_stream(seed, *keys, i)``.

    Results are ordered by replicate index and do not depend on ``n_jobs``.
    """
    if n_replicates < 1:
        raise DomainError("n_replicates must be at least 1", field="n_replicates")
    u = _check_grid(u_grid)
    keys = _stream_keys(mode, stream_keys)
    logger = get_logger()
    logger.debug(f"{n_replicates} {mode.kind} replicates, keys={keys}, n_jobs={n_jobs}")

    if n_jobs <= 1:
        indices = tqdm.tqdm(range(n_replicates), disable=not progress, desc=mode.kind)
        return [_replicate(law, spec, mode, u, seed, keys, i) for i in indices]

    chunks = np.array_split(np.arange(n_replicates), n_jobs * 4)
    tasks = [(law, spec, mode, u, seed, keys, chunk.tolist()) for chunk in chunks if len(chunk)]
    samples: List[ProcessSample] = []
    with ProcessPoolExecutor(max_workers=n_jobs, initializer=init_worker, initargs=(current_level(),)) as executor:
        results = executor.map(_replicate_chunk, tasks)
        for chunk_samples in tqdm.tqdm(results, total=len(tasks), disable=not progress, desc=mode.kind):
            samples.extend(chunk_samples)
    return samples


def fdd_sample(
    law: InterarrivalLaw,
    spec: KernelSpec,
    mode: Mode,
    u_grid: Sequence[float],
    n_replicates: int,
    seed: int,
    stream_keys: Optional[Tuple[int, ...]] = None,
    n_jobs: int = 1,
    progress: bool = False,
) -> np.ndarray:
    """``n_replicates x len(u_grid)`` matrix of fdd vectors, rows ordered by replicate."""
    samples = simulate_replicates(
        law, spec, mode, u_grid, n_replicates, seed, stream_keys, n_jobs, progress
    )
    return np.vstack([s.values for s in samples])


def sample_metadata(
    law: InterarrivalLaw,
    spec: KernelSpec,
    mode: Mode,
    seed: int,
    samples: Sequence[ProcessSample],
) -> Dict[str, Any]:
    """Sidecar describing how an fdd matrix was produced."""
    meta: Dict[str, Any] = {
        "law": law.to_config(),
        "kernel": spec.to_config(),
        "mode": mode.to_json(),
        "seed": seed,
        "n_replicates": len(samples),
        "u_grid": samples[0].u_grid if samples else [],
        "lattice": law.is_lattice,
    }
    if isinstance(mode, Stationary) and samples:
        c_used = np.array([s.c_used for s in samples])
        bounds = np.array([s.truncation_bound for s in samples])
        meta["c_used"] = {
            "min": c_used.min(),
            "median": float(np.median(c_used)),
            "max": c_used.max(),
        }
        meta["max_truncation_bound"] = bounds.max()
    return meta


def write_fdd_csv(path: str, u_grid: Sequence[float], matrix: np.ndarray) -> str:
    return io.write_matrix_csv(path, u_grid, matrix)


def write_fdd_metadata(path: str, metadata: Dict[str, Any]) -> str:
    return io.write_json(path, metadata)
