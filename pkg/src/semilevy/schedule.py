"""Periodic schedules of Levy segments and exact path sampling.

A schedule tiles one period [0, p) with Levy segments; repeating the tiling
gives an additive process whose increment laws are periodic in time.  The
two-segment splice alternates two independent processes and is the canonical
construction; a single-segment schedule degenerates to an ordinary Levy
process and doubles as a regression fixture.

All increment laws are computed through one primitive, the per-segment
occupancy of a time interval, which makes periodicity and additivity of the
log-characteristic function exact by construction.  Sampling draws each grid
cell's increment from the occupancy decomposition, so splicing introduces no
discretization bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .models import DimensionMismatch, LevyModel, SumModel
from .util import format_csv_float, map_indexed, split_seed

__all__ = [
    "SemiLevySchedule",
    "PathSample",
    "make_splice",
    "single_segment",
    "increment_exponent",
    "period_exponent",
    "period_mean",
    "period_covariance",
    "equivalent_levy_model",
    "sample_interval_increment",
    "sample_path",
    "sample_paths",
]

# relative tolerance when validating that segment durations tile the period,
# and when snapping times sitting on a period boundary
PERIOD_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SemiLevySchedule:
    """A period p > 0 tiled by an ordered list of (duration, model) segments.

    Segment k runs on (start_k + n p, start_k + duration_k + n p] for every
    period index n; boundary instants belong to the segment that ends there
    (left-open, right-closed convention).
    """

    period: float
    segments: tuple

    def __post_init__(self):
        p = float(self.period)
        if not p > 0:
            raise ValueError("period must be positive")
        segs = tuple((float(d), m) for d, m in self.segments)
        if not segs:
            raise ValueError("schedule needs at least one segment")
        for d, m in segs:
            if not d > 0:
                raise ValueError("segment durations must be positive")
            if not isinstance(m, LevyModel):
                raise TypeError("segment models must be LevyModel instances")
        dims = {m.dim for _, m in segs}
        if len(dims) != 1:
            raise DimensionMismatch(f"segment models disagree on dimension: {sorted(dims)}")
        total = math.fsum(d for d, _ in segs)
        if abs(total - p) > PERIOD_TOL * p:
            raise ValueError(
                f"segment durations sum to {total!r}, period is {p!r}; they must tile the period"
            )
        object.__setattr__(self, "period", p)
        object.__setattr__(self, "segments", segs)

    @property
    def dim(self) -> int:
        return self.segments[0][1].dim

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @cached_property
    def durations(self) -> np.ndarray:
        return np.array([d for d, _ in self.segments])

    @cached_property
    def starts(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.durations)[:-1]])

    @property
    def models(self) -> tuple:
        return tuple(m for _, m in self.segments)

    # -- time decomposition ------------------------------------------------

    def occupancy_profile(self, t) -> np.ndarray:
        """Time spent in each segment over [0, t]; vectorized over a time array.

        Returns shape (..., n_segments).  fmod-based reduction keeps the period
        arithmetic exact; instants within PERIOD_TOL of a period boundary are
        snapped onto it.
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("times must be nonnegative")
        p = self.period
        r = np.fmod(t, p)
        n = np.rint((t - r) / p)
        on_boundary = p - r <= PERIOD_TOL * p
        n = np.where(on_boundary, n + 1.0, n)
        r = np.where(on_boundary, 0.0, r)
        partial = np.clip(r[..., None] - self.starts, 0.0, self.durations)
        return n[..., None] * self.durations + partial

    def segment_occupancy(self, s: float, t: float) -> np.ndarray:
        """Time spent in each segment over [s, t]; entries sum to t - s."""
        if not 0 <= s <= t:
            raise ValueError("need 0 <= s <= t")
        pair = self.occupancy_profile(np.array([s, t]))
        return np.clip(pair[1] - pair[0], 0.0, None)

    def __eq__(self, other):
        return (
            isinstance(other, SemiLevySchedule)
            and self.period == other.period
            and self.segments == other.segments
        )


@dataclass(frozen=True)
class PathSample:
    """Process values on a time grid, with the seed that produced them."""

    grid: np.ndarray
    values: np.ndarray
    seed: int

    def __post_init__(self):
        if self.grid.shape[0] != self.values.shape[0]:
            raise ValueError("grid and values must have the same length")
        if self.grid[0] != 0.0 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must start at 0 and be strictly increasing")
        if np.any(self.values[0] != 0.0):
            raise ValueError("values[0] must be 0 (the process starts at the origin)")

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def to_csv(self) -> str:
        """CSV text: header t,x1,...,xd then one row per grid point."""
        header = "t," + ",".join(f"x{j + 1}" for j in range(self.dim))
        lines = [header]
        for t, row in zip(self.grid, self.values):
            lines.append(",".join(format_csv_float(v) for v in (t, *row)))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def make_splice(model_y: LevyModel, model_z: LevyModel, q: float, p: float) -> SemiLevySchedule:
    """Two-segment schedule: Y-dynamics on (np, np+q], Z-dynamics on (np+q, (n+1)p]."""
    if not 0 < q < p:
        raise ValueError(f"need 0 < q < p, got q={q!r}, p={p!r}")
    if model_y.dim != model_z.dim:
        raise DimensionMismatch("splice models must share a dimension")
    return SemiLevySchedule(period=p, segments=((q, model_y), (p - q, model_z)))


def single_segment(model: LevyModel, p: float = 1.0) -> SemiLevySchedule:
    """Degenerate one-segment schedule: an ordinary Levy process."""
    return SemiLevySchedule(period=p, segments=((p, model),))


# ---------------------------------------------------------------------------
# increment laws
# ---------------------------------------------------------------------------


def increment_exponent(schedule: SemiLevySchedule, s: float, t: float, z):
    """log E[exp(i <z, X_t - X_s>)], exact via the occupancy decomposition."""
    occ = schedule.segment_occupancy(s, t)
    single = np.asarray(z).ndim < 2
    total = 0.0 + 0.0j if single else np.zeros(np.asarray(z).shape[0], dtype=complex)
    for dur, (_, model) in zip(occ, schedule.segments):
        total = total + dur * model.char_exponent(z)
    return total


def period_exponent(schedule: SemiLevySchedule, z):
    """Log-characteristic function of the one-period increment.

    This is the exponent of the ordinary Levy process equivalent to the
    schedule (unit-time law = one-period increment law), the quantity the
    Chung-Fuchs classifier integrates against.
    """
    single = np.asarray(z).ndim < 2
    total = 0.0 + 0.0j if single else np.zeros(np.asarray(z).shape[0], dtype=complex)
    for dur, model in zip(schedule.durations, schedule.models):
        total = total + dur * model.char_exponent(z)
    return total


def period_mean(schedule: SemiLevySchedule) -> Optional[np.ndarray]:
    """Mean of the one-period increment, or None when any segment mean is infinite."""
    total = np.zeros(schedule.dim)
    for dur, model in zip(schedule.durations, schedule.models):
        mu = model.mean(1.0)
        if mu is None:
            return None
        total += dur * mu
    return total


def period_covariance(schedule: SemiLevySchedule) -> Optional[np.ndarray]:
    """Covariance of the one-period increment, or None without second moments."""
    total = np.zeros((schedule.dim, schedule.dim))
    for dur, model in zip(schedule.durations, schedule.models):
        cov = model.covariance(1.0)
        if cov is None:
            return None
        total += dur * cov
    return total


def equivalent_levy_model(schedule: SemiLevySchedule) -> LevyModel:
    """Levy model whose unit-time exponent is the schedule's per-period average.

    The one-period law of `single_segment(equivalent_levy_model(s), s.period)`
    coincides with the schedule's, so recurrence questions reduce to it.
    """
    p = schedule.period
    parts = tuple(model.scaled(dur / p) for dur, model in zip(schedule.durations, schedule.models))
    return parts[0] if len(parts) == 1 else SumModel(parts)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_interval_increment(
    schedule: SemiLevySchedule,
    s: float,
    t: float,
    rng: np.random.Generator,
    size: Optional[int] = None,
):
    """Exact draw(s) of X_t - X_s; a (d,) vector, or (size, d) when size is given."""
    occ = schedule.segment_occupancy(s, t)
    n = 1 if size is None else int(size)
    out = np.zeros((n, schedule.dim))
    for dur, model in zip(occ, schedule.models):
        if dur > 0.0:
            out += model._sample_batch(np.full(n, dur), rng)
    return out[0] if size is None else out


def _grid_times(horizon: float, step: float) -> np.ndarray:
    if not step > 0:
        raise ValueError("step must be positive")
    if not horizon >= step:
        raise ValueError("horizon must be at least one step")
    n = int(math.floor(horizon / step + 1e-9))
    times = np.arange(n + 1) * step
    if horizon - times[-1] > 1e-9 * step:
        times = np.append(times, horizon)
    return times


def _grid_occupancy(schedule: SemiLevySchedule, times: np.ndarray) -> np.ndarray:
    profiles = schedule.occupancy_profile(times)
    return np.clip(np.diff(profiles, axis=0), 0.0, None)


def _sample_cells(schedule: SemiLevySchedule, occupancy: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One increment per grid cell from its occupancy row; segment-major draw order."""
    m = occupancy.shape[0]
    incr = np.zeros((m, schedule.dim))
    for k, model in enumerate(schedule.models):
        mask = occupancy[:, k] > 0.0
        if np.any(mask):
            incr[mask] += model._sample_batch(occupancy[mask, k], rng)
    return incr


def sample_path(schedule: SemiLevySchedule, horizon: float, step: float, seed: int) -> PathSample:
    """Sample the process on the grid {0, step, 2 step, ...} up to the horizon.

    The grid gains a final shorter cell when the step does not divide the
    horizon.  Cell increments are exact in law: cells are split internally at
    segment boundaries, so no draw ever straddles two models.
    """
    times = _grid_times(horizon, step)
    occupancy = _grid_occupancy(schedule, times)
    rng = np.random.default_rng(seed)
    incr = _sample_cells(schedule, occupancy, rng)
    values = np.vstack([np.zeros((1, schedule.dim)), np.cumsum(incr, axis=0)])
    return PathSample(grid=times, values=values, seed=int(seed))


def sample_paths(
    schedule: SemiLevySchedule,
    horizon: float,
    step: float,
    n_paths: int,
    seed: int,
    threads: int = 1,
) -> list[PathSample]:
    """Independent paths; path i is reproduced by sample_path with split_seed(seed, i)."""
    times = _grid_times(horizon, step)
    occupancy = _grid_occupancy(schedule, times)

    def one(i: int) -> PathSample:
        child = split_seed(seed, i)
        rng = np.random.default_rng(child)
        incr = _sample_cells(schedule, occupancy, rng)
        values = np.vstack([np.zeros((1, schedule.dim)), np.cumsum(incr, axis=0)])
        return PathSample(grid=times, values=values, seed=child)

    return map_indexed(one, int(n_paths), threads)
