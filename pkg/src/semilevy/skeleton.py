"""Discrete skeletons of periodic schedules and ball-visit statistics.

Sampling the process at step h = p * num / den produces a discrete-time walk
whose increment laws repeat with integer period den.  The step is kept as an
exact rational multiple of the period (a float step would silently break the
periodicity), and walk increments are composed from exact segment draws, not
read off a path grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schedule import PathSample, SemiLevySchedule, _sample_cells
from .util import format_csv_float, map_indexed, split_seed

__all__ = [
    "RationalStep",
    "WalkSample",
    "BallVisitCurve",
    "skeleton_period",
    "sample_walk",
    "sample_walks",
    "ball_visit_curve",
    "occupation_time",
    "occupations_csv",
]


@dataclass(frozen=True)
class RationalStep:
    """Sampling step h = period * num / den, reduced to lowest terms."""

    num: int
    den: int

    def __post_init__(self):
        num = int(self.num)
        den = int(self.den)
        if num < 1 or den < 1:
            raise ValueError("num and den must be positive integers")
        g = math.gcd(num, den)
        object.__setattr__(self, "num", num // g)
        object.__setattr__(self, "den", den // g)

    def step(self, period: float) -> float:
        return period * self.num / self.den


def skeleton_period(rs: RationalStep) -> int:
    """Integer period of the walk sampled at step period * num / den."""
    return rs.den


@dataclass(frozen=True)
class WalkSample:
    """Walk values S_0 = 0, S_1, ..., with the step and seed that produced them."""

    steps: np.ndarray
    rational_step: RationalStep
    seed: int

    def __post_init__(self):
        if np.any(self.steps[0] != 0.0):
            raise ValueError("steps[0] must be 0")

    @property
    def n_steps(self) -> int:
        return self.steps.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.steps.shape[1]


def _walk_occupancy(schedule: SemiLevySchedule, rs: RationalStep, n_steps: int) -> np.ndarray:
    """Per-segment occupancy of each walk step, via exact integer period counts.

    Step k covers [k h, (k+1) h] with h = p num / den; the position of k h
    inside its period is p * ((k num) mod den) / den, an exact rational, so
    segment boundaries never drift no matter how long the walk is.
    """
    m = np.arange(n_steps + 1, dtype=np.int64) * rs.num
    full = (m // rs.den).astype(float)
    rem = (m % rs.den).astype(float) * schedule.period / rs.den
    partial = np.clip(rem[:, None] - schedule.starts, 0.0, schedule.durations)
    profiles = full[:, None] * schedule.durations + partial
    return np.clip(np.diff(profiles, axis=0), 0.0, None)


def sample_walk(
    schedule: SemiLevySchedule, rs: RationalStep, n_steps: int, seed: int
) -> WalkSample:
    """Exact draw of (X_0, X_h, ..., X_{n h}) at the rational step h."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    occupancy = _walk_occupancy(schedule, rs, n_steps)
    rng = np.random.default_rng(seed)
    incr = _sample_cells(schedule, occupancy, rng)
    steps = np.vstack([np.zeros((1, schedule.dim)), np.cumsum(incr, axis=0)])
    return WalkSample(steps=steps, rational_step=rs, seed=int(seed))


def sample_walks(
    schedule: SemiLevySchedule,
    rs: RationalStep,
    n_steps: int,
    n_walks: int,
    seed: int,
    threads: int = 1,
) -> list[WalkSample]:
    """Independent walks; walk i is reproduced by sample_walk with split_seed(seed, i)."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    occupancy = _walk_occupancy(schedule, rs, n_steps)

    def one(i: int) -> WalkSample:
        child = split_seed(seed, i)
        rng = np.random.default_rng(child)
        incr = _sample_cells(schedule, occupancy, rng)
        steps = np.vstack([np.zeros((1, schedule.dim)), np.cumsum(incr, axis=0)])
        return WalkSample(steps=steps, rational_step=rs, seed=child)

    return map_indexed(one, int(n_walks), threads)


@dataclass(frozen=True)
class BallVisitCurve:
    """Estimated visit probabilities of the ball B_a along a walk ensemble.

    partial_sum[n] accumulates p_hat over 1 <= k <= n, the quantity whose
    divergence separates recurrent from transient walks; the n = 0 term
    (always 1) is reported but not accumulated.
    """

    n: np.ndarray
    p_hat: np.ndarray
    partial_sum: np.ndarray
    a: float
    n_walks: int

    def to_csv(self) -> str:
        lines = ["n,p_hat,partial_sum"]
        for k, p, s in zip(self.n, self.p_hat, self.partial_sum):
            lines.append(f"{int(k)},{format_csv_float(p)},{format_csv_float(s)}")
        return "\n".join(lines) + "\n"


def ball_visit_curve(walks: list[WalkSample], a: float) -> BallVisitCurve:
    """Fraction of walks inside B_a at each step, with running partial sums.

    Estimates stabilize from roughly 30 walks; the curve is a Monte Carlo
    diagnostic for the sum criterion, not a proof of either alternative.
    """
    if not walks:
        raise ValueError("need at least one walk")
    if not a > 0:
        raise ValueError("a must be positive")
    lengths = {w.steps.shape[0] for w in walks}
    if len(lengths) != 1:
        raise ValueError("walks must share a common length")
    stacked = np.stack([w.steps for w in walks])  # (W, N+1, d)
    inside = np.linalg.norm(stacked, axis=2) < a
    p_hat = inside.mean(axis=0)
    partial = np.concatenate([[0.0], np.cumsum(p_hat[1:])])
    return BallVisitCurve(
        n=np.arange(p_hat.shape[0]),
        p_hat=p_hat,
        partial_sum=partial,
        a=float(a),
        n_walks=len(walks),
    )


def occupation_time(path: PathSample, a: float) -> float:
    """Left-endpoint Riemann estimate of the time spent in B_a up to the horizon.

    Bias is O(step); the grid step travels with the path, so callers can
    budget for it.  Monotone in both a and the horizon, bounded by the
    horizon.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    dt = np.diff(path.grid)
    inside = np.linalg.norm(path.values[:-1], axis=1) < a
    return float(np.sum(dt * inside))


def occupations_csv(occupations: np.ndarray) -> str:
    """CSV text `path_id,occupation` for a vector of per-path occupation times."""
    lines = ["path_id,occupation"]
    for i, occ in enumerate(np.asarray(occupations, dtype=float)):
        lines.append(f"{i},{format_csv_float(occ)}")
    return "\n".join(lines) + "\n"
