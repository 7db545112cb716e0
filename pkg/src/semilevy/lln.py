"""Law-of-large-numbers verifiers for periodic Levy schedules.

With a finite one-period mean, X_t / t converges almost surely to the
per-period mean rate; with an infinite one-period absolute moment the ratio
|X_t| / t has unbounded upper limits instead.  The weak law holds exactly
when the one-period law satisfies two tail conditions, which are estimated
here directly from draws of the one-period increment (no path grid involved,
the conditions concern that law alone).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .schedule import (
    SemiLevySchedule,
    period_covariance,
    period_mean,
    sample_interval_increment,
)
from .util import format_csv_float, map_indexed, split_seed

__all__ = [
    "LLNReport",
    "slln_check",
    "divergence_check",
    "wlln_conditions",
]

FLAG_SLLN = "slln-consistent"
FLAG_DIVERGENCE = "divergence-consistent"
FLAG_TAIL_VANISHES = "tail-vanishes"
FLAG_TAIL_PERSISTS = "tail-persists"


@dataclass(frozen=True)
class LLNReport:
    """Results of a law-of-large-numbers check; unused blocks stay None.

    deviations block: per-horizon statistics of |X_T / T - c| (or of
    |X_T| / T when divergence is expected and no target c exists).
    conditions block: estimates of t * P(|X_p| > t) and of the truncated
    mean E[X_p 1{|X_p| <= t}] over a t-grid, with standard errors.
    """

    seed: int
    horizons: Optional[np.ndarray] = None
    mean_dev: Optional[np.ndarray] = None
    max_dev: Optional[np.ndarray] = None
    target: Optional[np.ndarray] = None
    divergence_expected: bool = False
    running_max_median: Optional[np.ndarray] = None
    tail_t: Optional[np.ndarray] = None
    tail: Optional[np.ndarray] = None
    tail_se: Optional[np.ndarray] = None
    trunc_mean: Optional[np.ndarray] = None
    trunc_se: Optional[np.ndarray] = None
    implied_c: Optional[np.ndarray] = None
    flag: Optional[str] = None

    def deviations_csv(self) -> str:
        """CSV block `T,mean_dev,max_dev`."""
        if self.horizons is None:
            raise ValueError("this report has no deviations block")
        lines = ["T,mean_dev,max_dev"]
        for t, m, x in zip(self.horizons, self.mean_dev, self.max_dev):
            lines.append(",".join(format_csv_float(v) for v in (t, m, x)))
        return "\n".join(lines) + "\n"

    def conditions_csv(self) -> str:
        """CSV block `t,tail,tail_se,trunc_mean,trunc_se`.

        For dimension > 1 the truncated-mean columns report the Euclidean
        norm of the vector estimate.
        """
        if self.tail_t is None:
            raise ValueError("this report has no conditions block")
        tm = np.linalg.norm(np.atleast_2d(self.trunc_mean), axis=1)
        ts = np.linalg.norm(np.atleast_2d(self.trunc_se), axis=1)
        lines = ["t,tail,tail_se,trunc_mean,trunc_se"]
        for row in zip(self.tail_t, self.tail, self.tail_se, tm, ts):
            lines.append(",".join(format_csv_float(v) for v in row))
        return "\n".join(lines) + "\n"


def _horizon_values(
    schedule: SemiLevySchedule,
    horizons: np.ndarray,
    n_paths: int,
    seed: int,
    threads: int,
) -> np.ndarray:
    """X at each horizon for each path, via exact increments between horizons."""

    def one(i: int) -> np.ndarray:
        rng = np.random.default_rng(split_seed(seed, i))
        out = np.empty((horizons.size, schedule.dim))
        x = np.zeros(schedule.dim)
        prev = 0.0
        for j, t in enumerate(horizons):
            x = x + sample_interval_increment(schedule, prev, float(t), rng)
            prev = float(t)
            out[j] = x
        return out

    return np.stack(map_indexed(one, int(n_paths), threads))


def _check_horizons(horizons: Sequence[float]) -> np.ndarray:
    h = np.asarray(horizons, dtype=float)
    if h.ndim != 1 or h.size < 1:
        raise ValueError("horizons must be a nonempty 1-d sequence")
    if h[0] <= 0 or np.any(np.diff(h) <= 0):
        raise ValueError("horizons must be positive and increasing")
    return h


def slln_check(
    schedule: SemiLevySchedule,
    horizons: Sequence[float],
    n_paths: int,
    seed: int,
    threads: int = 1,
) -> LLNReport:
    """Deviation of X_T / T from the per-period mean rate, across horizons.

    Requires a finite one-period mean (use divergence_check otherwise).
    Flags consistency when the mean deviation at the largest horizon falls
    below 3x the CLT scale sqrt(tr Cov(X_p) / (p T)), whenever the one-period
    covariance is finite.
    """
    h = _check_horizons(horizons)
    if n_paths < 50:
        raise ValueError("need at least 50 paths")
    mu = period_mean(schedule)
    if mu is None:
        raise ValueError("one-period mean is absent (E[|X_p|] = infinity); use divergence_check")
    c = mu / schedule.period
    vals = _horizon_values(schedule, h, n_paths, seed, threads)  # (paths, T, d)
    dev = np.linalg.norm(vals / h[None, :, None] - c, axis=2)
    mean_dev = dev.mean(axis=0)
    max_dev = dev.max(axis=0)
    flag = None
    cov = period_covariance(schedule)
    if cov is not None:
        clt_scale = math.sqrt(np.trace(cov) / (schedule.period * float(h[-1])))
        if mean_dev[-1] <= 3.0 * clt_scale:
            flag = FLAG_SLLN
    return LLNReport(
        seed=int(seed),
        horizons=h,
        mean_dev=mean_dev,
        max_dev=max_dev,
        target=c,
        divergence_expected=False,
        flag=flag,
    )


def divergence_check(
    schedule: SemiLevySchedule,
    horizons: Sequence[float],
    n_paths: int,
    seed: int,
    threads: int = 1,
) -> LLNReport:
    """Running maxima of |X_T| / T for schedules with an infinite one-period mean.

    Precondition: the one-period mean must be absent; a finite mean is a
    caller error because the ratio then converges instead.  Flags divergence
    consistency when the median running maximum grows by at least 50% from
    the first to the last horizon (the per-path maxima of a heavy-tailed
    ratio accumulate roughly linearly in the number of horizon doublings, so
    the cumulative comparison is the stable reading).
    """
    h = _check_horizons(horizons)
    if h.size < 2:
        raise ValueError("need at least two horizons")
    if n_paths < 50:
        raise ValueError("need at least 50 paths")
    if period_mean(schedule) is not None:
        raise ValueError("one-period mean exists; slln_check applies, not divergence_check")
    vals = _horizon_values(schedule, h, n_paths, seed, threads)
    ratios = np.linalg.norm(vals, axis=2) / h[None, :]
    running = np.maximum.accumulate(ratios, axis=1)
    median_running = np.median(running, axis=0)
    flag = FLAG_DIVERGENCE if median_running[-1] >= 1.5 * median_running[0] else None
    return LLNReport(
        seed=int(seed),
        horizons=h,
        mean_dev=ratios.mean(axis=0),
        max_dev=ratios.max(axis=0),
        target=None,
        divergence_expected=True,
        running_max_median=median_running,
        flag=flag,
    )


def wlln_conditions(
    schedule: SemiLevySchedule,
    t_grid: Sequence[float],
    n_samples: int,
    seed: int,
) -> LLNReport:
    """Monte Carlo estimates of the weak-law tail conditions on the one-period law.

    Estimates t * P(|X_p| > t) and E[X_p 1{|X_p| <= t}] over the t-grid with
    standard errors, from direct draws of the one-period increment.  When the
    tail estimate at the largest t is statistically indistinguishable from 0,
    the implied limit constant c = (truncated mean) / p is reported; a tail
    that persists means no constant exists and the weak law fails.
    """
    t = _check_horizons(t_grid)
    n = int(n_samples)
    if n < 10**4:
        raise ValueError("need at least 1e4 samples")
    rng = np.random.default_rng(seed)
    x = sample_interval_increment(schedule, 0.0, schedule.period, rng, size=n)
    r = np.linalg.norm(x, axis=1)

    tail = np.empty(t.size)
    tail_se = np.empty(t.size)
    trunc_mean = np.empty((t.size, schedule.dim))
    trunc_se = np.empty((t.size, schedule.dim))
    for j, tj in enumerate(t):
        p_hat = float(np.mean(r > tj))
        tail[j] = tj * p_hat
        tail_se[j] = tj * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n)
        w = x * (r <= tj)[:, None]
        trunc_mean[j] = w.mean(axis=0)
        trunc_se[j] = w.std(axis=0, ddof=1) / math.sqrt(n)

    tail_gone = tail[-1] <= 3.0 * max(tail_se[-1], 1e-300) or tail[-1] == 0.0
    implied_c = trunc_mean[-1] / schedule.period if tail_gone else None
    flag = FLAG_TAIL_VANISHES if tail_gone else FLAG_TAIL_PERSISTS
    return LLNReport(
        seed=int(seed),
        tail_t=t,
        tail=tail,
        tail_se=tail_se,
        trunc_mean=trunc_mean,
        trunc_se=trunc_se,
        implied_c=implied_c,
        flag=flag,
    )
