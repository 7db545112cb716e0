"""Schedules: increment laws, splice construction, and exact path sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semilevy.models import BrownianDrift, CompoundPoisson, LaplaceJump, PureDrift, SymmetricStable
from semilevy.schedule import (
    SemiLevySchedule,
    equivalent_levy_model,
    increment_exponent,
    make_splice,
    period_covariance,
    period_exponent,
    period_mean,
    sample_interval_increment,
    sample_path,
    sample_paths,
    single_segment,
)
from semilevy.util import split_seed

BM = BrownianDrift(0.0, 1.0)
SPLICE = make_splice(
    BrownianDrift(0.4, 1.1), CompoundPoisson(1.5, LaplaceJump(0.2, 0.5)), 0.9, 2.3
)


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------


def test_splice_validation():
    with pytest.raises(ValueError):
        make_splice(BM, BM, 2.0, 1.0)  # q >= p
    with pytest.raises(ValueError):
        make_splice(BM, BM, 0.0, 1.0)
    with pytest.raises(ValueError):
        SemiLevySchedule(period=2.0, segments=((0.7, PureDrift(1.0)), (1.2, PureDrift(1.0))))
    with pytest.raises(ValueError):
        SemiLevySchedule(period=1.0, segments=())


def test_single_segment_is_levy():
    sched = single_segment(BM, 2.0)
    z = np.linspace(-3, 3, 11).reshape(-1, 1)
    assert np.abs(period_exponent(sched, z) - 2.0 * BM.char_exponent(z)).max() <= 1e-12


# ---------------------------------------------------------------------------
# increment exponent laws
# ---------------------------------------------------------------------------


def test_splice_period_exponent_identity():
    # one-period exponent of the splice is q psi_Y + (p - q) psi_Z
    rng = np.random.default_rng(17)
    z = rng.normal(size=(100, 1)) * 3
    got = period_exponent(SPLICE, z)
    want = 0.9 * SPLICE.models[0].char_exponent(z) + 1.4 * SPLICE.models[1].char_exponent(z)
    assert np.abs(got - want).max() <= 1e-12


def test_zero_increment_and_origin():
    assert increment_exponent(SPLICE, 1.3, 1.3, 0.7) == 0
    assert period_exponent(SPLICE, 0.0) == 0


def test_period_exponent_bm_plus_idle():
    # BM for one unit then frozen drift: only the BM segment contributes
    sched = make_splice(BrownianDrift(0.0, 1.0), PureDrift(0.0), 1.0, 2.0)
    assert period_exponent(sched, 1.0) == pytest.approx(-0.5)


schedules = st.sampled_from(
    [
        SPLICE,
        single_segment(BM, 1.0),
        make_splice(PureDrift(1.3), PureDrift(-0.7), 0.7, 2.0),
        SemiLevySchedule(
            period=3.0,
            segments=((0.5, BM), (1.5, PureDrift(0.4)), (1.0, SymmetricStable(1.5, 0.8, 1))),
        ),
    ]
)


@settings(max_examples=40, deadline=None)
@given(
    schedule=schedules,
    s=st.floats(0.0, 20.0),
    dt=st.floats(0.0, 10.0),
    du=st.floats(0.0, 10.0),
    z=st.floats(-5.0, 5.0),
)
def test_increment_exponent_periodic_and_additive(schedule, s, dt, du, z):
    t, u = s + dt, s + dt + du
    p = schedule.period
    direct = increment_exponent(schedule, s, t, z)
    shifted = increment_exponent(schedule, s + p, t + p, z)
    assert abs(shifted - direct) <= 1e-12 * (1.0 + abs(direct))
    split = increment_exponent(schedule, s, t, z) + increment_exponent(schedule, t, u, z)
    whole = increment_exponent(schedule, s, u, z)
    assert abs(whole - split) <= 1e-12 * (1.0 + abs(whole))


def test_occupancy_sums_to_interval_length():
    occ = SPLICE.segment_occupancy(1.234, 7.89)
    assert occ.sum() == pytest.approx(7.89 - 1.234, abs=1e-12)
    assert np.all(occ >= 0)


# ---------------------------------------------------------------------------
# one-period moments
# ---------------------------------------------------------------------------


def test_period_mean_examples():
    # drift splice with (p - q) up then -q down integrates to zero over a period
    p, q = 2.0, 0.7
    drift_splice = make_splice(PureDrift(p - q), PureDrift(-q), q, p)
    assert period_mean(drift_splice) == pytest.approx([0.0], abs=1e-15)

    balanced = make_splice(BrownianDrift(1.0, 1.0), BrownianDrift(-0.5, 1.0), 1.0, 3.0)
    assert period_mean(balanced) == pytest.approx([0.0], abs=1e-15)

    with_cauchy = make_splice(SymmetricStable(1.0, 1.0, 1), BM, 0.5, 1.5)
    assert period_mean(with_cauchy) is None


def test_period_mean_matches_exponent_gradient():
    # gradient of Im psi at 0 equals the one-period mean (finite variance cases)
    h = 1e-5
    for sched in (SPLICE, single_segment(BrownianDrift(0.73, 0.9), 1.7)):
        grad = (
            period_exponent(sched, np.array([h])).imag
            - period_exponent(sched, np.array([-h])).imag
        ) / (2.0 * h)
        assert abs(grad - period_mean(sched)[0]) <= 1e-6


def test_period_covariance():
    sched = make_splice(BrownianDrift(0.0, 2.0), BrownianDrift(0.0, 0.5), 1.0, 3.0)
    assert np.allclose(period_covariance(sched), [[2.0 + 2 * 0.5]])
    assert period_covariance(single_segment(SymmetricStable(1.2, 1.0, 1), 1.0)) is None


def test_equivalent_levy_model_matches_period_exponent():
    z = np.linspace(-4, 4, 17).reshape(-1, 1)
    eq = single_segment(equivalent_levy_model(SPLICE), SPLICE.period)
    assert np.abs(period_exponent(eq, z) - period_exponent(SPLICE, z)).max() <= 1e-12


# ---------------------------------------------------------------------------
# path sampling
# ---------------------------------------------------------------------------


def test_pure_drift_splice_returns_to_zero():
    # recurrent drift splice: X vanishes at every whole period
    p, q = 2.0, 0.5
    sched = make_splice(PureDrift(p - q), PureDrift(-q), q, p)
    path = sample_path(sched, horizon=10 * p, step=0.25, seed=1)
    assert path.values[0] == pytest.approx([0.0])
    for n in range(1, 11):
        i = int(round(n * p / 0.25))
        assert path.grid[i] == pytest.approx(n * p)
        assert abs(path.values[i, 0]) <= 1e-12


def test_path_grid_and_reproducibility():
    path = sample_path(SPLICE, horizon=5.0, step=0.3, seed=77)
    assert path.grid[0] == 0.0
    assert np.all(np.diff(path.grid) > 0)
    assert path.grid[-1] == pytest.approx(5.0)  # partial final cell reaches the horizon
    again = sample_path(SPLICE, horizon=5.0, step=0.3, seed=77)
    assert np.array_equal(path.values, again.values)
    other = sample_path(SPLICE, horizon=5.0, step=0.3, seed=78)
    assert not np.array_equal(path.values, other.values)


def test_sample_paths_split_seeds():
    paths = sample_paths(SPLICE, horizon=2.3, step=0.23, n_paths=3, seed=5)
    for i, path in enumerate(paths):
        assert path.seed == split_seed(5, i)
        direct = sample_path(SPLICE, horizon=2.3, step=0.23, seed=path.seed)
        assert np.array_equal(direct.values, path.values)
    threaded = sample_paths(SPLICE, horizon=2.3, step=0.23, n_paths=3, seed=5, threads=3)
    for a, b in zip(paths, threaded):
        assert np.array_equal(a.values, b.values)


def test_splice_variance_of_period_value():
    # drift-free BM/BM splice: Var X_p = p
    sched = make_splice(BM, BM, 1.0, 2.0)
    rng = np.random.default_rng(9)
    xp = sample_interval_increment(sched, 0.0, 2.0, rng, size=10**4)[:, 0]
    assert abs(xp.var() / 2.0 - 1.0) < 0.05


def test_sampled_period_value_matches_exponent():
    # end-to-end check of boundary splitting: ECF of grid-sampled X_p
    n = 10**4
    paths = sample_paths(SPLICE, horizon=2.3, step=2.3 / 16, n_paths=n, seed=11)
    xp = np.array([p.values[-1, 0] for p in paths])
    for z in (0.3, 0.8, 1.5, 2.2, 3.0):
        ecf = np.exp(1j * z * xp).mean()
        target = np.exp(period_exponent(SPLICE, float(z)))
        assert abs(ecf - target) < 4.0 / np.sqrt(n)


def test_interval_increment_periodicity_in_law():
    # KS between X_t - X_s and its one-period shift
    from scipy.stats import ks_2samp

    rng_a = np.random.default_rng(100)
    rng_b = np.random.default_rng(200)
    s, t = 0.6, 3.1
    a = sample_interval_increment(SPLICE, s, t, rng_a, size=4000)[:, 0]
    b = sample_interval_increment(SPLICE, s + 2.3, t + 2.3, rng_b, size=4000)[:, 0]
    assert ks_2samp(a, b).pvalue > 0.01


def test_csv_export():
    path = sample_path(single_segment(PureDrift(1.0), 1.0), horizon=1.0, step=0.5, seed=0)
    text = path.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "t,x1"
    assert len(lines) == 4
    t, x = lines[2].split(",")
    assert float(t) == 0.5 and float(x) == 0.5
