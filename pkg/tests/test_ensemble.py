import numpy as np
import pytest
from numpy.testing import assert_array_equal

from bimoran import (
    Absorption,
    ModelParams,
    ParameterError,
    exact_absorption,
    fixation_probability,
    run_until_absorption,
)
from bimoran.ensemble import ABS_FIXED, ABS_LOST, ABS_TRUNCATED, run_ensemble
from bimoran.weights import weights_at

_CODE_OF = {
    Absorption.FIXED: ABS_FIXED,
    Absorption.LOST: ABS_LOST,
    Absorption.TRUNCATED: ABS_TRUNCATED,
}


def test_batch_equals_isolated_lanes():
    params = ModelParams(N=9, s=1.0, a=0.4, base_seed=555)
    full = run_ensemble(params, 25)
    for r in (0, 3, 11, 24):
        single = run_ensemble(params, [r])
        assert single.absorption[0] == full.absorption[r]
        assert single.hitting_time[0] == full.hitting_time[r]
        assert single.fixed_weight_mean[0] == full.fixed_weight_mean[r]


def test_batch_matches_scalar_runner():
    params = ModelParams(N=7, s=0.8, a=0.4, base_seed=400)
    batch = run_ensemble(params, 8)
    for r in range(8):
        traj = run_until_absorption(params, replica=r)
        assert _CODE_OF[traj.absorption] == batch.absorption[r]
        assert traj.hitting_time == batch.hitting_time[r]
        if traj.absorption is Absorption.FIXED:
            xi = float(weights_at(traj).mean())
            assert xi == batch.fixed_weight_mean[r]
        else:
            assert batch.fixed_weight_mean[r] == 0.0


def test_boundary_initial_fractions():
    fixed = run_ensemble(ModelParams(N=6, s=1.0, a=1.0, base_seed=0), 10)
    assert (fixed.absorption == ABS_FIXED).all()
    assert_array_equal(fixed.fixed_weight_mean, np.ones(10))
    assert_array_equal(fixed.hitting_time, np.zeros(10, dtype=np.int64))
    assert fixed.mean == 1.0

    lost = run_ensemble(ModelParams(N=6, s=1.0, a=0.0, base_seed=0), 10)
    assert (lost.absorption == ABS_LOST).all()
    assert lost.mean == 0.0


def test_truncated_lanes_contribute_zero():
    params = ModelParams(N=30, s=0.0, a=0.5, base_seed=2, max_steps=2)
    result = run_ensemble(params, 50)
    assert (result.absorption == ABS_TRUNCATED).all()
    assert result.n_truncated == 50
    assert result.mean == 0.0


def test_counts_partition_runs():
    result = run_ensemble(ModelParams(N=10, s=1.0, a=0.3, base_seed=8), 500)
    assert result.n_fixed + result.n_lost + result.n_truncated == result.n_runs == 500


def test_seed_changes_outcomes():
    params1 = ModelParams(N=15, s=1.0, a=0.5, base_seed=1)
    params2 = ModelParams(N=15, s=1.0, a=0.5, base_seed=2)
    r1 = run_ensemble(params1, 200)
    r2 = run_ensemble(params2, 200)
    assert not np.array_equal(r1.hitting_time, r2.hitting_time)
    # same seed is fully reproducible
    r1b = run_ensemble(params1, 200)
    assert_array_equal(r1.hitting_time, r1b.hitting_time)
    assert_array_equal(r1.fixed_weight_mean, r1b.fixed_weight_mean)


def test_fixation_frequency_matches_ruin_formula():
    n = 30_000
    result = run_ensemble(ModelParams(N=50, s=1.0, a=0.5, base_seed=909), n)
    exact = fixation_probability(50, 1.0, 25)
    freq = result.n_fixed / n
    assert abs(freq - exact) < 4 * np.sqrt(exact * (1 - exact) / n)


def test_mean_matches_exact_solver_small_population():
    n = 20_000
    result = run_ensemble(ModelParams(N=12, s=1.0, a=0.5, base_seed=33), n)
    expected = exact_absorption(12, 1.0, 6, 12).u
    assert abs(result.mean - expected) < 4 * result.stderr


def test_stderr_scales_with_replica_count():
    params = ModelParams(N=20, s=1.0, a=0.5, base_seed=12)
    small = run_ensemble(params, 1000)
    large = run_ensemble(params, 4000)
    ratio = small.stderr / large.stderr
    assert 2.0 * 0.8 < ratio < 2.0 * 1.2


def test_replicas_validation():
    params = ModelParams(N=5, s=1.0, a=0.4, base_seed=0)
    with pytest.raises(ParameterError):
        run_ensemble(params, 0)
    with pytest.raises(ParameterError):
        run_ensemble(params, [])
