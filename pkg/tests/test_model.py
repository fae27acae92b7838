import numpy as np
import pytest
from scipy import stats

from bimoran import (
    Absorption,
    ModelParams,
    ParameterError,
    ReplicaStream,
    new_population,
    run_until_absorption,
    step,
    y_transition_probs,
)
from bimoran.ensemble import sample_events
from bimoran.rng import stream_keys


@pytest.mark.parametrize("kwargs", [
    dict(N=1, s=1.0, a=0.5),
    dict(N=10, s=-0.5, a=0.5),
    dict(N=10, s=1.0, a=-0.1),
    dict(N=10, s=1.0, a=1.2),
    dict(N=10, s=1.0, a=0.5, max_steps=0),
])
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ParameterError):
        ModelParams(base_seed=0, **kwargs)


@pytest.mark.parametrize("N,a,expected", [
    (5, 0.2, 1),
    (100, 0.3, 30),
    (7, 1.0, 7),
    (100, 0.29, 29),   # float product 28.999... must still floor to 29
])
def test_initial_count(N, a, expected):
    state = new_population(ModelParams(N=N, s=1.0, a=a))
    assert state.count == expected
    assert int(state.advantaged.sum()) == expected
    assert state.advantaged[:expected].all()


def test_transition_probs_absorbing_states():
    assert y_transition_probs(5, 1.0, 0) == (0.0, 1.0, 0.0)
    assert y_transition_probs(5, 1.0, 5) == (0.0, 1.0, 0.0)


def test_transition_probs_hand_value():
    # p_k = 3*2*3 / (5*(2 + 2*3)) = 0.45, split 1 : (1+s) between down and up
    down, stay, up = y_transition_probs(5, 1.0, 2)
    assert down == pytest.approx(0.15, abs=1e-15)
    assert stay == pytest.approx(0.55, abs=1e-15)
    assert up == pytest.approx(0.30, abs=1e-15)


@pytest.mark.parametrize("N,s", [(5, 0.0), (17, 0.3), (50, 2.0), (100, 10.0)])
def test_transition_probs_normalized_and_biased(N, s):
    for k in range(1, N):
        down, stay, up = y_transition_probs(N, s, k)
        assert down + stay + up == pytest.approx(1.0, abs=1e-14)
        assert up == pytest.approx((1.0 + s) * down, rel=1e-13)


def test_transition_probs_domain_error():
    with pytest.raises(ParameterError):
        y_transition_probs(5, 1.0, 6)
    with pytest.raises(ParameterError):
        y_transition_probs(5, 1.0, -1)


def test_step_in_absorbing_state_keeps_count():
    params = ModelParams(N=6, s=1.0, a=1.0, base_seed=3)
    state = new_population(params)
    stream = ReplicaStream(3)
    for t in range(25):
        state, _ = step(state, params.s, stream, t)
        assert state.count == 6
        assert state.advantaged.all()


def test_scalar_step_matches_batched_sampler():
    params = ModelParams(N=9, s=0.7, a=0.4, base_seed=31)
    state = new_population(params)
    stream = ReplicaStream(31, replica=5)
    _, event = step(state, params.s, stream, 12)

    keys = stream_keys(31, 5)
    flags = state.advantaged[None, :]
    mother, father, replaced = sample_events(keys, 12, flags, np.array([0]), params.s)
    assert (event.mother, event.father, event.replaced) == (mother[0], father[0], replaced[0])


def _one_step_events(N, k, s, n_lanes, seed):
    """Draw one event per lane from the same population state."""
    keys = stream_keys(seed, np.arange(n_lanes))
    flags = np.zeros((n_lanes, N), dtype=bool)
    flags[:, :k] = True
    return sample_events(keys, 0, flags, np.arange(n_lanes), s)


def test_parent_and_death_marginals_chisquare():
    N, k, s = 6, 2, 1.5
    n = 1_000_000
    mother, father, replaced = _one_step_events(N, k, s, n, seed=2024)
    for draws in (mother, father):
        pvalue = stats.chisquare(np.bincount(draws, minlength=N)).pvalue
        assert pvalue > 1e-4
    weights = np.where(np.arange(N) < k, 1.0, 1.0 + s)
    expected = weights / weights.sum() * n
    pvalue = stats.chisquare(np.bincount(replaced, minlength=N), expected).pvalue
    assert pvalue > 1e-4


def test_death_draw_uniform_when_neutral():
    N, k = 6, 3
    _, _, replaced = _one_step_events(N, k, 0.0, 500_000, seed=99)
    pvalue = stats.chisquare(np.bincount(replaced, minlength=N)).pvalue
    assert pvalue > 1e-4


def test_replaced_advantaged_probability_hand_value():
    # N=5, k=2, s=1: P(replaced site is advantaged) = 2/(2 + 2*3) = 0.25
    n = 1_000_000
    _, _, replaced = _one_step_events(5, 2, 1.0, n, seed=7)
    freq = (replaced < 2).mean()
    assert abs(freq - 0.25) < 4 * np.sqrt(0.25 * 0.75 / n)


def test_one_step_count_law_matches_transition_probs():
    N, k, s = 10, 4, 1.0
    n = 200_000
    mother, _, replaced = _one_step_events(N, k, s, n, seed=5150)
    emp_up = ((mother < k) & (replaced >= k)).mean()
    emp_down = ((mother >= k) & (replaced < k)).mean()
    down, _, up = y_transition_probs(N, s, k)
    for emp, exact in ((emp_down, down), (emp_up, up)):
        assert abs(emp - exact) < 4 * np.sqrt(exact * (1 - exact) / n)


def test_trivial_absorption_at_boundaries():
    fixed = run_until_absorption(ModelParams(N=8, s=1.0, a=1.0, base_seed=0))
    assert fixed.absorption is Absorption.FIXED
    assert fixed.hitting_time == 0
    assert fixed.events == []

    lost = run_until_absorption(ModelParams(N=8, s=1.0, a=0.0, base_seed=0))
    assert lost.absorption is Absorption.LOST
    assert lost.hitting_time == 0


def test_trajectory_invariants():
    traj = run_until_absorption(ModelParams(N=12, s=1.0, a=0.5, base_seed=21))
    y = traj.y_path
    assert y[0] == 6
    diffs = np.diff(y)
    assert set(np.unique(diffs)).issubset({-1, 0, 1})

    assert traj.jump_times[0] == 0
    change_indices = np.flatnonzero(diffs != 0) + 1
    assert np.array_equal(traj.jump_times[1:], change_indices)

    assert traj.absorption in (Absorption.FIXED, Absorption.LOST)
    assert traj.hitting_time == len(traj.events)
    assert y[-1] in (0, 12)
    # absorption is first passage: no earlier boundary hit
    assert not np.isin(y[:-1], (0, 12)).any()


def test_truncation_flagged():
    traj = run_until_absorption(ModelParams(N=20, s=0.0, a=0.5, base_seed=1, max_steps=3))
    assert traj.absorption is Absorption.TRUNCATED
    assert traj.hitting_time is None
    assert len(traj.events) == 3


def test_jump_chain_up_probability():
    # Pooled over trajectories, the direction of each count jump is an
    # independent coin with up-probability (1+s)/(2+s) at every level.
    N, s = 10, 1.0
    q = (1 + s) / (2 + s)
    ups = np.zeros(N, dtype=np.int64)
    totals = np.zeros(N, dtype=np.int64)
    replica = 0
    for a in (0.2, 0.5, 0.8):
        for _ in range(200):
            traj = run_until_absorption(ModelParams(N=N, s=s, a=a, base_seed=1717), replica)
            replica += 1
            jump_at = traj.jump_times[1:]
            before = traj.y_path[jump_at - 1]
            after = traj.y_path[jump_at]
            for b, c in zip(before, after):
                totals[b] += 1
                ups[b] += int(c > b)
    tested = 0
    for k in range(1, N):
        if totals[k] >= 100:
            se = np.sqrt(q * (1 - q) / totals[k])
            assert abs(ups[k] / totals[k] - q) < 4 * se, f"level {k}"
            tested += 1
    assert tested >= 7
