import numpy as np
import pytest
from numpy.testing import assert_array_equal

from bimoran import (
    ModelParams,
    ParameterError,
    PedigreeEvent,
    PopulationState,
    ReplicaStream,
    Trajectory,
    ancestry_matrix,
    init_weights,
    lineage_sample,
    new_population,
    propagate,
    step,
    summarize,
    weights_at,
)
from bimoran.model import Absorption
from bimoran.verify import GOLDEN_MEAN, GOLDEN_WEIGHTS, golden_trajectory


def _state(flags):
    flags = np.asarray(flags, dtype=bool)
    return PopulationState(flags, int(flags.sum()))


def _random_pedigree(N, n_steps, seed, a=0.4, s=1.0):
    """Fixed pedigree of n_steps events (runs through absorption if hit)."""
    params = ModelParams(N=N, s=s, a=a, base_seed=seed)
    state = new_population(params)
    stream = ReplicaStream(seed)
    events = []
    y = [state.count]
    for t in range(n_steps):
        state, event = step(state, s, stream, t)
        events.append(event)
        y.append(state.count)
    jumps = [0] + [i + 1 for i in range(n_steps) if y[i + 1] != y[i]]
    initial = np.zeros(N, dtype=bool)
    initial[: params.initial_count] = True
    return Trajectory(
        N=N, s=s, initial_advantaged=initial, events=events,
        y_path=np.asarray(y, dtype=np.int64),
        jump_times=np.asarray(jumps, dtype=np.int64),
        absorption=Absorption.TRUNCATED, hitting_time=None,
    )


def test_init_weights_is_indicator():
    assert_array_equal(init_weights(_state([1, 0, 0, 0, 0])), [1, 0, 0, 0, 0])
    assert_array_equal(init_weights(_state([1, 1, 1])), [1, 1, 1])
    assert_array_equal(init_weights(_state([0, 0, 0])), [0, 0, 0])


def test_propagate_halves_and_selfs():
    w = np.array([1.0, 0.0, 0.0])
    out = propagate(w, PedigreeEvent(mother=0, father=1, replaced=2))
    assert out[2] == 0.5
    assert_array_equal(out[:2], w[:2])
    # selfing copies the parent weight
    out = propagate(w, PedigreeEvent(mother=0, father=0, replaced=1))
    assert out[1] == 1.0


def test_golden_pedigree_scalar_and_matrix():
    traj = golden_trajectory()
    scalar = weights_at(traj)
    assert tuple(scalar) == GOLDEN_WEIGHTS
    assert scalar.mean() == GOLDEN_MEAN == 0.525

    matrix = ancestry_matrix(traj)
    founder_marginal = matrix[:, traj.initial_advantaged].sum(axis=1)
    assert tuple(founder_marginal) == GOLDEN_WEIGHTS
    assert founder_marginal.mean() == GOLDEN_MEAN


def test_summarize_time0_and_uniform():
    state = _state([1, 1, 0, 0, 0])
    w0 = init_weights(state)
    summary = summarize(w0, state)
    assert summary.advantaged_mean == 1.0
    assert summary.disadvantaged_mean == 0.0
    assert summary.advantaged_count == 2

    const = np.full(5, 0.375)
    summary = summarize(const, state)
    assert summary.advantaged_mean == summary.disadvantaged_mean == 0.375


def test_summarize_empty_classes_are_none():
    none_adv = summarize(np.zeros(4), _state([0, 0, 0, 0]))
    assert none_adv.advantaged_mean is None
    assert none_adv.disadvantaged_mean == 0.0

    all_adv = summarize(np.ones(4), _state([1, 1, 1, 1]))
    assert all_adv.disadvantaged_mean is None
    assert all_adv.advantaged_mean == 1.0


def test_summarize_golden_at_fixation():
    traj = golden_trajectory()
    state = _state([1, 1, 1, 1, 1])
    summary = summarize(weights_at(traj), state)
    assert summary.advantaged_mean == 21 / 40
    assert summary.disadvantaged_mean is None


def test_summary_mass_balance():
    traj = _random_pedigree(N=8, n_steps=15, seed=3)
    w = weights_at(traj)
    flags = traj.initial_advantaged.copy()
    for event in traj.events:
        flags[event.replaced] = flags[event.mother]
    state = PopulationState(flags, int(flags.sum()))
    summary = summarize(w, state)
    total = 0.0
    if summary.advantaged_mean is not None:
        total += summary.advantaged_mean * summary.advantaged_count
    if summary.disadvantaged_mean is not None:
        total += summary.disadvantaged_mean * (8 - summary.advantaged_count)
    assert total == pytest.approx(w.sum(), abs=1e-14)


def test_summarize_size_mismatch():
    with pytest.raises(ParameterError):
        summarize(np.zeros(3), _state([1, 0]))


def test_ancestry_zero_steps_is_identity():
    traj = _random_pedigree(N=6, n_steps=10, seed=1)
    assert_array_equal(ancestry_matrix(traj, up_to=0), np.eye(6))


@pytest.mark.parametrize("seed", [1, 2, 3, 4])
def test_ancestry_rows_exactly_stochastic(seed):
    traj = _random_pedigree(N=7, n_steps=40, seed=seed)
    matrix = ancestry_matrix(traj)
    # all values are dyadic, so the row sums are exact
    assert_array_equal(matrix.sum(axis=1), np.ones(7))
    assert (matrix >= 0).all()


@pytest.mark.parametrize("seed", [11, 12, 13])
def test_scalar_equals_matrix_marginal_exactly(seed):
    traj = _random_pedigree(N=6, n_steps=25, seed=seed)
    for up_to in (0, 7, 25):
        scalar = weights_at(traj, up_to=up_to)
        matrix = ancestry_matrix(traj, up_to=up_to)
        marginal = matrix[:, traj.initial_advantaged].sum(axis=1)
        assert_array_equal(scalar, marginal)


def test_ancestry_size_guard():
    big = Trajectory(N=2001, s=1.0, initial_advantaged=np.zeros(2001, dtype=bool))
    with pytest.raises(ParameterError):
        ancestry_matrix(big)


def test_lineage_trivial_cases():
    traj = _random_pedigree(N=6, n_steps=0, seed=5)
    rng = np.random.default_rng(0)
    assert lineage_sample(traj, 4, rng) == 4

    # a start site that is never replaced stays put
    traj = _random_pedigree(N=6, n_steps=20, seed=5)
    replaced = {event.replaced for event in traj.events}
    untouched = next(i for i in range(6) if i not in replaced)
    samples = lineage_sample(traj, untouched, rng, size=100)
    assert (samples == untouched).all()


def test_lineage_distribution_matches_ancestry_row():
    traj = _random_pedigree(N=5, n_steps=10, seed=41)
    row = ancestry_matrix(traj)
    rng = np.random.default_rng(7)
    n = 1_000_000
    for start in (0, 3):
        samples = lineage_sample(traj, start, rng, size=n)
        counts = np.bincount(samples, minlength=5)
        for founder in range(5):
            p = row[start, founder]
            se = np.sqrt(p * (1 - p) / n)
            assert abs(counts[founder] / n - p) <= 4 * se + 1e-12, (start, founder)


def test_positive_entries_require_backward_path():
    traj = _random_pedigree(N=7, n_steps=30, seed=17)
    matrix = ancestry_matrix(traj)
    for site in range(7):
        # independent reachability sweep, newest event first
        reachable = {site}
        for event in reversed(traj.events):
            if event.replaced in reachable:
                reachable.discard(event.replaced)
                reachable.update((event.mother, event.father))
        positive = {j for j in range(7) if matrix[site, j] > 0}
        assert positive == reachable
