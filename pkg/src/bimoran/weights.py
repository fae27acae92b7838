"""Ancestral genetic weights along a realized pedigree.

The weight of individual ``i`` at time ``n`` is the probability that a
gene sampled uniformly in ``i`` descends from some member of the initially
advantaged set, given the pedigree.  Each reproduction event replaces one
site's weight by the average of its parents' weights; everything here is a
consequence of that halving rule.

All updates average two values, so every weight is a dyadic rational held
exactly in binary floating point until the exponent underflows (about a
thousand successive halvings), far beyond any pedigree handled here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .model import PedigreeEvent, PopulationState, Trajectory

# Dense founder-distribution matrices are N x N; keep them desk-sized.
ANCESTRY_MATRIX_MAX_N = 2000


@dataclass(frozen=True)
class WeightSummary:
    """Mean ancestral weight among advantaged and disadvantaged sites.

    Either mean is None when its class is empty (all or none advantaged).
    """

    advantaged_mean: float | None
    disadvantaged_mean: float | None
    advantaged_count: int


def init_weights(state: PopulationState) -> np.ndarray:
    """Indicator of the advantaged set: the time-0 weight vector."""
    return state.advantaged.astype(np.float64)


def propagate(weights: np.ndarray, event: PedigreeEvent) -> np.ndarray:
    """Apply one reproduction event: the replaced site takes the parents' mean."""
    out = weights.copy()
    out[event.replaced] = 0.5 * (weights[event.mother] + weights[event.father])
    return out


def weights_at(trajectory: Trajectory, up_to: int | None = None) -> np.ndarray:
    """Weight vector after replaying the first ``up_to`` events (default all)."""
    events = trajectory.events if up_to is None else trajectory.events[:up_to]
    w = trajectory.initial_advantaged.astype(np.float64)
    for event in events:
        w[event.replaced] = 0.5 * (w[event.mother] + w[event.father])
    return w


def summarize(weights: np.ndarray, state: PopulationState) -> WeightSummary:
    """Class means of the weight vector for the advantaged/disadvantaged split.

    ``weights`` and ``state`` must refer to the same time step.
    """
    if weights.size != state.advantaged.size:
        raise ParameterError(
            f"weight vector has {weights.size} sites, state has {state.advantaged.size}"
        )
    adv = state.advantaged
    k = int(state.count)
    adv_mean = float(weights[adv].mean()) if k > 0 else None
    dis_mean = float(weights[~adv].mean()) if k < weights.size else None
    return WeightSummary(adv_mean, dis_mean, k)


def ancestry_matrix(trajectory: Trajectory, up_to: int | None = None) -> np.ndarray:
    """Founder distribution per site: entry (i, j) is the probability that a
    gene of site ``i`` at the current time descends from founder ``j``.

    Rows start as the identity and each event replaces one row by its
    parents' average, so every row stays an exact probability distribution.
    Restricting row ``i`` to the initially advantaged columns and summing
    reproduces the scalar weight of site ``i`` exactly.
    """
    n = trajectory.N
    if n > ANCESTRY_MATRIX_MAX_N:
        raise ParameterError(
            f"dense ancestry matrix is limited to N <= {ANCESTRY_MATRIX_MAX_N}, got N = {n}"
        )
    events = trajectory.events if up_to is None else trajectory.events[:up_to]
    matrix = np.eye(n)
    for event in events:
        matrix[event.replaced] = 0.5 * (matrix[event.mother] + matrix[event.father])
    return matrix


def lineage_sample(
    trajectory: Trajectory,
    start: int,
    rng: np.random.Generator,
    size: int | None = None,
    up_to: int | None = None,
):
    """Trace genes backward from ``start`` to their founding site.

    Walking backward through the events, a lineage sitting on the replaced
    site of an event jumps to the mother or the father with probability
    1/2 each, and stays put otherwise.  The distribution of the returned
    founder equals row ``start`` of :func:`ancestry_matrix`.

    With ``size=None`` a single founder site is returned; otherwise an
    int64 array of ``size`` independent samples.
    """
    events = trajectory.events if up_to is None else trajectory.events[:up_to]
    scalar = size is None
    positions = np.full(1 if scalar else size, start, dtype=np.int64)
    for event in reversed(events):
        on_replaced = positions == event.replaced
        n_hit = int(np.count_nonzero(on_replaced))
        if n_hit:
            take_mother = rng.random(n_hit) < 0.5
            positions[on_replaced] = np.where(take_mother, event.mother, event.father)
    return int(positions[0]) if scalar else positions
