"""Lockstep simulation of many independent replicas.

All replicas advance through shared numpy arrays, but each lane draws from
its own counter-addressed stream (see :mod:`bimoran.rng`), so results are
bit-identical to running every replica alone and independent of how lanes
are batched.  Alongside the advantage flags the engine propagates, for
every lane, the per-site probability of descending from the initially
advantaged set; at fixation that vector's mean is recorded, which is the
quantity whose expectation the exact solver and the large-N limit predict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .model import CH_DEATH_BASE, CH_FATHER, CH_MOTHER, ModelParams
from .rng import counter_uniforms, stream_keys

ABS_FIXED = 1
ABS_LOST = 2
ABS_TRUNCATED = 3


@dataclass
class EnsembleResult:
    """Per-replica outcomes of a batched run.

    ``fixed_weight_mean[r]`` is the mean ancestral weight over all sites at
    the moment of fixation for lanes that fixed, and 0.0 for lanes that
    were lost or truncated (so its average estimates the expected weight
    carried by the initially advantaged founders on the fixation event).
    """

    replica_indices: np.ndarray
    y0: int
    absorption: np.ndarray        # int8 codes ABS_FIXED / ABS_LOST / ABS_TRUNCATED
    hitting_time: np.ndarray      # absorption step per lane (undefined if truncated)
    fixed_weight_mean: np.ndarray

    @property
    def n_runs(self) -> int:
        return self.absorption.size

    @property
    def n_fixed(self) -> int:
        return int(np.count_nonzero(self.absorption == ABS_FIXED))

    @property
    def n_lost(self) -> int:
        return int(np.count_nonzero(self.absorption == ABS_LOST))

    @property
    def n_truncated(self) -> int:
        return int(np.count_nonzero(self.absorption == ABS_TRUNCATED))

    @property
    def mean(self) -> float:
        return float(self.fixed_weight_mean.mean())

    @property
    def stderr(self) -> float:
        if self.n_runs < 2:
            return float("nan")
        return float(self.fixed_weight_mean.std(ddof=1) / np.sqrt(self.n_runs))


def sample_events(
    keys: np.ndarray, t: int, flags: np.ndarray, rows: np.ndarray, s: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw one (mother, father, replaced) triple per lane at step ``t``.

    ``keys[i]`` is the stream key for the lane stored in ``flags[rows[i]]``.
    The death draw uses per-lane rejection against the maximal weight 1+s;
    channel addressing is identical to the scalar sampler in
    :mod:`bimoran.model`.
    """
    n = flags.shape[1]
    mother = (counter_uniforms(keys, t, CH_MOTHER) * n).astype(np.int64)
    father = (counter_uniforms(keys, t, CH_FATHER) * n).astype(np.int64)

    replaced = np.empty(keys.size, dtype=np.int64)
    pending = np.arange(keys.size)
    accept = 1.0 / (1.0 + s)
    channel = CH_DEATH_BASE
    while pending.size:
        site = (counter_uniforms(keys[pending], t, channel) * n).astype(np.int64)
        u = counter_uniforms(keys[pending], t, channel + 1)
        ok = ~flags[rows[pending], site] | (u < accept)
        replaced[pending[ok]] = site[ok]
        pending = pending[~ok]
        channel += 2
    return mother, father, replaced


def run_ensemble(params: ModelParams, replicas) -> EnsembleResult:
    """Run replicas to absorption (or truncation) and summarize each lane.

    ``replicas`` is either a replica count (indices ``0..replicas-1``) or
    an explicit sequence of replica indices.  Lane ``r`` reproduces
    exactly what :func:`bimoran.model.run_until_absorption` produces for
    the same ``(params.base_seed, r)``.
    """
    if np.isscalar(replicas):
        if replicas < 1:
            raise ParameterError(f"replica count must be >= 1, got {replicas!r}")
        indices = np.arange(int(replicas), dtype=np.int64)
    else:
        indices = np.asarray(replicas, dtype=np.int64)
        if indices.size == 0:
            raise ParameterError("replica index list is empty")

    n = params.N
    k0 = params.initial_count
    n_lanes = indices.size
    keys = stream_keys(params.base_seed, indices)

    flags = np.zeros((n_lanes, n), dtype=bool)
    flags[:, :k0] = True
    weights = np.zeros((n_lanes, n))
    weights[:, :k0] = 1.0
    count = np.full(n_lanes, k0, dtype=np.int64)

    absorption = np.zeros(n_lanes, dtype=np.int8)
    hitting_time = np.zeros(n_lanes, dtype=np.int64)
    xi = np.zeros(n_lanes)

    if k0 == n:
        absorption[:] = ABS_FIXED
        xi[:] = 1.0
        return EnsembleResult(indices, k0, absorption, hitting_time, xi)
    if k0 == 0:
        absorption[:] = ABS_LOST
        return EnsembleResult(indices, k0, absorption, hitting_time, xi)

    max_steps = params.effective_max_steps
    active = np.arange(n_lanes)
    t = 0
    while active.size and t < max_steps:
        mother, father, replaced = sample_events(keys[active], t, flags, active, params.s)

        mother_adv = flags[active, mother]
        replaced_adv = flags[active, replaced]
        weights[active, replaced] = 0.5 * (weights[active, mother] + weights[active, father])
        flags[active, replaced] = mother_adv
        count[active] += mother_adv.astype(np.int64) - replaced_adv.astype(np.int64)
        t += 1

        k_now = count[active]
        fixed = k_now == n
        lost = k_now == 0
        if fixed.any():
            lanes = active[fixed]
            absorption[lanes] = ABS_FIXED
            hitting_time[lanes] = t
            xi[lanes] = weights[lanes].mean(axis=1)
        if lost.any():
            lanes = active[lost]
            absorption[lanes] = ABS_LOST
            hitting_time[lanes] = t
        if fixed.any() or lost.any():
            active = active[~(fixed | lost)]

    if active.size:
        absorption[active] = ABS_TRUNCATED
        hitting_time[active] = t

    return EnsembleResult(indices, k0, absorption, hitting_time, xi)
