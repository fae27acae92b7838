"""Deterministic, splittable random streams for replicated simulations.

Each replica draws from its own stream, which is a pure function of
``(base_seed, replica)``.  A stream is keyed by a 64-bit mix of the base
seed and the replica index, and individual draws are addressed by a
``(step, channel)`` counter pushed through a splitmix64-style finalizer:

    key(base_seed, r) = mix64(mix64(base_seed ^ TWEAK) + r * R_MULT)
    u(key, t, c)      = mix64(key + t * T_MULT + c * C_MULT) >> 11, scaled to [0, 1)

Because draws are addressed rather than consumed from mutable state,
running replicas in any batch arrangement (all at once, in chunks, or one
at a time) produces identical per-replica results, and skipping a draw
costs nothing.  All arithmetic wraps modulo 2**64.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

_SEED_TWEAK = 0x6A09E667F3BCC909
_REPLICA_MULT = 0x2545F4914F6CDD1D
_STEP_MULT = 0xA24BAED4963EE407
_CHANNEL_MULT = 0x9FB21C651E98DF25

_MIX_M1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_M2 = np.uint64(0x94D049BB133111EB)
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)
_SH11 = np.uint64(11)
_TO_UNIT = 2.0 ** -53


def _mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized over uint64 arrays."""
    z = (z ^ (z >> _SH30)) * _MIX_M1
    z = (z ^ (z >> _SH27)) * _MIX_M2
    return z ^ (z >> _SH31)


def stream_keys(base_seed: int, replicas) -> np.ndarray:
    """Return the uint64 stream key for each replica index.

    ``replicas`` may be a scalar index or any integer array-like; the
    result always has at least one dimension.
    """
    r = np.atleast_1d(np.asarray(replicas)).astype(np.uint64)
    salted = _mix64(np.array([(base_seed ^ _SEED_TWEAK) & _MASK64], dtype=np.uint64))
    return _mix64(salted[0] + r * np.uint64(_REPLICA_MULT))


def counter_uniforms(keys: np.ndarray, step: int, channel) -> np.ndarray:
    """Uniform [0, 1) draws, one per key, addressed by (step, channel).

    ``channel`` may be an int or an int array broadcastable against ``keys``.
    """
    if np.isscalar(channel):
        offset = np.uint64((step * _STEP_MULT + channel * _CHANNEL_MULT) & _MASK64)
        z = _mix64(keys + offset)
    else:
        t_off = np.uint64((step * _STEP_MULT) & _MASK64)
        c_off = np.asarray(channel).astype(np.uint64) * np.uint64(_CHANNEL_MULT)
        z = _mix64(keys + t_off + c_off)
    return (z >> _SH11) * _TO_UNIT


class ReplicaStream:
    """Addressable random stream for a single replica.

    Draws are pure functions of ``(base_seed, replica, step, channel)``,
    so re-running one replica in isolation reproduces exactly the draws it
    would receive inside any batched run.
    """

    __slots__ = ("base_seed", "replica", "_key")

    def __init__(self, base_seed: int, replica: int = 0):
        self.base_seed = base_seed
        self.replica = replica
        self._key = stream_keys(base_seed, replica)

    def uniform(self, step: int, channel: int) -> float:
        return float(counter_uniforms(self._key, step, channel)[0])

    def __repr__(self) -> str:  # pragma: no cover
        return f"ReplicaStream(base_seed={self.base_seed}, replica={self.replica})"
