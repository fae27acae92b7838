"""Forward simulation of a biparental Moran model with selection at death.

A population of ``N`` haploid individuals occupies fixed sites ``0..N-1``.
Each individual is either advantaged (death weight 1) or disadvantaged
(death weight ``1+s``).  One time step consists of:

1. a mother and a father drawn independently and uniformly over sites
   (the two draws may coincide);
2. their offspring replacing a site drawn with probability proportional
   to its death weight, independently of the parent draws (the replaced
   site may equal either parent);
3. the offspring occupying the replaced site and inheriting the advantage
   state of the mother, the parent that transmits the selected locus.

The advantaged count is then a Markov chain absorbed at 0 and ``N`` whose
one-step law is available in closed form via :func:`y_transition_probs`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .rng import ReplicaStream

# Draw channels within one time step.  Channels 2, 4, 6, ... propose a
# death site, channels 3, 5, 7, ... decide acceptance of that proposal.
CH_MOTHER = 0
CH_FATHER = 1
CH_DEATH_BASE = 2


@dataclass(frozen=True)
class ModelParams:
    """Simulation parameters.

    N          population size (>= 2)
    s          selection strength; disadvantaged death weight is 1+s (s >= 0)
    a          initial advantaged fraction; Y0 = floor(a*N)
    base_seed  64-bit seed from which all replica streams derive
    max_steps  safety cap on time steps (defaults to 50*N**2)
    """

    N: int
    s: float
    a: float
    base_seed: int = 0
    max_steps: int | None = None

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 2:
            raise ParameterError(f"N must be an integer >= 2, got {self.N!r}")
        if not 0.0 <= self.a <= 1.0:
            raise ParameterError(f"a must lie in [0, 1], got {self.a!r}")
        if self.s < 0.0:
            raise ParameterError(f"s must be >= 0, got {self.s!r}")
        if self.max_steps is not None and self.max_steps <= 0:
            raise ParameterError(f"max_steps must be positive, got {self.max_steps!r}")

    @property
    def initial_count(self) -> int:
        # The nudge keeps floor(a*N) at its intended integer when a*N is
        # an integer whose float product lands just below it (e.g. 0.29*100).
        return int(math.floor(self.a * self.N + 1e-9))

    @property
    def effective_max_steps(self) -> int:
        return self.max_steps if self.max_steps is not None else 50 * self.N * self.N


@dataclass
class PopulationState:
    """Advantage flags per site plus their count."""

    advantaged: np.ndarray
    count: int

    def copy(self) -> "PopulationState":
        return PopulationState(self.advantaged.copy(), self.count)


@dataclass(frozen=True)
class PedigreeEvent:
    """One reproduction event: sites of mother, father and replaced individual."""

    mother: int
    father: int
    replaced: int


class Absorption(enum.Enum):
    FIXED = "fixed"        # advantaged count reached N
    LOST = "lost"          # advantaged count reached 0
    TRUNCATED = "truncated"  # max_steps hit before absorption


@dataclass
class Trajectory:
    """A realized pedigree together with the advantaged-count path.

    ``y_path[t]`` is the advantaged count after ``t`` steps, so
    ``len(y_path) == len(events) + 1``.  ``jump_times`` starts with the
    conventional 0 followed by exactly the indices ``t`` with
    ``y_path[t] != y_path[t-1]``.  ``hitting_time`` is the absorption step
    index, or None when the run was truncated.
    """

    N: int
    s: float
    initial_advantaged: np.ndarray
    events: list[PedigreeEvent] = field(default_factory=list)
    y_path: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    jump_times: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    absorption: Absorption = Absorption.TRUNCATED
    hitting_time: int | None = None

    @property
    def n_steps(self) -> int:
        return len(self.events)


def new_population(params: ModelParams) -> PopulationState:
    """Initial population with sites ``0..Y0-1`` advantaged.

    The model is exchangeable over sites, so the deterministic placement
    is statistically equivalent to any other and aids reproducibility.
    """
    k0 = params.initial_count
    flags = np.zeros(params.N, dtype=bool)
    flags[:k0] = True
    return PopulationState(flags, k0)


def y_transition_probs(N: int, s: float, k: int) -> tuple[float, float, float]:
    """One-step law (down, stay, up) of the advantaged count at value ``k``.

    For interior k the chain moves down with probability p_k/(2+s), up with
    probability p_k*(1+s)/(2+s) and stays otherwise, where

        p_k = (2+s) * k * (N-k) / (N * (k + (1+s)*(N-k)))

    is the probability that the step changes the count at all. States 0
    and N are absorbing.
    """
    if not 0 <= k <= N:
        raise ParameterError(f"k must lie in [0, {N}], got {k}")
    if k == 0 or k == N:
        return (0.0, 1.0, 0.0)
    p_k = (2.0 + s) * k * (N - k) / (N * (k + (1.0 + s) * (N - k)))
    down = p_k / (2.0 + s)
    up = p_k * (1.0 + s) / (2.0 + s)
    return (down, 1.0 - p_k, up)


def _sample_death_site(flags: np.ndarray, s: float, stream: ReplicaStream, t: int) -> int:
    """Death-weight-proportional site draw by rejection.

    Proposals are uniform; a disadvantaged site (weight 1+s, the maximum)
    is always accepted, an advantaged one with probability 1/(1+s).
    Channel addressing matches the batched engine, which never skips
    channels, so scalar and batched runs consume identical draws.
    """
    n = flags.size
    accept = 1.0 / (1.0 + s)
    channel = CH_DEATH_BASE
    while True:
        site = int(stream.uniform(t, channel) * n)
        if not flags[site] or stream.uniform(t, channel + 1) < accept:
            return site
        channel += 2


def step(
    state: PopulationState, s: float, stream: ReplicaStream, t: int
) -> tuple[PopulationState, PedigreeEvent]:
    """Advance one time step; returns the new state and the realized event.

    ``t`` addresses the stream's draws for this step; calling with the
    same ``(stream, t)`` twice replays the same event.
    """
    n = state.advantaged.size
    mother = int(stream.uniform(t, CH_MOTHER) * n)
    father = int(stream.uniform(t, CH_FATHER) * n)
    replaced = _sample_death_site(state.advantaged, s, stream, t)
    flags = state.advantaged.copy()
    was_adv = bool(flags[replaced])
    now_adv = bool(flags[mother])
    flags[replaced] = now_adv
    count = state.count + int(now_adv) - int(was_adv)
    return PopulationState(flags, count), PedigreeEvent(mother, father, replaced)


def run_until_absorption(
    params: ModelParams, replica: int = 0, stream: ReplicaStream | None = None
) -> Trajectory:
    """Simulate one replica until the advantaged count hits 0 or N.

    Stops with ``Absorption.TRUNCATED`` if ``max_steps`` is exhausted
    first; the caller decides whether to keep such runs.
    """
    if stream is None:
        stream = ReplicaStream(params.base_seed, replica)
    state = new_population(params)
    n = params.N
    max_steps = params.effective_max_steps

    events: list[PedigreeEvent] = []
    y_path = [state.count]
    jump_times = [0]

    absorption: Absorption | None = None
    hitting_time: int | None = None
    if state.count == n:
        absorption, hitting_time = Absorption.FIXED, 0
    elif state.count == 0:
        absorption, hitting_time = Absorption.LOST, 0

    t = 0
    while absorption is None:
        state, event = step(state, params.s, stream, t)
        t += 1
        events.append(event)
        y_path.append(state.count)
        if y_path[-1] != y_path[-2]:
            jump_times.append(t)
        if state.count == n:
            absorption, hitting_time = Absorption.FIXED, t
        elif state.count == 0:
            absorption, hitting_time = Absorption.LOST, t
        elif t >= max_steps:
            absorption = Absorption.TRUNCATED

    initial = np.zeros(n, dtype=bool)
    initial[: params.initial_count] = True
    return Trajectory(
        N=n,
        s=params.s,
        initial_advantaged=initial,
        events=events,
        y_path=np.asarray(y_path, dtype=np.int64),
        jump_times=np.asarray(jump_times, dtype=np.int64),
        absorption=absorption,
        hitting_time=hitting_time,
    )
