"""Identity suite: every closed form checked against an independent route.

Each check reports its single worst deviation over a grid of population
sizes, selection strengths and interior counts, so the suite doubles as a
regression harness and as a quick self-test after installation (exposed
as the ``verify`` CLI subcommand).

The suite is deterministic and independent of user seeds: the random jump
paths it uses are drawn from a fixed internal seed, so its results never
vary between runs or machines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import chain
from .errors import ParameterError
from .model import Absorption, PedigreeEvent, Trajectory
from .weights import ancestry_matrix, weights_at

_PATH_SEED = 20240817   # internal; results must not depend on user seeds

# A five-site pedigree reaching fixation in four births from one founder.
# Replaying the halving rule gives site weights (1, 1/2, 1/2, 1/4, 3/8),
# whose mean is exactly 21/40.
GOLDEN_N = 5
GOLDEN_EVENTS = (
    PedigreeEvent(mother=0, father=1, replaced=1),
    PedigreeEvent(mother=0, father=2, replaced=2),
    PedigreeEvent(mother=1, father=3, replaced=3),
    PedigreeEvent(mother=1, father=3, replaced=4),
)
GOLDEN_WEIGHTS = (1.0, 0.5, 0.5, 0.25, 0.375)
GOLDEN_MEAN = 21.0 / 40.0

_PERTURBABLE = ("step_up", "step_down", "step_hold", "jump_up", "jump_down")


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.name}: max deviation {self.max_deviation:.3e} "
            f"(tol {self.tolerance:.0e}): {verdict}"
        )


def golden_trajectory() -> Trajectory:
    """The hardcoded five-site pedigree as a complete trajectory."""
    initial = np.zeros(GOLDEN_N, dtype=bool)
    initial[0] = True
    return Trajectory(
        N=GOLDEN_N,
        s=1.0,
        initial_advantaged=initial,
        events=list(GOLDEN_EVENTS),
        y_path=np.arange(1, GOLDEN_N + 1, dtype=np.int64),
        jump_times=np.arange(0, GOLDEN_N, dtype=np.int64),
        absorption=Absorption.FIXED,
        hitting_time=4,
    )


def _matrices(N: int, s: float, k: int, perturb) -> dict[str, np.ndarray]:
    up, down, hold = chain.step_matrices(N, s, k)
    jump_up, jump_down = chain.jump_matrices(N, s, k)
    mats = {
        "step_up": up,
        "step_down": down,
        "step_hold": hold,
        "jump_up": jump_up,
        "jump_down": jump_down,
    }
    if perturb is not None:
        name, (row, col), delta = perturb
        if name not in mats:
            raise ParameterError(f"unknown perturbation target {name!r}")
        perturbed = mats[name].copy()
        perturbed[row, col] += delta
        mats[name] = perturbed
    return mats


def _resummed(
    N: int, s: float, k: int, mats: dict[str, np.ndarray]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Rebuilt locally (not via chain.jump_matrices_resummed) so that a
    # perturbed step family propagates into the resummation check.
    p = chain.jump_probability(N, s, k)
    m = np.eye(2) - (1.0 - p) * mats["step_hold"]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    core = p * np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
    return mats["step_up"] @ core, mats["step_down"] @ core, core


def run_identity_suite(
    n_values: tuple[int, ...] = (5, 50, 500),
    s_values: tuple[float, ...] = (0.1, 1.0, 10.0),
    n_paths: int = 50,
    perturb: tuple[str, tuple[int, int], float] | None = None,
) -> list[CheckResult]:
    """Run every identity check; returns one result per check.

    ``perturb=(family, (row, col), delta)`` is a test hook that offsets a
    single entry of one matrix family throughout the suite, to confirm
    the checks actually bite.
    """
    ones = np.ones(2)
    left = np.array([-1.0, 1.0])

    dev_stochastic = 0.0
    dev_step_eig = 0.0
    dev_jump_eig = 0.0
    dev_resummed = 0.0
    dev_resolvent = 0.0
    dev_symmetry = 0.0

    for N in n_values:
        for s in s_values:
            a_expect = 1.0 / ((2.0 * N + 1.0) * (s + 2.0))
            for k in range(1, N):
                mats = _matrices(N, s, k, perturb)
                for m in mats.values():
                    dev_stochastic = max(dev_stochastic, float(np.abs(m @ ones - ones).max()))

                for name, eig in (
                    ("step_up", chain.step_eigenvalue_up(N, k)),
                    ("step_down", chain.step_eigenvalue_down(N, k)),
                    ("step_hold", chain.step_eigenvalue_hold(N, s, k)),
                ):
                    dev = float(np.abs(left @ mats[name] - eig * left).max())
                    dev_step_eig = max(dev_step_eig, dev)

                for name, eig in (
                    ("jump_up", chain.contraction_up(N, k)),
                    ("jump_down", chain.contraction_down(N, k)),
                ):
                    dev = float(np.abs(left @ mats[name] - eig * left).max())
                    dev_jump_eig = max(dev_jump_eig, dev)

                re_up, re_down, core = _resummed(N, s, k, mats)
                dev_resummed = max(
                    dev_resummed,
                    float(np.abs(re_up - mats["jump_up"]).max()),
                    float(np.abs(re_down - mats["jump_down"]).max()),
                )

                expected_core = np.array([
                    [1.0 - a_expect, a_expect],
                    [(1.0 + s) * a_expect, 1.0 - (1.0 + s) * a_expect],
                ])
                dev_resolvent = max(dev_resolvent, float(np.abs(core - expected_core).max()))

                dev_symmetry = max(
                    dev_symmetry,
                    abs(chain.contraction_down(N, k) - chain.contraction_up(N, N - k)),
                )

    dev_paths = _path_identity_deviation(n_paths)
    dev_golden = _golden_pedigree_deviation()

    return [
        CheckResult("row stochasticity", dev_stochastic, 1e-12),
        CheckResult("per-step left eigenvalues", dev_step_eig, 1e-12),
        CheckResult("per-jump left eigenvalues", dev_jump_eig, 1e-12),
        CheckResult("resummed vs closed jump matrices", dev_resummed, 1e-10),
        CheckResult("hold-resolvent entries", dev_resolvent, 1e-12),
        CheckResult("contraction symmetry", dev_symmetry, 1e-15),
        CheckResult("jump-path identities", dev_paths, 1e-12),
        CheckResult("golden pedigree weights", dev_golden, 0.0),
    ]


def _path_identity_deviation(n_paths: int, N: int = 50, s: float = 1.0) -> float:
    """Worst deviation from the gap identities along random jump paths.

    Checks, per step: u - v stays equal to the tracked gap d; u never
    increases and v never decreases.  At absorption the tracked d must
    match the product of contraction factors recomputed from the path.
    """
    rng = np.random.default_rng(_PATH_SEED)
    q = (1.0 + s) / (2.0 + s)
    worst = 0.0
    for _ in range(n_paths):
        k = int(rng.integers(1, N))
        state = chain.initial_uv()
        while 0 < k < N:
            direction = 1 if rng.random() < q else -1
            prev = state
            state = chain.apply_jump(state, k, direction, N, s)
            worst = max(worst, abs(state.u - state.v - state.d))
            worst = max(worst, max(0.0, state.u - prev.u), max(0.0, prev.v - state.v))
            k += direction
        product = chain.contraction_product(N, state.signs, state.levels)
        worst = max(worst, abs(state.d - product))
    return worst


def _golden_pedigree_deviation() -> float:
    """Exact-equality deviation of the golden pedigree, both code paths."""
    trajectory = golden_trajectory()
    scalar = weights_at(trajectory)
    founder_cols = trajectory.initial_advantaged
    matrix_weights = ancestry_matrix(trajectory)[:, founder_cols].sum(axis=1)

    dev = float(np.abs(scalar - np.array(GOLDEN_WEIGHTS)).max())
    dev = max(dev, float(np.abs(matrix_weights - np.array(GOLDEN_WEIGHTS)).max()))
    dev = max(dev, abs(scalar.mean() - GOLDEN_MEAN))
    dev = max(dev, abs(matrix_weights.mean() - GOLDEN_MEAN))
    return dev
