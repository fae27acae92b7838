"""Exact finite-N structure of the advantaged-count chain and its weights.

Two coupled scalars are tracked along a run: ``u``, the mean ancestral
weight among advantaged sites, and ``v``, the same mean among
disadvantaged sites.  Conditioned on the move of the advantaged count
(up, down, or hold), the pair ``(u, v)`` updates by a 2x2 stochastic
matrix.  Collapsing the geometric number of holds between moves gives the
per-jump matrices, which have the closed form

    [[1 - alpha, alpha], [beta, 1 - beta]]

so that one jump acts as ``u' = u - alpha*d`` and ``v' = v + beta*d``
where ``d = u - v`` contracts by the factor ``lambda = 1 - alpha - beta``.
The expected values of ``d``, ``u`` and ``v`` at absorption solve
tridiagonal linear systems over the jump chain, which is a simple random
walk with up-probability ``(1+s)/(2+s)``.

Matrix convention: column vectors, ``(u', v')^T = B (u, v)^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_banded

from .errors import NumericError, ParameterError

# Scalar/matrix forms of one jump must agree to this tolerance.
_JUMP_FORM_TOL = 1e-14


def _check_interior(N: int, k) -> None:
    if N < 2:
        raise ParameterError(f"N must be >= 2, got {N}")
    if isinstance(k, (int, np.integer)):
        if not 1 <= k <= N - 1:
            raise ParameterError(f"k must lie in [1, {N - 1}], got {k}")
        return
    k = np.asarray(k)
    if np.any(k < 1) or np.any(k > N - 1):
        raise ParameterError(f"k must lie in [1, {N - 1}], got {k}")


def jump_probability(N: int, s: float, k):
    """Probability that a step at count ``k`` changes the count at all."""
    _check_interior(N, k)
    k = np.asarray(k, dtype=np.float64)
    p = (2.0 + s) * k * (N - k) / (N * (k + (1.0 + s) * (N - k)))
    return float(p) if p.ndim == 0 else p


# -- per-step coefficients: left-eigenvalue of each step matrix for (-1, 1) --

def step_eigenvalue_up(N: int, k):
    _check_interior(N, k)
    k = np.asarray(k, dtype=np.float64)
    out = 1.0 - (N - k) / (2.0 * N * (k + 1.0))
    return float(out) if out.ndim == 0 else out


def step_eigenvalue_down(N: int, k):
    _check_interior(N, k)
    k = np.asarray(k, dtype=np.float64)
    out = 1.0 - k / (2.0 * N * (N - k + 1.0))
    return float(out) if out.ndim == 0 else out


def step_eigenvalue_hold(N: int, s: float, k):
    _check_interior(N, k)
    k = np.asarray(k, dtype=np.float64)
    denom = k * k + (1.0 + s) * (N - k) ** 2
    out = 1.0 - (2.0 + s) * k * (N - k) / (2.0 * N * denom)
    return float(out) if out.ndim == 0 else out


# -- per-jump coefficients --

def alpha_up(N: int, s: float, k):
    """Fraction of the gap the advantaged mean loses on an up-jump at ``k``."""
    _check_interior(N, k)
    k = np.asarray(k, dtype=np.float64)
    out = (N * (s + 2.0) - k * (s + 1.0) + 1.0) / ((k + 1.0) * (2.0 * N + 1.0) * (s + 2.0))
    return float(out) if out.ndim == 0 else out


def alpha_down(N: int, s: float, k):
    """Same loss fraction on a down-jump; independent of ``k``."""
    _check_interior(N, k)
    out = np.full_like(np.asarray(k, dtype=np.float64), 1.0 / ((2.0 * N + 1.0) * (s + 2.0)))
    return float(out) if out.ndim == 0 else out


def beta_up(N: int, s: float, k):
    """Fraction of the gap the disadvantaged mean gains on an up-jump."""
    _check_interior(N, k)
    out = np.full_like(np.asarray(k, dtype=np.float64), (s + 1.0) / ((2.0 * N + 1.0) * (s + 2.0)))
    return float(out) if out.ndim == 0 else out


def beta_down(N: int, s: float, k):
    """Same gain fraction on a down-jump at ``k``."""
    _check_interior(N, k)
    k = np.asarray(k, dtype=np.float64)
    out = (k + (N + 1.0) * (1.0 + s)) / ((2.0 * N + 1.0) * (s + 2.0) * (N - k + 1.0))
    return float(out) if out.ndim == 0 else out


def contraction_up(N: int, k):
    """Gap contraction factor ``1 - alpha - beta`` on an up-jump; s-free."""
    _check_interior(N, k)
    k = np.asarray(k, dtype=np.float64)
    out = 1.0 - (N + 1.0) / ((2.0 * N + 1.0) * (k + 1.0))
    return float(out) if out.ndim == 0 else out


def contraction_down(N: int, k):
    """Gap contraction factor on a down-jump; equals contraction_up(N, N-k)."""
    _check_interior(N, k)
    k = np.asarray(k, dtype=np.float64)
    out = 1.0 - (N + 1.0) / ((2.0 * N + 1.0) * (N - k + 1.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class JumpCoefficients:
    """All per-level coefficients of the (u, v) dynamics at count ``k``."""

    p_jump: float
    step_eig_up: float
    step_eig_down: float
    step_eig_hold: float
    alpha_up: float
    alpha_down: float
    beta_up: float
    beta_down: float
    contraction_up: float
    contraction_down: float


def jump_coefficients(N: int, s: float, k: int) -> JumpCoefficients:
    return JumpCoefficients(
        p_jump=jump_probability(N, s, k),
        step_eig_up=step_eigenvalue_up(N, k),
        step_eig_down=step_eigenvalue_down(N, k),
        step_eig_hold=step_eigenvalue_hold(N, s, k),
        alpha_up=alpha_up(N, s, k),
        alpha_down=alpha_down(N, s, k),
        beta_up=beta_up(N, s, k),
        beta_down=beta_down(N, s, k),
        contraction_up=contraction_up(N, k),
        contraction_down=contraction_down(N, k),
    )


# -- matrix families --

def step_matrices(N: int, s: float, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-step update matrices (up, down, hold) of the pair (u, v) at ``k``.

    On an up-move only ``u`` mixes toward ``v`` (its bottom row is (0, 1):
    the disadvantaged mean is untouched when a disadvantaged site is
    replaced by an advantaged offspring); the down-move is the mirror
    image.  The hold matrix is the convex combination of an advantaged
    self-replacement, weight ``k^2 / (k^2 + (1+s)(N-k)^2)``, and a
    disadvantaged one with the complementary weight.
    """
    _check_interior(N, k)
    up = np.array([
        [1.0 - (N - k) / (2.0 * N * (k + 1.0)), (N - k) / (2.0 * N * (k + 1.0))],
        [0.0, 1.0],
    ])
    down = np.array([
        [1.0, 0.0],
        [k / (2.0 * N * (N - k + 1.0)), 1.0 - k / (2.0 * N * (N - k + 1.0))],
    ])
    denom = k * k + (1.0 + s) * (N - k) ** 2
    w_adv = k * k / denom
    w_dis = (1.0 + s) * (N - k) ** 2 / denom
    hold_adv = np.array([
        [1.0 - (N - k) / (2.0 * k * N), (N - k) / (2.0 * k * N)],
        [0.0, 1.0],
    ])
    hold_dis = np.array([
        [1.0, 0.0],
        [k / (2.0 * N * (N - k)), 1.0 - k / (2.0 * N * (N - k))],
    ])
    hold = w_adv * hold_adv + w_dis * hold_dis
    return up, down, hold


def jump_matrices(N: int, s: float, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form per-jump update matrices (up, down) of the pair (u, v)."""
    a_up = alpha_up(N, s, k)
    b_up = beta_up(N, s, k)
    a_dn = alpha_down(N, s, k)
    b_dn = beta_down(N, s, k)
    up = np.array([[1.0 - a_up, a_up], [b_up, 1.0 - b_up]])
    down = np.array([[1.0 - a_dn, a_dn], [b_dn, 1.0 - b_dn]])
    return up, down


def hold_resolvent(N: int, s: float, k: int) -> np.ndarray:
    """Geometric resummation of holds: ``p * (I - (1-p) * hold)^(-1)``.

    The result is the stochastic matrix [[1-a, a], [b, 1-b]] with
    ``a = 1/((2N+1)(s+2))`` and ``b = (1+s)*a`` for every interior ``k``;
    here it is computed numerically, which is what makes comparing the
    resummed jump matrices against their closed forms a real check.
    """
    p = jump_probability(N, s, k)
    _, _, hold = step_matrices(N, s, k)
    m = np.eye(2) - (1.0 - p) * hold
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) < 1e-300:
        raise NumericError(f"singular hold resolvent at N={N}, s={s}, k={k}")
    inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
    return p * inv


def jump_matrices_resummed(N: int, s: float, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-jump matrices rebuilt from the step matrices by resummation.

    Must agree entrywise with :func:`jump_matrices`; the two code paths
    share no algebra beyond the step-matrix definitions.
    """
    up, down, _ = step_matrices(N, s, k)
    core = hold_resolvent(N, s, k)
    return up @ core, down @ core


# -- scalar jump recursion --

@lru_cache(maxsize=64)
def _coefficient_tables(N: int, s: float) -> tuple[np.ndarray, ...]:
    """Per-level coefficient arrays over k = 1..N-1, index k-1.

    Built through the public vectorized functions, so table lookups are
    bit-identical to direct evaluation; they just avoid per-call overhead
    in the hot jump recursion.
    """
    ks = np.arange(1, N)
    return (
        np.atleast_1d(alpha_up(N, s, ks)),
        np.atleast_1d(alpha_down(N, s, ks)),
        np.atleast_1d(beta_up(N, s, ks)),
        np.atleast_1d(beta_down(N, s, ks)),
        np.atleast_1d(contraction_up(N, ks)),
        np.atleast_1d(contraction_down(N, ks)),
    )


@dataclass(frozen=True)
class UVState:
    """State of (u, v) along a jump path, with the tracked gap ``d``.

    ``d`` is maintained as the running product of contraction factors, so
    ``u - v == d`` holds only up to accumulated rounding; tests pin the
    drift below 1e-12.  ``signs``/``levels`` record the path: sign +1/-1
    of each jump and the count it was taken from.
    """

    u: float
    v: float
    d: float
    signs: tuple[int, ...] = ()
    levels: tuple[int, ...] = ()

    def transition_counts(self) -> tuple[dict[int, int], dict[int, int]]:
        """Number of up-jumps and down-jumps taken from each level."""
        ups: dict[int, int] = {}
        downs: dict[int, int] = {}
        for sign, level in zip(self.signs, self.levels):
            target = ups if sign > 0 else downs
            target[level] = target.get(level, 0) + 1
        return ups, downs


def initial_uv() -> UVState:
    """State at time 0: all weight sits on the advantaged side."""
    return UVState(u=1.0, v=0.0, d=1.0)


def contraction_product(N: int, signs, levels) -> float:
    """Product of contraction factors along a recorded path."""
    up = _coefficient_tables(N, 0.0)[4]
    down = _coefficient_tables(N, 0.0)[5]
    d = 1.0
    for sign, level in zip(signs, levels):
        d *= up[level - 1] if sign > 0 else down[level - 1]
    return float(d)


def apply_jump(state: UVState, k: int, direction: int, N: int, s: float) -> UVState:
    """Advance (u, v, d) through one jump of the count from level ``k``.

    ``direction`` is +1 or -1.  The update is computed both as the 2x2
    matrix action on (u, v) and in the scalar gap form
    ``(u - alpha*d, v + beta*d)``; the two must agree to 1e-14 or a
    NumericError is raised.  The scalar form is returned and ``d``
    contracts by the level's factor.
    """
    _check_interior(N, k)
    a_up, a_dn, b_up, b_dn, c_up, c_dn = _coefficient_tables(N, s)
    if direction == 1:
        alpha = a_up[k - 1]
        beta = b_up[k - 1]
        lam = c_up[k - 1]
    elif direction == -1:
        alpha = a_dn[k - 1]
        beta = b_dn[k - 1]
        lam = c_dn[k - 1]
    else:
        raise ParameterError(f"direction must be +1 or -1, got {direction!r}")

    u_new = state.u - alpha * state.d
    v_new = state.v + beta * state.d
    u_mat = (1.0 - alpha) * state.u + alpha * state.v
    v_mat = beta * state.u + (1.0 - beta) * state.v
    if abs(u_mat - u_new) > _JUMP_FORM_TOL or abs(v_mat - v_new) > _JUMP_FORM_TOL:
        raise NumericError(
            f"matrix and scalar jump forms disagree at k={k}: "
            f"|du|={abs(u_mat - u_new):.3e}, |dv|={abs(v_mat - v_new):.3e}"
        )
    return UVState(
        u=float(u_new),
        v=float(v_new),
        d=float(lam * state.d),
        signs=state.signs + (direction,),
        levels=state.levels + (int(k),),
    )


# -- absorbing-walk solvers --

def fixation_probability(N: int, s: float, k, lower: int = 0, upper: int | None = None):
    """Probability the jump chain hits ``upper`` before ``lower`` from ``k``.

    The jump chain is a simple random walk with up-probability
    (1+s)/(2+s), so the classic ruin formula applies with ratio
    1/(1+s); the neutral case ``s = 0`` degenerates to (k-lower)/(upper-lower).
    ``k`` may be a scalar or an integer array.
    """
    if upper is None:
        upper = N
    if not 0 <= lower < upper <= N:
        raise ParameterError(f"need 0 <= lower < upper <= N, got [{lower}, {upper}], N={N}")
    k_arr = np.asarray(k, dtype=np.float64)
    if np.any(k_arr < lower) or np.any(k_arr > upper):
        raise ParameterError(f"k must lie in [{lower}, {upper}], got {k}")
    if s < 0:
        raise ParameterError(f"s must be >= 0, got {s}")
    if s == 0:
        out = (k_arr - lower) / (upper - lower)
    else:
        log_ratio = -np.log1p(s)
        out = np.expm1((k_arr - lower) * log_ratio) / np.expm1((upper - lower) * log_ratio)
    return float(out) if out.ndim == 0 else out


def hitting_probabilities(N: int, s: float, lower: int = 0, upper: int | None = None) -> np.ndarray:
    """Hitting probabilities solved directly from the linear system.

    Returns ``h[lower..upper]`` with ``h(k) = q h(k+1) + (1-q) h(k-1)``,
    ``h(lower) = 0``, ``h(upper) = 1``, by tridiagonal elimination.  This
    is the independent cross-check of :func:`fixation_probability`.
    """
    if upper is None:
        upper = N
    if not 0 <= lower < upper <= N:
        raise ParameterError(f"need 0 <= lower < upper <= N, got [{lower}, {upper}], N={N}")
    q = (1.0 + s) / (2.0 + s)
    n = upper - lower - 1
    h = np.zeros(upper - lower + 1)
    h[-1] = 1.0
    if n > 0:
        band = np.zeros((3, n))
        band[1, :] = -1.0
        band[0, 1:] = q           # coefficient of h(k+1) in row k
        band[2, :-1] = 1.0 - q    # coefficient of h(k-1) in row k
        rhs = np.zeros(n)
        rhs[-1] = -q
        h[1:-1] = solve_banded((1, 1), band, rhs)
    return h


class AbsorptionValues(NamedTuple):
    """Expected (gap, advantaged mean, disadvantaged mean) at absorption,
    each weighted by the indicator of reaching the upper level first."""

    d: float
    u: float
    v: float


def exact_absorption(N: int, s: float, k0: int, b_level: int | None = None) -> AbsorptionValues:
    """Exact absorbed expectations of (d, u, v) for the jump chain.

    Starting the count's jump chain at ``k0``, run until it hits 0 or
    ``b_level`` (default ``N``).  Returned are the expectations, on the
    event of hitting ``b_level`` first, of the gap ``d`` and of the two
    class means ``u`` and ``v`` at that hitting time; paths absorbed at 0
    contribute zero.

    The gap expectation solves the homogeneous system

        phi(k) = q*lam_up(k)*phi(k+1) + (1-q)*lam_down(k)*phi(k-1)

    with phi(0) = 0, phi(b) = 1 and q = (1+s)/(2+s).  Conditioning the
    accumulated v-increments on the first jump closes the analogous
    system for ``v`` with forcing beta*d weighted by the downstream
    hitting probability; ``u = v + d`` pointwise gives the third value.
    Both systems are strictly diagonally dominant tridiagonal solves.
    """
    b = N if b_level is None else b_level
    if not 1 <= b <= N:
        raise ParameterError(f"b_level must lie in [1, {N}], got {b}")
    if not 1 <= k0 <= b:
        raise ParameterError(f"k0 must lie in [1, {b}], got {k0}")
    if s < 0:
        raise ParameterError(f"s must be >= 0, got {s}")
    if k0 == b:
        return AbsorptionValues(1.0, 1.0, 0.0)

    q = (1.0 + s) / (2.0 + s)
    ks = np.arange(1, b)
    lam_up = contraction_up(N, ks)
    lam_dn = contraction_down(N, ks)
    lam_up = np.atleast_1d(lam_up)
    lam_dn = np.atleast_1d(lam_dn)

    n = b - 1
    band = np.zeros((3, n))
    band[1, :] = -1.0
    band[0, 1:] = q * lam_up[:-1]
    band[2, :-1] = (1.0 - q) * lam_dn[1:]

    rhs_d = np.zeros(n)
    rhs_d[-1] = -q * lam_up[-1]
    phi = solve_banded((1, 1), band, rhs_d)

    p_hit = np.atleast_1d(fixation_probability(N, s, np.arange(0, b + 1), lower=0, upper=b))
    b_up = np.atleast_1d(beta_up(N, s, ks))
    b_dn = np.atleast_1d(beta_down(N, s, ks))
    rhs_v = -(q * b_up * p_hit[ks + 1] + (1.0 - q) * b_dn * p_hit[ks - 1])
    h = solve_banded((1, 1), band, rhs_v)

    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(h))):
        raise NumericError(f"absorption solve produced non-finite values at N={N}, s={s}")
    e_d = float(phi[k0 - 1])
    e_v = float(h[k0 - 1])
    return AbsorptionValues(e_d, e_d + e_v, e_v)
