"""Closed-form large-population limits of the absorbed weight functionals.

For initial advantaged fraction ``a`` and selection strength ``s > 0``,
the expected gap at the first passage of fraction ``b`` has the closed
form :func:`limit_d`, and the expected advantaged mean weight at fixation
is the integral expression evaluated by :func:`limit_weight`:

    C(a, s) * integral_a^1 (1-u)^(1/(2s)) * u^(-(1+s)/(2s))
                           * [1/2 + 1/(2s) * 1/(1-u)] du

with C(a, s) = a^((1+s)/(2s)) / (1-a)^(1/(2s)).  The integrand carries an
integrable endpoint singularity (1-u)^(1/(2s)-1) at u = 1 whenever
s > 1/2; the substitution t = (1-u)^(1/(2s)) removes it, leaving

    integral (1 + s*t^(2s)) * (1 - t^(2s))^(-(1+s)/(2s)) dt

over [(1-b)^(1/(2s)), (1-a)^(1/(2s))], which is what the primary
quadrature integrates.  Every value is cross-checked by a second,
algorithmically independent quadrature of the untransformed integrand;
disagreement beyond 10x the requested tolerance raises NumericError.
"""

from __future__ import annotations

import math

from scipy.integrate import quad

from .errors import NumericError, ParameterError

DEFAULT_REL_TOL = 1e-10

# Distance-to-1 scales at which the substituted integrand transitions;
# used as quadrature breakpoints so the adaptive scheme resolves the
# O(1/s)-wide boundary layer that forms for large s.
_LAYER_SCALES = (1e-12, 1e-9, 1e-6, 1e-4, 1e-2, 0.1, 0.3, 0.6)


def _check_core(a: float, s: float, rel_tol: float = DEFAULT_REL_TOL) -> None:
    if not 0.0 < a < 1.0:
        raise ParameterError(f"a must lie in (0, 1), got {a!r}")
    if not s > 0.0:
        raise ParameterError(f"s must be > 0, got {s!r}")
    if not rel_tol > 0.0:
        raise ParameterError(f"rel_tol must be > 0, got {rel_tol!r}")


def _prefactor(a: float, s: float) -> float:
    return a ** ((1.0 + s) / (2.0 * s)) / (1.0 - a) ** (1.0 / (2.0 * s))


def limit_d(a: float, b: float, s: float) -> float:
    """Large-N limit of the expected gap at first passage of fraction ``b``.

    Equals (a/b)^((1+s)/(2s)) / ((1-a)/(1-b))^(1/(2s)) for 0 < a < b < 1.
    """
    _check_core(a, s)
    if not a < b < 1.0:
        raise ParameterError(f"b must lie in ({a!r}, 1), got {b!r}")
    return (a / b) ** ((1.0 + s) / (2.0 * s)) / ((1.0 - a) / (1.0 - b)) ** (1.0 / (2.0 * s))


def _integrand_direct(u: float, s: float) -> float:
    return (
        (1.0 - u) ** (1.0 / (2.0 * s))
        * u ** (-(1.0 + s) / (2.0 * s))
        * (0.5 + 1.0 / (2.0 * s) / (1.0 - u))
    )


def _integral_substituted(a: float, b: float, s: float, rel_tol: float) -> tuple[float, float]:
    """Primary scheme: adaptive quadrature after removing the singularity."""
    two_s = 2.0 * s
    expo = -(1.0 + s) / two_s
    t_hi = (1.0 - a) ** (1.0 / two_s)
    t_lo = 0.0 if b == 1.0 else (1.0 - b) ** (1.0 / two_s)

    def g(t: float) -> float:
        w = t ** two_s
        return (1.0 + s * w) * (1.0 - w) ** expo

    points = sorted(
        w ** (1.0 / two_s)
        for w in _LAYER_SCALES
        if (1.0 - b) < w < (1.0 - a)
    )
    value, err = quad(
        g, t_lo, t_hi, points=points or None, limit=400, epsabs=rel_tol, epsrel=rel_tol
    )
    return value, err


def _integral_direct(a: float, b: float, s: float, rel_tol: float) -> tuple[float, float]:
    """Second scheme, on the untransformed integrand.

    For b = 1 the endpoint singularity is delegated to QUADPACK's
    algebraic-weight rule, splitting the bracket into its (1-u)^(1/(2s))
    and (1-u)^(1/(2s)-1) pieces; for b < 1 the integrand is regular and a
    plain adaptive pass with layer breakpoints suffices.
    """
    expo = -(1.0 + s) / (2.0 * s)

    if b == 1.0:
        def f(u: float) -> float:
            return u ** expo

        v1, e1 = quad(
            f, a, 1.0, weight="alg", wvar=(0.0, 1.0 / (2.0 * s)),
            limit=400, epsabs=rel_tol, epsrel=rel_tol,
        )
        v2, e2 = quad(
            f, a, 1.0, weight="alg", wvar=(0.0, 1.0 / (2.0 * s) - 1.0),
            limit=400, epsabs=rel_tol, epsrel=rel_tol,
        )
        return 0.5 * v1 + v2 / (2.0 * s), 0.5 * e1 + e2 / (2.0 * s)

    points = sorted(1.0 - w for w in _LAYER_SCALES if (1.0 - b) < w < (1.0 - a))
    value, err = quad(
        _integrand_direct, a, b, args=(s,), points=points or None,
        limit=400, epsabs=rel_tol, epsrel=rel_tol,
    )
    return value, err


def _core_integral(a: float, b: float, s: float, rel_tol: float) -> tuple[float, float]:
    """Dual-checked integral over [a, b]; returns (value, error estimate)."""
    primary, err_primary = _integral_substituted(a, b, s, rel_tol)
    check, err_check = _integral_direct(a, b, s, rel_tol)
    gap = abs(primary - check)
    allowed = 10.0 * rel_tol * max(1.0, abs(primary), abs(check))
    if not gap <= allowed:
        raise NumericError(
            f"quadrature schemes disagree at a={a}, b={b}, s={s}: "
            f"|{primary!r} - {check!r}| = {gap:.3e} > {allowed:.3e} "
            f"(per-scheme error estimates {err_primary:.3e}, {err_check:.3e})"
        )
    return primary, max(err_primary, gap)


def limit_weight(
    a: float, s: float, rel_tol: float = DEFAULT_REL_TOL, full_output: bool = False
):
    """Large-N expected advantaged mean weight at fixation.

    Returns a value in (a, 1); with ``full_output=True`` also returns the
    quadrature error estimate.
    """
    _check_core(a, s, rel_tol)
    integral, err = _core_integral(a, 1.0, s, rel_tol)
    pre = _prefactor(a, s)
    value = pre * integral
    if full_output:
        return value, pre * err
    return value


def limit_uv(
    a: float, b: float, s: float, rel_tol: float = DEFAULT_REL_TOL
) -> tuple[float, float]:
    """Large-N expected (u, v) at first passage of fraction ``b < 1``.

    ``v`` is the prefactored integral over [a, b]; ``u`` exceeds it by
    exactly :func:`limit_d`, and tends to :func:`limit_weight` as b -> 1.
    """
    _check_core(a, s, rel_tol)
    if not a < b < 1.0:
        raise ParameterError(f"b must lie in ({a!r}, 1), got {b!r}")
    integral, _ = _core_integral(a, b, s, rel_tol)
    v = _prefactor(a, s) * integral
    u = limit_d(a, b, s) + v
    return u, v


def limit_s_infinity(a: float) -> float:
    """Strong-selection limit of :func:`limit_weight`: ``2*sqrt(a) - a``."""
    if not 0.0 < a <= 1.0:
        raise ParameterError(f"a must lie in (0, 1], got {a!r}")
    return 2.0 * math.sqrt(a) - a
