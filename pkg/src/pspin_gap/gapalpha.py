"""
Exponential rate of the minimum gap, Delta_min ~ exp(-alpha N), from the
imaginary momentum under the barrier between the two degenerate minima.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from . import semiclassical as sc
from .dicke import ModelParams
from .errors import ClassicallyAllowedError, NoTransitionError, NumericalError

CLAMP_WINDOW = 1e-9
# below this value of s (1 - lam) the printed expression is 0/0 and the limit is used
STOQUASTIC_LIMIT = 1e-12
QUAD_TOL = 1e-8
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class AlphaResult:
    p: int
    lam: float
    s_c: float
    m1: float
    m2: float
    e_c: float
    alpha: float
    quad_error: float


def _cosh_excess(m: float, params: ModelParams, e_c: float, m_ref: Optional[float] = None) -> float:
    """u = cosh(psi_dot) - 1 at ``m``.

    The printed root ((1-s) - sqrt(disc)) / (2 b sqrt(1-m^2)), b = s(1-lam),
    is rewritten with delta = U1(m) - E >= 0 and g = 1 - s - 2 b sqrt(1-m^2) as

        u = 2 delta / (sqrt(1-m^2) (g + sqrt(disc))),   disc = g**2 - 4 b delta = 4 b (E - U2(m)),

    which has a finite limit as b -> 0.  Because U2(m) - U2(m_ref) is just
    -s lam (m^p - m_ref^p), disc is evaluated relative to ``m_ref`` (the left
    turning point) to avoid cancellation when that point sits on the U2
    threshold, where disc is of order m^p.
    """
    p, s, lam = params.p, params.s, params.lam
    b = s * (1.0 - lam)
    mr = m if m_ref is None else float(m_ref)
    r_ref = math.sqrt(max(1.0 - mr * mr, 0.0))
    delta_ref = (-s * lam * mr ** p - (1.0 - s) * r_ref + b * r_ref * r_ref) - e_c
    g_ref = (1.0 - s) - 2.0 * b * r_ref
    if m_ref is not None and abs(delta_ref) <= 8 * _EPS * max(1.0, abs(e_c)):
        # e_c is U1 at the turning point up to rounding
        delta_ref = 0.0

    # differences to the reference point in factored form, exact as m -> m_ref
    root = math.sqrt(max(1.0 - m * m, 0.0))
    dm = m - mr
    pow_sum = math.fsum(m ** k * mr ** (p - 1 - k) for k in range(p))
    chord = (m + mr) / (root + r_ref) if root + r_ref > 0 else 0.0  # -(r - r_ref) / dm
    delta = delta_ref + dm * (-s * lam * pow_sum + (1.0 - s) * chord - b * (m + mr))
    g = g_ref + 2.0 * b * dm * chord

    if b < STOQUASTIC_LIMIT:
        den = (1.0 - s) * root
    else:
        disc = g_ref * g_ref - 4.0 * b * delta_ref + 4.0 * b * s * lam * dm * pow_sum
        if disc < 0:
            raise ClassicallyAllowedError(f"point m={m!r} is classically allowed (complex momentum)")
        den = 0.5 * (g + math.sqrt(disc)) * root
    if den <= 0:
        raise ClassicallyAllowedError(f"point m={m!r} has no tunnelling momentum")
    return delta / den


def psi_dot(m: float, params: ModelParams, e_c: float,
            turning_points: Optional[tuple] = None) -> float:
    """Magnitude of the imaginary momentum at ``m`` for energy ``e_c``.

    Parameters
    ----------
    m : float
        Magnetization inside the forbidden region.
    params : ModelParams
        Parameters at the transition.
    e_c : float
        Energy of the degenerate minima.
    turning_points : (m1, m2), optional
        When given, points outside [m1, m2] are rejected.
    """
    m = float(m)
    if turning_points is not None:
        m1, m2 = turning_points
        if m < m1 or m > m2:
            raise ClassicallyAllowedError(
                f"point m={m!r} is classically allowed (outside [{m1}, {m2}])")
    u = _cosh_excess(m, params, e_c, None if turning_points is None else turning_points[0])
    if u < -CLAMP_WINDOW:
        raise ClassicallyAllowedError(f"point m={m!r} is classically allowed (argument {1 + u!r})")
    u = max(u, 0.0)
    # acosh(1 + u) without forming 1 + u
    return math.log1p(u + math.sqrt(u * (u + 2.0)))


def alpha_from_transition(tp: sc.TransitionPoint, tol: float = QUAD_TOL,
                          limit: int = 200) -> AlphaResult:
    if tp.order != sc.FIRST:
        raise NoTransitionError("alpha needs a first-order transition")
    params = tp.params
    e_c = float(sc.potential_u1(tp.m1, params))
    bounds = (tp.m1, tp.m2)
    value, err = integrate.quad(lambda m: psi_dot(m, params, e_c, bounds), tp.m1, tp.m2,
                                epsabs=1e-11, epsrel=1e-11, limit=limit)
    if not err <= tol:
        raise NumericalError(f"quadrature did not converge: estimate {value!r}, error {err!r}")
    return AlphaResult(p=tp.p, lam=tp.lam, s_c=tp.s_c, m1=tp.m1, m2=tp.m2, e_c=e_c,
                       alpha=0.5 * value, quad_error=0.5 * err)


def alpha(p: int, lam: float, tol: float = QUAD_TOL) -> AlphaResult:
    """alpha = (1/2) * integral of psi_dot between the degenerate minima."""
    tp = sc.locate_first_order(p, lam)
    if tp is None:
        raise NoTransitionError(f"no first-order transition at p={p}, lambda={lam}")
    return alpha_from_transition(tp, tol)


def alpha_or_none(p: int, lam: float, tol: float = QUAD_TOL) -> Optional[AlphaResult]:
    tp = sc.locate_first_order(p, float(lam))
    return None if tp is None else alpha_from_transition(tp, tol)


def alpha_curve(p: int, lambda_grid: Sequence[float], tol: float = QUAD_TOL) -> list:
    """alpha at each lambda; entries without a first-order transition are None."""
    return [alpha_or_none(p, lam, tol) for lam in np.asarray(lambda_grid, dtype=float).ravel()]
