"""
Classical potential of the sector problem and its phase transitions.

To leading order in 1/S the recursion for the sector amplitudes becomes

    E = w(m) + t1(m) cos(q) + t2(m) cos(2q),

with q the momentum conjugate to m.  Minimizing over q gives the potential
U(m): U1 = w + t1 + t2 everywhere when 1 - s > 2 s (1 - lam), otherwise U1
for |m| >= m0 and U2 = w - t1**2/(8 t2) - t2 inside.

U1 is affine in s,  U1(m; s) = A(m) + s B(m),  with

    A(m) = -sqrt(1 - m**2)
    B(m) =  sqrt(1 - m**2) - lam m**p + (1 - lam)(1 - m**2),

so its stationary points on (0, 1) are the level sets of the single
function s(m) = -A'(m)/B'(m).  First-order transitions are located from
the non-monotone stretches of that curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np
from scipy import optimize

from .dicke import ModelParams
from .errors import NoCriticalPointError, NumericalError, ValidationError

FIRST = "first"
SECOND = "second"


@dataclass(frozen=True)
class SemiclassicalCoefficients:
    """w, t1 and t2 of the leading-order energy relation at fixed (p, s, lam)."""

    params: ModelParams

    def w(self, m):
        p, s, lam = self.params.p, self.params.s, self.params.lam
        m = np.asarray(m, dtype=float)
        return -s * lam * m ** p + 0.5 * s * (1 - lam) * (1 - m * m)

    def t1(self, m):
        s = self.params.s
        m = np.asarray(m, dtype=float)
        return -(1 - s) * np.sqrt(1 - m * m)

    def t2(self, m):
        s, lam = self.params.s, self.params.lam
        m = np.asarray(m, dtype=float)
        return 0.5 * s * (1 - lam) * (1 - m * m)

    def energy(self, m, momentum):
        """E = w + t1 cos(q) + t2 cos(2q)."""
        q = np.asarray(momentum, dtype=float)
        return self.w(m) + self.t1(m) * np.cos(q) + self.t2(m) * np.cos(2 * q)


@dataclass(frozen=True)
class PotentialLandscape:
    params: ModelParams
    minima: tuple  # ((m, U), ...) ascending in m
    maxima: tuple
    m0: Optional[float]


@dataclass(frozen=True)
class TransitionPoint:
    p: int
    lam: float
    s_c: float
    order: str
    m1: Optional[float] = None
    m2: Optional[float] = None
    e_c: Optional[float] = None

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.p, self.s_c, self.lam)


@dataclass(frozen=True)
class CriticalPoint:
    p: int
    m_star: float
    lambda_star: float
    s_star: float
    residuals: tuple = ()  # |d^k U1(cos theta)/d theta^k|, k = 1, 2, 3


def _check_m(m):
    arr = np.asarray(m, dtype=float)
    if np.any(np.abs(arr) > 1.0) or np.any(np.isnan(arr)):
        raise ValidationError("magnetization must lie in [-1, 1]")
    return arr


def _check_odd(p: int) -> int:
    if int(p) != p or p < 3 or p % 2 == 0:
        raise ValidationError(f"p must be an odd integer >= 3, got {p!r}")
    return int(p)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def potential_u1(m, params: ModelParams):
    """U1(m) = -s lam m^p - (1 - s) sqrt(1 - m^2) + s (1 - lam)(1 - m^2)."""
    m = _check_m(m)
    p, s, lam = params.p, params.s, params.lam
    return _out(-s * lam * m ** p - (1 - s) * np.sqrt(1 - m * m) + s * (1 - lam) * (1 - m * m))


def potential_u1_derivative(m, params: ModelParams):
    """dU1/dm on the open interval (-1, 1)."""
    m = _check_m(m)
    p, s, lam = params.p, params.s, params.lam
    root = np.sqrt(1 - m * m)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(s < 1, (1 - s) * m / root, 0.0)
    return _out(-p * s * lam * m ** (p - 1) + slope - 2 * s * (1 - lam) * m)


def u2_threshold(params: ModelParams) -> Optional[float]:
    """m0, present only when 1 - s < 2 s (1 - lam)."""
    s, lam = params.s, params.lam
    if not (1 - s) < 2 * s * (1 - lam):
        return None
    ratio = (1 - s) / (2 * s * (1 - lam))
    return math.sqrt(1 - ratio * ratio)


def potential_u2(m, params: ModelParams):
    """U2(m) = -s lam m^p - (1 - s)^2 / (4 s (1 - lam))."""
    m = _check_m(m)
    p, s, lam = params.p, params.s, params.lam
    if s * (1 - lam) == 0:
        raise ValidationError("U2 requires s (1 - lam) > 0")
    return _out(-s * lam * m ** p - (1 - s) ** 2 / (4 * s * (1 - lam)))


def potential_u(m, params: ModelParams):
    """The classical potential, switching to U2 for |m| <= m0."""
    m = _check_m(m)
    m0 = u2_threshold(params)
    u1 = potential_u1(m, params)
    if m0 is None:
        return u1
    inside = np.abs(m) <= m0
    if not np.any(inside):
        return u1
    return _out(np.where(inside, potential_u2(m, params), u1))


def _potential_u_derivative(m, params: ModelParams, m0):
    d1 = np.asarray(potential_u1_derivative(m, params))
    if m0 is None:
        return d1
    d2 = -params.p * params.s * params.lam * np.asarray(m) ** (params.p - 1)
    return np.where(np.abs(m) <= m0, d2, d1)


def find_landscape(params: ModelParams, n_grid: int = 10_000) -> PotentialLandscape:
    """All local minima and maxima of U on [-1, 1], endpoints included.

    Interior extrema are sign changes of dU/dm on a grid, refined to 1e-12
    by bracketing root search.
    """
    _check_odd(params.p)
    m0 = u2_threshold(params)
    s = params.s
    edge = 1e-12
    grid = np.linspace(-1 + edge, 1 - edge, int(n_grid))
    der = _potential_u_derivative(grid, params, m0)

    def dfun(x):
        return float(_potential_u_derivative(np.array(x), params, m0))

    minima, maxima = [], []
    # endpoints: for s < 1 the sqrt term forces dU/dm -> -inf at -1, +inf at +1
    if s < 1:
        left_is_min, right_is_min = False, False
    else:
        left_is_min = dfun(-1.0) > 0
        right_is_min = dfun(1.0) < 0
    (minima if left_is_min else maxima).append(-1.0)

    sign = np.sign(der)
    for i in range(len(grid) - 1):
        a, b = sign[i], sign[i + 1]
        if a == b or a == 0:
            continue
        if b == 0:
            j = i + 2
            while j < len(grid) and sign[j] == 0:
                j += 1
            if j == len(grid) or sign[j] == a:
                continue
            hi = grid[j]
        else:
            hi = grid[i + 1]
        root = optimize.brentq(dfun, grid[i], hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        (minima if a < 0 else maxima).append(root)
    (minima if right_is_min else maxima).append(1.0)

    def pairs(ms):
        ms = sorted(ms)
        return tuple((float(x), float(potential_u(x, params))) for x in ms)

    return PotentialLandscape(params=params, minima=pairs(minima), maxima=pairs(maxima), m0=m0)


def second_order_line(lam: float) -> float:
    """s = 1/(3 - 2 lam), where 1 - s = 2 s (1 - lam)."""
    if not 0.0 <= lam <= 1.0:
        raise ValidationError("lambda must lie in [0, 1]")
    return 1.0 / (3.0 - 2.0 * lam)


def paramagnet_is_stable(p: int, s: float, lam: float, probe: float = 1e-9) -> bool:
    """True when m = 0 is a local minimum of U1, judged from the slope at +/- probe."""
    params = ModelParams(p, s, lam)
    return (potential_u1_derivative(probe, params) > 0
            and potential_u1_derivative(-probe, params) < 0)


def second_order_onset(p: int, lam: float, tol: float = 1e-12) -> float:
    """s at which the m = 0 minimum loses stability, found by bisection in s."""
    _check_odd(p)
    lo, hi = 0.0, 1.0
    if not paramagnet_is_stable(p, lo, lam) or paramagnet_is_stable(p, hi, lam):
        raise NumericalError("paramagnetic minimum does not change stability on (0, 1)")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if paramagnet_is_stable(p, mid, lam):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- stationary curve s(m) on (0, 1) ------------------------------------------------

def _q(m, p, lam):
    return np.sqrt(1 - m * m) * (p * lam * m ** (p - 2) + 2 * (1 - lam))


def _q_prime(m, p, lam):
    root = np.sqrt(1 - m * m)
    return (-m / root * (p * lam * m ** (p - 2) + 2 * (1 - lam))
            + root * p * (p - 2) * lam * m ** (p - 3))


def stationary_s(m, p: int, lam: float):
    """The s at which m in (0, 1) is a stationary point of U1."""
    m = np.asarray(m, dtype=float)
    return _out(1.0 / (1.0 + _q(m, p, lam)))


def _coexistence_segments(p, lam, n_grid):
    """Intervals [m_a, m_b] on which s(m) decreases (q increases)."""
    grid = np.linspace(0.0, 1.0, int(n_grid) + 1)[1:-1]
    dq = _q_prime(grid, p, lam)

    def f(x):
        return float(_q_prime(np.array(x), p, lam))

    segments = []
    start = 0.0 if dq[0] > 0 else None
    for i in range(len(grid) - 1):
        if dq[i] <= 0 < dq[i + 1]:
            start = optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-15)
        elif dq[i] > 0 >= dq[i + 1] and start is not None:
            end = optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-15)
            segments.append((start, end))
            start = None
    return segments


def _branch_minimum(params: ModelParams, lo: float, hi: float) -> float:
    """Location of the unique local minimum of U1 on [lo, hi]."""
    d = lambda x: float(potential_u1_derivative(x, params))  # noqa: E731
    lo_probe = lo if lo > 0 else 1e-12
    if d(lo_probe) >= 0:
        return lo
    if d(hi) <= 0:
        return hi
    return optimize.brentq(d, lo_probe, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _transition_in_segment(p, lam, m_a, m_b):
    s_hi = float(stationary_s(m_a, p, lam)) if m_a > 0 else second_order_line(lam)
    s_lo = float(stationary_s(m_b, p, lam))
    right_hi = 1.0 - 1e-15

    def split(s):
        prm = ModelParams(p, s, lam)
        ml = _branch_minimum(prm, 0.0, m_a) if m_a > 0 else 0.0
        mr = _branch_minimum(prm, m_b, right_hi)
        return potential_u1(mr, prm) - potential_u1(ml, prm), ml, mr

    lo, hi = s_lo, s_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if split(mid)[0] > 0:
            lo = mid
        else:
            hi = mid
    s_c = 0.5 * (lo + hi)
    diff, m1, m2 = split(s_c)
    return s_c, m1, m2, diff


def locate_first_order(p: int, lam: float, n_grid: int = 100_000,
                       near: Optional[float] = None) -> Optional[TransitionPoint]:
    """First-order transition along the path at fixed ``lam``, or None.

    The coexistence window in s comes from a decreasing stretch of s(m);
    inside it, bisection on U1(right minimum) - U1(left minimum) finds the
    degeneracy.  ``near`` (a previous s_c) picks the window closest to it
    when several exist.
    """
    p = _check_odd(p)
    if not 0.0 < lam <= 1.0:
        raise ValidationError(f"lambda must lie in (0, 1], got {lam!r}")

    candidates = []
    for m_a, m_b in _coexistence_segments(p, lam, n_grid):
        s_c, m1, m2, diff = _transition_in_segment(p, lam, m_a, m_b)
        if not 0.0 < s_c < 1.0 or m2 - m1 <= 0:
            continue
        prm = ModelParams(p, s_c, lam)
        e_c = float(potential_u1(m1, prm))
        # both minima must be global: compare against a dense scan of U1
        scan = np.linspace(-1.0, 1.0, 20_001)
        if np.min(potential_u1(scan, prm)) < min(e_c, e_c + diff) - 1e-9:
            continue
        candidates.append(TransitionPoint(p=p, lam=float(lam), s_c=float(s_c), order=FIRST,
                                          m1=float(m1), m2=float(m2), e_c=e_c))
    if not candidates:
        return None
    if near is not None:
        return min(candidates, key=lambda t: abs(t.s_c - near))
    return candidates[0]


def second_order_point(lam: float) -> TransitionPoint:
    return TransitionPoint(p=0, lam=float(lam), s_c=second_order_line(lam), order=SECOND)


# --- critical point -----------------------------------------------------------------

def theta_derivatives(p: int, s: float, lam: float, m: float, dps: int = 40):
    """First three theta-derivatives of U1(cos theta), evaluated numerically."""
    with mpmath.workdps(dps):
        s_, lam_ = mpmath.mpf(s), mpmath.mpf(lam)

        def u(theta):
            c, sn = mpmath.cos(theta), mpmath.sin(theta)
            return -s_ * lam_ * c ** p - (1 - s_) * sn + s_ * (1 - lam_) * sn ** 2

        theta = mpmath.acos(mpmath.mpf(m))
        return tuple(float(mpmath.diff(u, theta, k)) for k in (1, 2, 3))


def critical_point(p: int, residual_tol: float = 1e-8) -> CriticalPoint:
    """Terminus of the first-order line, from its closed form."""
    p = _check_odd(p)
    if p < 5:
        raise NoCriticalPointError(
            "no critical point for p = 3: the transition stays first order for 0 < lambda <= 1")
    m_star = math.sqrt((p - 4) / (p - 1))
    k = p * m_star ** (p - 4)
    lambda_star = 1.0 / (1.0 + k)
    s_star = (1.0 + k) / (1.0 + k * (1.0 + math.sqrt(3.0 / (p - 1)) * (m_star ** 2 + 2.0)))
    residuals = tuple(abs(r) for r in theta_derivatives(p, s_star, lambda_star, m_star))
    if max(residuals) > residual_tol:
        raise NumericalError(f"critical-point derivative residuals too large: {residuals}")
    return CriticalPoint(p=p, m_star=m_star, lambda_star=lambda_star, s_star=s_star,
                         residuals=residuals)
