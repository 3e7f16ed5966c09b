"""Extended-precision refinement of an exponentially small avoided crossing.

Near a first-order transition the two lowest sector levels split by an
amount far below double-precision resolution once N reaches a few hundred.
The routines here work with the same pentadiagonal matrix in gmpy2
arithmetic: shifted two-vector inverse iteration resolves the pair, and a
secant search on the energy difference of the two localized states puts
``s`` on the crossing.
"""
from __future__ import annotations

import logging
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpfr
from scipy.linalg import eig_banded, solve_banded

from .dicke import ModelParams, build_sector_hamiltonian
from .errors import NumericalError

log = logging.getLogger(__name__)

_BITS_LADDER = (256, 512, 1024, 2048, 4096, 8192)
# bits of headroom the per-spin gap must keep above the working precision
_MARGIN_BITS = 80


@lru_cache(maxsize=16)
def _static_terms(n: int, p: int, bits: int):
    """s- and lam-independent pieces: m**p, (1 - m**2 + 1/S)/2, ladder amplitudes."""
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        spin = mpfr(n) / 2
        inv = 1 / spin
        mags = [mpfr(k) - spin for k in range(n + 1)]
        m = [x * inv for x in mags]
        m_pow = [x ** p for x in m]
        mx2_diag = [(spin * (spin + 1) - x * x) / (2 * spin * spin) for x in mags]
        amp = [gmpy2.sqrt(spin * (spin + 1) - mags[k] * (mags[k] + 1)) for k in range(n)]
        one_step = [a * inv / 2 for a in amp]
        two_step = [amp[k] * amp[k + 1] * inv * inv / 4 for k in range(n - 1)]
    return tuple(m), tuple(m_pow), tuple(mx2_diag), tuple(one_step), tuple(two_step)


def _bands(n, p, s, lam, bits):
    m, m_pow, mx2_diag, one_step, two_step = _static_terms(n, p, bits)
    a = -s * lam
    b = s * (1 - lam)
    c = -(1 - s)
    diag = [a * x + b * y for x, y in zip(m_pow, mx2_diag)]
    off1 = [c * x for x in one_step]
    off2 = [b * x for x in two_step]
    return m, diag, off1, off2


def _ldl(diag, off1, off2, sigma):
    n = len(diag)
    d = [None] * n
    l1 = [None] * max(n - 1, 0)
    l2 = [None] * max(n - 2, 0)
    for i in range(n):
        v = diag[i] - sigma
        if i >= 1:
            v -= l1[i - 1] * l1[i - 1] * d[i - 1]
        if i >= 2:
            v -= l2[i - 2] * l2[i - 2] * d[i - 2]
        if v == 0:
            raise ZeroDivisionError
        d[i] = v
        if i < n - 1:
            t = off1[i]
            if i >= 1:
                t -= l2[i - 1] * l1[i - 1] * d[i - 1]
            l1[i] = t / v
        if i < n - 2:
            l2[i] = off2[i] / v
    return d, l1, l2


def _solve(fac, x):
    d, l1, l2 = fac
    n = len(d)
    y = list(x)
    for i in range(1, n):
        y[i] -= l1[i - 1] * y[i - 1]
        if i >= 2:
            y[i] -= l2[i - 2] * y[i - 2]
    z = [y[i] / d[i] for i in range(n)]
    for i in range(n - 2, -1, -1):
        z[i] -= l1[i] * z[i + 1]
        if i <= n - 3:
            z[i] -= l2[i] * z[i + 2]
    return z


def _matvec(diag, off1, off2, x):
    n = len(diag)
    y = [diag[i] * x[i] for i in range(n)]
    for i in range(n - 1):
        y[i] += off1[i] * x[i + 1]
        y[i + 1] += off1[i] * x[i]
    for i in range(n - 2):
        y[i] += off2[i] * x[i + 2]
        y[i + 2] += off2[i] * x[i]
    return y


def _dot(a, b):
    return gmpy2.fsum([x * y for x, y in zip(a, b)])


def _sym2(a, b, c):
    """Eigen-decomposition of [[a, b], [b, c]]: ascending values, rotation (cos, sin)."""
    mid = (a + c) / 2
    half = (c - a) / 2
    rad = gmpy2.sqrt(half * half + b * b)
    if rad == 0:
        return (mid, mid), (mpfr(1), mpfr(0))
    # eigenvector of the lower eigenvalue
    if half >= 0:
        vx, vy = half + rad, -b
    else:
        vx, vy = -b, -half + rad
    norm = gmpy2.sqrt(vx * vx + vy * vy)
    return (mid - rad, mid + rad), (vx / norm, vy / norm)


def _rotate(x0, x1, c, s):
    return [c * u + s * w for u, w in zip(x0, x1)], [-s * u + c * w for u, w in zip(x0, x1)]


def _orthonormalize(x0, x1):
    n0 = gmpy2.sqrt(_dot(x0, x0))
    x0 = [v / n0 for v in x0]
    r = _dot(x0, x1)
    x1 = [v - r * u for v, u in zip(x1, x0)]
    n1 = gmpy2.sqrt(_dot(x1, x1))
    return x0, [v / n1 for v in x1]


def _pair(bands, start, sigma, bits, max_iter=40):
    """Two lowest eigenpairs by shifted subspace inverse iteration."""
    m, diag, off1, off2 = bands
    x0, x1 = start
    tol = mpfr(2) ** (16 - bits)
    prev = None
    for _ in range(max_iter):
        try:
            fac = _ldl(diag, off1, off2, sigma)
        except ZeroDivisionError:
            sigma = sigma * (1 + mpfr(2) ** (-bits // 2))
            continue
        x0, x1 = _orthonormalize(_solve(fac, x0), _solve(fac, x1))
        h0 = _matvec(diag, off1, off2, x0)
        h1 = _matvec(diag, off1, off2, x1)
        (t0, t1), (c, s) = _sym2(_dot(x0, h0), _dot(x0, h1), _dot(x1, h1))
        x0, x1 = _rotate(x0, x1, c, s)
        if prev is not None and abs(t0 - prev[0]) <= tol and abs(t1 - prev[1]) <= tol:
            return (t0, t1), (x0, x1)
        prev = (t0, t1)
        sigma = (t0 + t1) / 2
    raise NumericalError("extended-precision inverse iteration did not converge")


def _localized_split(m, theta, vecs):
    """Energy of the high-m localized state minus that of the low-m one."""
    x0, x1 = vecs
    mx0 = [a * b for a, b in zip(m, x0)]
    (_, _), (c, s) = _sym2(_dot(x0, mx0), _dot(x1, mx0), _dot(x1, [a * b for a, b in zip(m, x1)]))
    # low-m state is c*x0 + s*x1
    e_low = c * c * theta[0] + s * s * theta[1]
    e_high = s * s * theta[0] + c * c * theta[1]
    return e_high - e_low


def _double_pair(params: ModelParams, n: int):
    """Double-precision start: two lowest eigenpairs of the sector matrix."""
    h = build_sector_hamiltonian(params, n)
    w = eig_banded(h.lower_banded(), lower=True, select="i", select_range=(0, 1),
                   eigvals_only=True, check_finite=False)
    sigma = 0.5 * (w[0] + w[1]) - 1e-12 * max(1.0, abs(w[0]))
    ab = np.zeros((5, n + 1))
    ab[0, 2:] = h.off2
    ab[1, 1:] = h.off1
    ab[2] = h.diagonal - sigma
    ab[3, :-1] = h.off1
    ab[4, :-2] = h.off2
    x = np.zeros((n + 1, 2))
    x[: (n + 1) // 2, 0] = 1.0
    x[(n + 1) // 2:, 1] = 1.0
    for _ in range(4):
        x = solve_banded((2, 2), ab, x, check_finite=False)
        x, _ = np.linalg.qr(x)
    return w, x


def refine_crossing(p: int, lam: float, n_spins: int, s0: float, max_steps: int = 30):
    """Locate the avoided crossing near ``s0`` and return ``(s_min, gap)``.

    ``gap`` is in full-Hamiltonian units (N times the per-spin splitting).
    Precision is raised until the splitting clears the working resolution
    by ``_MARGIN_BITS`` bits.
    """
    n = int(n_spins)
    w, x = _double_pair(ModelParams(p, s0, lam), n)
    for bits in _BITS_LADDER:
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            lam_mp = mpfr(lam)
            start = ([mpfr(float(v)) for v in x[:, 0]], [mpfr(float(v)) for v in x[:, 1]])
            sigma = mpfr((w[0] + w[1]) / 2)

            def split(s_mp, start, sigma):
                bands = _bands(n, p, s_mp, lam_mp, bits)
                theta, vecs = _pair(bands, start, sigma, bits)
                return _localized_split(bands[0], theta, vecs), theta, vecs

            s_prev = mpfr(s0)
            d_prev, theta, vecs = split(s_prev, start, sigma)
            s_cur = s_prev + mpfr(1e-12) * (1 if d_prev < 0 else -1)
            gap = None
            for _ in range(max_steps):
                d_cur, theta, vecs = split(s_cur, vecs, (theta[0] + theta[1]) / 2)
                gap = theta[1] - theta[0]
                if abs(d_cur) <= gap * mpfr(2) ** -24 or d_cur == d_prev:
                    # d_cur == d_prev: s no longer resolves the crossing at this precision
                    break
                s_next = s_cur - d_cur * (s_cur - s_prev) / (d_cur - d_prev)
                s_prev, d_prev, s_cur = s_cur, d_cur, s_next

            converged = abs(d_cur) <= gap * mpfr(2) ** -24
            if converged and gap > mpfr(2) ** (_MARGIN_BITS - bits):
                full_gap = float(gap * n)
                if full_gap == 0.0:
                    raise NumericalError("minimum gap underflows double precision")
                log.debug("N=%d resolved at %d bits, gap=%.3e", n, bits, full_gap)
                return float(s_cur), full_gap
            log.debug("N=%d unresolved at %d bits; raising precision", n, bits)
    raise NumericalError(f"gap at N={n} not resolved with {_BITS_LADDER[-1]} bits")
