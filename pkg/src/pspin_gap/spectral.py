"""Low-lying spectrum of the sector Hamiltonian: levels, gap curves, minimum gaps."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import LinAlgError, eig_banded

from . import _multiprec
from .dicke import ModelParams, SectorHamiltonian, build_sector_hamiltonian
from .errors import NoInteriorMinimumError, NumericalError, ValidationError

log = logging.getLogger(__name__)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# Below this many units of eps*N a double-precision gap is treated as unresolved.
_UNRESOLVED_EPS_UNITS = 1e6


@dataclass(frozen=True)
class GapCurve:
    p: int
    lam: float
    n_spins: int
    samples: tuple  # ((s, gap), ...), gap in full-Hamiltonian units


@dataclass(frozen=True)
class GapScalingFit:
    points: tuple  # ((n_spins, min_gap), ...)
    slope: float
    intercept: float
    r_squared: float


class MinGap(NamedTuple):
    s_min: float
    gap_min: float


def lowest_eigenvalues(h: SectorHamiltonian, k: int = 2) -> np.ndarray:
    """The ``k`` smallest eigenvalues of ``h`` (per-spin units), ascending.

    Uses the LAPACK banded path (reduction to tridiagonal form followed by
    bisection), which costs O(N^2) for half-bandwidth 2.
    """
    if int(k) != k or not 1 <= k <= h.dim:
        raise ValidationError(f"k must lie in [1, {h.dim}], got {k!r}")
    return eig_banded(h.lower_banded(), lower=True, select="i",
                      select_range=(0, int(k) - 1), eigvals_only=True,
                      check_finite=False)


def _gap(p: int, lam: float, n: int, s: float) -> float:
    try:
        w = lowest_eigenvalues(build_sector_hamiltonian(ModelParams(p, s, lam), n), 2)
    except LinAlgError as exc:
        raise NumericalError(f"eigensolver failed at s={s!r}: {exc}") from exc
    return n * (w[1] - w[0])


def gap_curve(p: int, lam: float, n_spins: int, s_grid: Sequence[float]) -> GapCurve:
    """Full-Hamiltonian gap E1 - E0 at each ``s`` of a strictly increasing grid."""
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size == 0:
        raise ValidationError("s_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(s_grid) <= 0):
        raise ValidationError("s_grid must be strictly increasing")
    if s_grid[0] < 0 or s_grid[-1] > 1:
        raise ValidationError("s_grid must lie within [0, 1]")
    samples = []
    for s in s_grid:
        g = _gap(p, lam, n_spins, float(s))
        if not np.isfinite(g):
            raise NumericalError(f"non-finite gap at s={s!r}")
        samples.append((float(s), max(g, 0.0)))
    return GapCurve(p=p, lam=float(lam), n_spins=int(n_spins), samples=tuple(samples))


def _golden_min(f, a: float, b: float, c: float, fb: float):
    """Golden-section search inside (a, c) given f(b) below both ends.

    Runs until the bracket stops shrinking in floating point, so that the
    narrow hyperbolic bottom of an avoided crossing is not overshot.
    """
    x, fx = b, fb
    lo, hi = a, c
    u = hi - _GOLDEN * (hi - lo)
    v = lo + _GOLDEN * (hi - lo)
    fu, fv = f(u), f(v)
    for _ in range(200):
        if fu < fv:
            hi, v, fv = v, u, fu
            u = hi - _GOLDEN * (hi - lo)
            fu = f(u)
        else:
            lo, u, fu = u, v, fv
            v = lo + _GOLDEN * (hi - lo)
            fv = f(v)
        for cand, fc in ((u, fu), (v, fv)):
            if fc < fx:
                x, fx = cand, fc
        if hi - lo <= 4.0 * np.finfo(float).eps * max(1.0, abs(x)):
            break
    return x, fx


def min_gap(p: int, lam: float, n_spins: int, s_bracket, n_grid: int = 101,
            refine: bool = True) -> MinGap:
    """Minimum of the gap over ``s_bracket``.

    A coarse grid locates the dip, golden-section search narrows it, and when
    the remaining gap is too small for double precision the avoided crossing
    is resolved in extended precision.
    """
    lo, hi = (float(v) for v in s_bracket)
    if not (0.0 <= lo < hi <= 1.0):
        raise ValidationError(f"bracket must satisfy 0 <= lo < hi <= 1, got {s_bracket!r}")
    if n_grid < 3:
        raise ValidationError("n_grid must be at least 3")
    grid = np.linspace(lo, hi, int(n_grid))
    gaps = np.array([_gap(p, lam, n_spins, s) for s in grid])
    i = int(np.argmin(gaps))
    if i == 0 or i == len(grid) - 1:
        raise NoInteriorMinimumError(
            f"no interior minimum of the gap in [{lo}, {hi}] (minimum at s={grid[i]})")

    s_min, g_min = _golden_min(lambda s: _gap(p, lam, n_spins, s),
                               grid[i - 1], grid[i], grid[i + 1], gaps[i])

    noise = _UNRESOLVED_EPS_UNITS * np.finfo(float).eps * n_spins
    if refine and g_min < noise:
        log.info("gap %.3e at N=%d below double resolution; refining", g_min, n_spins)
        s_min, g_min = _multiprec.refine_crossing(p, lam, n_spins, s_min)
    if not g_min > 0:
        raise NumericalError(f"non-positive minimum gap {g_min!r} at s={s_min!r}")
    return MinGap(float(s_min), float(g_min))


def scan_min_gaps(p: int, lam: float, n_list: Sequence[int], s_bracket, n_grid: int = 101):
    """Minimum gaps for increasing N, each search centred on the previous minimum.

    The first N uses ``s_bracket``; later ones search s_prev +/- 4/N, which
    covers the O(1/N) drift of the minimum while keeping the O(1/N)-wide dip
    resolved by the coarse grid.
    """
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValidationError("n_list must be strictly increasing")
    out = []
    bracket = tuple(s_bracket)
    for n in n_list:
        res = min_gap(p, lam, n, bracket, n_grid=n_grid)
        out.append((n, res))
        half = 4.0 / n
        bracket = (max(0.0, res.s_min - half), min(1.0, res.s_min + half))
    return out


def fit_gap_scaling(points) -> GapScalingFit:
    """Least-squares line through (N, ln gap); the slope estimates -alpha."""
    pts = [(int(n), float(g)) for n, g in points]
    if len(pts) < 3:
        raise ValidationError("need at least 3 points to fit gap scaling")
    ns = np.array([n for n, _ in pts], dtype=float)
    gs = np.array([g for _, g in pts])
    if np.any(gs <= 0):
        raise ValidationError("gaps must be positive to take logarithms")
    if np.any(np.diff(ns) <= 0):
        raise ValidationError("n_spins must be strictly increasing")
    y = np.log(gs)
    slope, intercept = np.polyfit(ns, y, 1)
    resid = y - (slope * ns + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return GapScalingFit(points=tuple(pts), slope=float(slope), intercept=float(intercept),
                         r_squared=min(max(r2, 0.0), 1.0))
