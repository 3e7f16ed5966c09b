"""Phase diagram in the (s, lambda) plane for fixed p."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import semiclassical as sc
from .dicke import ModelParams
from .errors import NoCriticalPointError, ValidationError

log = logging.getLogger(__name__)

PARAMAGNETIC = "quantum-paramagnetic"
FERROMAGNETIC = "ferromagnetic"

_LAMBDA_TOL = 1e-8


@dataclass(frozen=True)
class PhaseDiagram:
    p: int
    first_order: tuple  # TransitionPoint, descending lambda
    second_order: tuple  # ((lam, s), ...) on s = 1/(3 - 2 lam)
    meeting_lambda: Optional[float]
    terminus: Optional[tuple]  # traced (lam, s) where the first-order line ends
    terminus_closed_form: Optional[sc.CriticalPoint]


def default_lambda_grid(p: int, n_points: int = 201) -> np.ndarray:
    """Descending grid from 1 down to max(lambda* - 0.05, 0.01)."""
    try:
        lo = max(sc.critical_point(p).lambda_star - 0.05, 0.01)
    except NoCriticalPointError:
        lo = 0.01
    return np.linspace(1.0, lo, n_points)


def _subdivide(grid, i, factor=10):
    """Points strictly between grid[i] and grid[i + 1] at ``factor`` times the density."""
    return list(np.linspace(grid[i], grid[i + 1], factor + 1)[1:-1])


def _above_second_order(tp: sc.TransitionPoint) -> bool:
    return tp.s_c > sc.second_order_line(tp.lam)


def _bisect_lambda(pred, lam_true, lam_false, tol=_LAMBDA_TOL):
    """Boundary between a lambda where ``pred`` holds and one where it does not."""
    while abs(lam_true - lam_false) > tol:
        mid = 0.5 * (lam_true + lam_false)
        if pred(mid):
            lam_true = mid
        else:
            lam_false = mid
    return lam_true


def trace_phase_diagram(p: int, lambda_grid: Optional[Sequence[float]] = None,
                        refine: bool = True) -> PhaseDiagram:
    """Follow the first-order line down in lambda from 1.

    Each transition is searched near the previous s_c.  Where the line
    stops, and where it crosses the second-order line, the position is
    bisected in lambda.
    """
    p = int(p)
    if p < 3 or p % 2 == 0:
        raise ValidationError(f"p must be an odd integer >= 3, got {p!r}")
    if lambda_grid is None:
        grid = default_lambda_grid(p)
    else:
        grid = np.asarray(lambda_grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValidationError("lambda grid is empty")
    if np.any(grid <= 0) or np.any(grid > 1):
        raise ValidationError("lambda grid must lie within (0, 1]")
    if np.any(np.diff(grid) >= 0):
        raise ValidationError("lambda grid must be strictly descending")

    def run(lams, known=None):
        known = {} if known is None else known
        pts, prev = [], None
        for lam in lams:
            tp = known[lam] if lam in known else sc.locate_first_order(p, float(lam), near=prev)
            pts.append(tp)
            if tp is not None:
                prev = tp.s_c
        return pts

    points = run(grid)

    if refine and lambda_grid is None and len(grid) > 1:
        extra = []
        for i in range(len(grid) - 1):
            a, b = points[i], points[i + 1]
            if (a is None) != (b is None):
                extra += _subdivide(grid, i)
            elif a is not None and _above_second_order(a) != _above_second_order(b):
                extra += _subdivide(grid, i)
        if extra:
            known = dict(zip(grid, points))
            grid = np.array(sorted(set(grid) | set(extra), reverse=True))
            points = run(grid, known)

    first = tuple(tp for tp in points if tp is not None)

    terminus = None
    last = None
    for lam, tp in zip(grid, points):
        if tp is None and last is not None:
            lam_end = _bisect_lambda(lambda x: sc.locate_first_order(p, x) is not None,
                                     last.lam, float(lam))
            tp_end = sc.locate_first_order(p, lam_end)
            terminus = (lam_end, tp_end.s_c)
            break
        last = tp

    meeting = None
    for a, b in zip(first, first[1:]):
        if _above_second_order(a) != _above_second_order(b):
            def pred(x, ref=_above_second_order(a)):
                tp = sc.locate_first_order(p, x)
                return tp is not None and _above_second_order(tp) == ref
            meeting = _bisect_lambda(pred, a.lam, b.lam)
            break

    try:
        closed = sc.critical_point(p)
    except NoCriticalPointError:
        closed = None

    second = tuple((float(lam), sc.second_order_line(float(lam))) for lam in grid)
    return PhaseDiagram(p=p, first_order=first, second_order=second, meeting_lambda=meeting,
                        terminus=terminus, terminus_closed_form=closed)


def classify_point(p: int, s: float, lam: float, tol: float = 1e-12) -> str:
    """Phase label from the global minimum of the classical potential.

    Paramagnetic when that minimum sits at m = 0; minima degenerate within
    ``tol`` count as ferromagnetic if any of them is magnetized.
    """
    landscape = sc.find_landscape(ModelParams(p, s, lam))
    u_min = min(u for _, u in landscape.minima)
    best = [m for m, u in landscape.minima if u <= u_min + tol]
    if any(abs(m) > 1e-6 for m in best):
        return FERROMAGNETIC
    return PARAMAGNETIC
