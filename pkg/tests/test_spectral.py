import math

import numpy as np
import pytest

from pspin_gap import oracle, semiclassical as sc, spectral
from pspin_gap.dicke import ModelParams, build_sector_hamiltonian
from pspin_gap.errors import NoInteriorMinimumError, ValidationError


@pytest.mark.parametrize("n", [2, 7, 50, 1000])
def test_transverse_field_levels(n):
    h = build_sector_hamiltonian(ModelParams(3, 0.0, 0.4), n)
    w = spectral.lowest_eigenvalues(h, 2)
    assert abs(w[0] + 1) <= 1e-12
    assert abs(w[1] - (-1 + 2 / n)) <= 1e-12


def test_transverse_field_gap_large_n():
    for n in (1000, 4000, 10000):
        h = build_sector_hamiltonian(ModelParams(5, 0.0, 0.5), n)
        w = spectral.lowest_eigenvalues(h, 2)
        assert abs(n * (w[1] - w[0]) - 2) <= 100 * n * np.finfo(float).eps


def test_problem_limit_levels():
    w = spectral.lowest_eigenvalues(build_sector_hamiltonian(ModelParams(3, 1.0, 1.0), 10), 2)
    assert np.allclose(w, [-1.0, -0.512], atol=1e-12)


def test_matches_full_diagonalization():
    params = ModelParams(3, 0.5, 1.0)
    sector = 8 * spectral.lowest_eigenvalues(build_sector_hamiltonian(params, 8), 2)
    full = oracle.full_hamiltonian_lowest(params, 8, 2).lowest
    assert np.allclose(sector, full, rtol=1e-10, atol=0)


def test_all_levels_sum_to_trace():
    h = build_sector_hamiltonian(ModelParams(5, 0.37, 0.6), 40)
    w = spectral.lowest_eigenvalues(h, h.dim)
    assert np.all(np.diff(w) >= 0)
    assert abs(w.sum() - h.diagonal.sum()) <= 1e-9 * abs(h.diagonal.sum())


@pytest.mark.parametrize("k", [0, 12, 1.5])
def test_k_out_of_range(k):
    with pytest.raises(ValidationError):
        spectral.lowest_eigenvalues(build_sector_hamiltonian(ModelParams(3, 0.5, 0.5), 10), k)


def test_gap_curve_at_zero():
    curve = spectral.gap_curve(3, 0.5, 30, [0.0])
    assert len(curve.samples) == 1
    s, g = curve.samples[0]
    assert s == 0 and abs(g - 2) <= 1e-12


def test_gap_curve_grid_validation():
    with pytest.raises(ValidationError):
        spectral.gap_curve(3, 1.0, 10, [0.2, 0.1])
    with pytest.raises(ValidationError):
        spectral.gap_curve(3, 1.0, 10, [])
    with pytest.raises(ValidationError):
        spectral.gap_curve(3, 1.0, 10, [0.5, 1.2])


def test_gap_curve_single_dip():
    curve = spectral.gap_curve(3, 1.0, 100, np.linspace(0, 1, 200))
    g = np.array([x[1] for x in curve.samples])
    assert np.all(np.isfinite(g)) and np.all(g >= 0)
    interior = [i for i in range(1, len(g) - 1) if g[i] < g[i - 1] and g[i] < g[i + 1]]
    assert len(interior) == 1


def test_deterministic():
    a = spectral.gap_curve(5, 0.7, 80, np.linspace(0.3, 0.6, 13))
    b = spectral.gap_curve(5, 0.7, 80, np.linspace(0.3, 0.6, 13))
    assert a == b


def test_no_interior_minimum():
    with pytest.raises(NoInteriorMinimumError):
        spectral.min_gap(3, 1.0, 50, (0.0, 0.05))


def test_bracket_validation():
    with pytest.raises(ValidationError):
        spectral.min_gap(3, 1.0, 50, (0.5, 0.4))


def test_min_gap_drifts_toward_classical_transition():
    s_c = sc.locate_first_order(3, 1.0).s_c
    a = spectral.min_gap(3, 1.0, 200, (s_c - 0.05, s_c + 0.02))
    b = spectral.min_gap(3, 1.0, 400, (s_c - 0.05, s_c + 0.02))
    assert abs(b.s_min - s_c) < abs(a.s_min - s_c)
    assert a.s_min < b.s_min < s_c


def test_min_gap_interior():
    lo, hi = 0.4, 0.55
    res = spectral.min_gap(5, 1.0, 300, (lo, hi))
    assert res.gap_min > 0
    assert res.gap_min < spectral._gap(5, 1.0, 300, lo)
    assert res.gap_min < spectral._gap(5, 1.0, 300, hi)
    assert lo < res.s_min < hi


def test_min_gap_resolves_s_to_micro_level():
    res = spectral.min_gap(3, 1.0, 60, (0.35, 0.5))
    for ds in (1e-6, -1e-6):
        assert spectral._gap(3, 1.0, 60, res.s_min + ds) >= res.gap_min


def test_extended_precision_crossing():
    # double precision cannot resolve this gap; the refined value sits on the exponential trend
    res = spectral.min_gap(3, 1.0, 400, (0.38, 0.45))
    assert 1e-15 < res.gap_min < 1e-13
    assert abs(res.s_min - 0.43424) < 1e-4


def test_polynomial_closing_at_second_order_line():
    lam = 0.2  # below the meeting point, so only the second-order line is crossed
    assert sc.locate_first_order(5, lam) is None
    s2 = sc.second_order_line(lam)
    ns = np.array([50, 100, 200])
    gaps = np.array([spectral.min_gap(5, lam, n, (s2 - 0.3, s2 + 0.25)).gap_min for n in ns])
    slope, _ = np.polyfit(np.log(ns), np.log(gaps), 1)
    local = np.diff(np.log(gaps)) / np.diff(np.log(ns))
    assert -2.0 < slope < -1.0
    assert np.ptp(local) < 0.1
    # an exponential law would give a much larger drop between 100 and 200
    assert gaps[2] / gaps[1] > 0.2


def test_fit_exact_exponential():
    pts = [(n, math.exp(-0.3 * n)) for n in (10, 20, 30, 45)]
    fit = spectral.fit_gap_scaling(pts)
    assert abs(fit.slope + 0.3) <= 1e-12
    assert abs(fit.r_squared - 1) <= 1e-12


@pytest.mark.parametrize("pts", [
    [(10, 1e-3), (20, 1e-5)],
    [(10, 1e-3), (20, 0.0), (30, 1e-7)],
    [(10, 1e-3), (30, 1e-5), (20, 1e-7)],
])
def test_fit_rejects_bad_points(pts):
    with pytest.raises(ValidationError):
        spectral.fit_gap_scaling(pts)
