import numpy as np
import pytest

from pspin_gap import phase, semiclassical as sc
from pspin_gap.errors import ValidationError


@pytest.fixture(scope="module")
def diagram_p5():
    return phase.trace_phase_diagram(5)


def test_default_grid():
    grid = phase.default_lambda_grid(11)
    assert grid[0] == 1.0 and len(grid) == 201
    assert abs(grid[-1] - (sc.critical_point(11).lambda_star - 0.05)) < 1e-15
    assert phase.default_lambda_grid(3)[-1] == 0.01


def test_p5_structure(diagram_p5):
    d = diagram_p5
    cp = d.terminus_closed_form
    assert abs(d.terminus[0] - cp.lambda_star) <= 1e-4
    assert abs(d.terminus[1] - cp.s_star) <= 1e-4
    assert d.meeting_lambda is not None
    assert cp.lambda_star < d.meeting_lambda < 1
    lams = [tp.lam for tp in d.first_order]
    assert lams == sorted(lams, reverse=True)
    # second-order segment sits at small lambda, the first-order line at large lambda
    assert min(lams) > cp.lambda_star
    assert any(lam < cp.lambda_star for lam, _ in d.second_order)


def test_p5_continuity(diagram_p5):
    pts = diagram_p5.first_order
    for a, b in zip(pts, pts[1:]):
        assert abs(a.s_c - b.s_c) <= 10 * abs(a.lam - b.lam)


def test_meeting_point_unique(diagram_p5):
    side = [tp.s_c > sc.second_order_line(tp.lam) for tp in diagram_p5.first_order]
    assert sum(a != b for a, b in zip(side, side[1:])) == 1


def test_meeting_point_on_second_order_line(diagram_p5):
    lam = diagram_p5.meeting_lambda
    tp = sc.locate_first_order(5, lam)
    assert abs(tp.s_c - sc.second_order_line(lam)) <= 1e-6
    # below the meeting point both degenerate minima are magnetized
    below = sc.locate_first_order(5, lam - 0.01)
    above = sc.locate_first_order(5, lam + 0.01)
    assert below.m1 > 0 and above.m1 == 0


def test_p3_has_no_terminus():
    grid = np.linspace(1.0, 0.05, 20)
    d = phase.trace_phase_diagram(3, grid)
    assert d.terminus is None and d.terminus_closed_form is None
    assert len(d.first_order) == 20
    assert d.meeting_lambda is None


@pytest.mark.parametrize("grid", [[], [0.5, 0.9], [1.0, 0.0], [1.2, 0.5]])
def test_grid_validation(grid):
    with pytest.raises(ValidationError):
        phase.trace_phase_diagram(5, grid)


def test_even_p_rejected():
    with pytest.raises(ValidationError):
        phase.trace_phase_diagram(4)


def test_classify_trivial():
    assert phase.classify_point(5, 0.01, 0.3) == phase.PARAMAGNETIC
    assert phase.classify_point(5, 0.99, 0.99) == phase.FERROMAGNETIC


def test_classify_flips_across_first_order_line():
    s_c = sc.locate_first_order(3, 1.0).s_c
    assert phase.classify_point(3, s_c - 1e-6, 1.0) == phase.PARAMAGNETIC
    assert phase.classify_point(3, s_c + 1e-6, 1.0) == phase.FERROMAGNETIC


def test_classify_tie_is_ferromagnetic():
    s_c = sc.locate_first_order(3, 1.0).s_c
    assert phase.classify_point(3, s_c, 1.0, tol=1e-9) == phase.FERROMAGNETIC


def test_classify_flips_across_second_order_line():
    lam = 0.2
    s2 = sc.second_order_line(lam)
    assert phase.classify_point(5, s2 - 1e-3, lam) == phase.PARAMAGNETIC
    assert phase.classify_point(5, s2 + 1e-3, lam) == phase.FERROMAGNETIC
