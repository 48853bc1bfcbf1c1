import math

import numpy as np
import pytest

from projcones.conegeom import (ConeShift, DegenerateShiftSignal, default_graph_cone,
                                graph_cone_from_curve, graph_intersection_cover,
                                kappa_of, slice_difference, slice_interval,
                                special_points, tau_of, two_cones_cover,
                                write_cover_dump)
from projcones.errors import DegenerateInputError, DomainError, PreconditionError
from projcones.geom3 import special_curve, planar_curve
from projcones.oracles import halfline_patch_distance, lattice_oracle

FULL = (0.0, 2 * math.pi)


@pytest.fixture(scope="module")
def cone():
    return default_graph_cone()


def _oracle(cone, p, delta):
    cur, J = cone.curve, cone.J
    return lattice_oracle([lambda x: halfline_patch_distance(x, cur, J),
                           lambda x: halfline_patch_distance(x, cur, J, apex=p)], delta)


def _case_b_point(cone, a, u):
    """World point whose shift satisfies c = -a f(b/a) with b/a = u."""
    b = a * u
    c = -a * float(cone.f(np.array(u)))
    return cone.to_world(np.array([-b, c, -a]))


def test_default_cone_constants(cone):
    assert cone.eta == pytest.approx(1.0, abs=1e-12)
    assert cone.L == pytest.approx(1 / math.sqrt(3), abs=1e-12)
    assert cone.I == (-0.5, 0.5)


def test_cone_from_special_curve(cone):
    g = graph_cone_from_curve(special_curve(FULL), (4 * math.pi / 3, 5 * math.pi / 3))
    assert g.source == "closed-form"
    assert g.u_min == pytest.approx(-0.5, abs=1e-12) and g.u_max == pytest.approx(0.5, abs=1e-12)
    u = np.linspace(-0.5, 0.5, 11)
    assert np.allclose(g.f(u), -np.sqrt(1 - u * u), atol=1e-12)
    assert g.eta == pytest.approx(1.0, abs=1e-9)


def test_short_arc_lipschitz():
    J = (3 * math.pi / 2 - 0.1, 3 * math.pi / 2 + 0.1)
    assert graph_cone_from_curve(special_curve(FULL), J).L <= 0.11


def test_planar_curve_rejected():
    with pytest.raises(DegenerateInputError):
        graph_cone_from_curve(planar_curve(FULL), (4.0, 5.0))


def test_chebyshev_fallback_matches_geometry():
    # a tilted copy of the special curve takes the interpolated path
    a = 0.2
    Rx = np.array([[1, 0, 0], [0, math.cos(a), -math.sin(a)], [0, math.sin(a), math.cos(a)]])
    base = special_curve(FULL)

    def ev(th):
        g, g1, g2 = base.evaluator(th)
        return g @ Rx.T, g1 @ Rx.T, g2 @ Rx.T

    from projcones.geom3 import DirectionCurve
    tilted = DirectionCurve(ev, FULL, "custom", "tilted")
    g = graph_cone_from_curve(tilted, (4.4, 5.0))
    assert g.source.startswith("chebyshev")
    th = np.linspace(4.4, 5.0, 9)
    gam, _, _ = tilted.evaluate(th)
    y = g.to_cone(gam)
    lam = y / y[:, 2:3]
    assert np.allclose(g.f(lam[:, 0]), lam[:, 1], atol=1e-8)


def test_shift_round_trip():
    p = np.array([0.3, -0.2, 0.7])
    assert np.array_equal(ConeShift.from_point(p).p, p)
    assert kappa_of(0.05) == 0.05 and tau_of(0.05) == pytest.approx(0.21)


def test_slice_difference_examples(cone):
    assert slice_difference(cone, ConeShift(0, 0, 0), 0.5, 0.1) == (0.0, 0.0)
    d, dp = slice_difference(cone, ConeShift(0, 0, 0.2), 0.5, 0.1)
    assert d == pytest.approx(-0.2, abs=1e-15) and dp == 0.0
    # b = 0.1: by evenness of f the zero is at t = -b/2
    sp = special_points(cone, ConeShift(0, 0.1, 0), 0.5, 2 ** -10, 0.25)
    assert sp.kinds == ("endpoint", "zero")
    assert sp.s2 == pytest.approx(-0.05, abs=2 ** -20)


def test_slice_difference_domain(cone):
    with pytest.raises(DomainError):
        slice_difference(cone, ConeShift(0, 0, 0), 0.5, 0.4)
    with pytest.raises(DomainError):
        slice_difference(cone, ConeShift(0.2, 0, 0), 0.05, 0.0, delta=2 ** -8, eps=0.5)


def test_slice_interval_formula(cone):
    sh = ConeShift(0.2, 0.05, 0.0)
    lo, hi = slice_interval(cone, sh, 0.4)
    assert lo == pytest.approx(max(-0.2, 0.6 * -0.5 - 0.05))
    assert hi == pytest.approx(min(0.2, 0.6 * 0.5 - 0.05))


def test_special_points_monotone_no_zero(cone):
    sp = special_points(cone, ConeShift(0, 0, 0.3), 0.5, 2 ** -10, 0.25)
    lo, hi = slice_interval(cone, ConeShift(0, 0, 0.3), 0.5)
    assert sp.kinds == ("endpoint", "endpoint")
    assert (sp.s1, sp.s2) == (pytest.approx(float(lo)), pytest.approx(float(hi)))


def test_special_points_straddle(cone):
    # c is set so that d(h b/a) = 0.01 > 0 while both ends of I_h are negative
    sh = ConeShift(-0.3, -0.03, -0.308496231131986)
    sp = special_points(cone, sh, 0.6, 2 ** -20, 0.5)
    assert sp.kinds == ("zero", "zero")
    assert sp.s1 < sp.t_star < sp.s2
    for s in (sp.s1, sp.s2):
        assert abs(slice_difference(cone, sh, 0.6, s)[0]) < 1e-10
    assert min(sp.gaps) > 2 ** -10


def test_special_points_degenerate_signal(cone):
    p = ConeShift.from_point(cone.to_cone(_case_b_point(cone, 0.64, 0.2)))
    with pytest.raises(DegenerateShiftSignal):
        special_points(cone, p, 0.5, 2 ** -10, 0.25)


def test_derivative_sign_structure(cone):
    rng = np.random.default_rng(4)
    for _ in range(20):
        sh = ConeShift(*rng.uniform(-0.3, 0.3, 3))
        h = rng.uniform(0.35, 0.9)
        lo, hi = slice_interval(cone, sh, h)
        if lo >= hi:
            continue
        for t in np.linspace(lo, hi, 50):
            _, dp = slice_difference(cone, sh, h, float(t))
            if abs(dp) < 1e-12:
                continue
            # d' >= 0 exactly when a t >= h b, i.e. t/h <= b/a for a < 0
            assert (dp > 0) == (sh.a * t > h * sh.b)


def test_graph_intersection_examples():
    f0 = lambda t: np.zeros_like(t)  # noqa: E731
    ft = lambda t: np.asarray(t, float)  # noqa: E731
    same = graph_intersection_cover((f0, (-1, 1)), (f0, (-1, 1)), 0.01, 1.0)
    assert same.intervals == [(-1, 1)]
    off = graph_intersection_cover((f0, (-1, 1)), (lambda t: f0(t) + 0.1, (-1, 1)), 0.01, 1.0)
    assert off.intervals == [] and len(off.balls) == 0
    cross = graph_intersection_cover((f0, (-1, 1)), (ft, (-1, 1)), 0.01, 1.0)
    (lo, hi), = cross.intervals
    assert lo <= -0.06 <= lo + 0.01 and hi - 0.01 <= 0.06 <= hi
    with pytest.raises(DomainError):
        graph_intersection_cover((f0, (0, 1)), (f0, (2, 3)), 0.01, 1.0)


def test_two_cones_preconditions(cone):
    with pytest.raises(PreconditionError):
        two_cones_cover(None, None, (0, 0, -0.5), 2 ** -8, 0.03, 0.25, cone=cone)
    with pytest.raises(PreconditionError):
        two_cones_cover(None, None, (0.9, 0.1, -0.1), 2 ** -8, 0.03, 0.1, cone=cone)


def test_two_cones_axis_shift_misses(cone):
    # the other cone sits below with the same axis: the upper patches never meet
    p = np.array([0.0, 0.0, -0.5])
    res = two_cones_cover(None, None, p, 2 ** -8, 0.13, 0.25, cone=cone,
                          height_floor=0.1, check_tau=False)
    assert res.case == "a" and len(res.cover) == 0
    pts = _oracle(cone, p, 2 ** -8)
    assert res.all_balls.contains(pts).all()


def test_two_cones_vertical_offset_empty(cone):
    res = two_cones_cover(None, None, (0, 0.9, 0), 2 ** -8, 0.13, 0.25, cone=cone,
                          check_tau=False, height_floor=0.1)
    assert len(res.cover) == 0 and len(res.cap_balls) == 2


def test_two_cones_generic_sound(cone):
    p = np.array([0.700621, 0.393081, -0.479685])
    res = two_cones_cover(None, None, p, 2 ** -8, 0.03, 0.25, cone=cone, height_floor=0.1)
    assert res.case == "a" and len(res.cover) > 0
    pts = _oracle(cone, p, 2 ** -8)
    assert len(pts) > 1000
    assert res.all_balls.contains(pts).all()
    # ball centres lie on the first patch
    y = cone.to_cone(res.cover.centres)
    u = y[:, 0] / y[:, 2]
    assert np.allclose(y[:, 1], y[:, 2] * cone.f(u), atol=1e-12)


def test_two_cones_case_b(cone):
    p = _case_b_point(cone, 0.66, -0.25)
    res = two_cones_cover(None, None, p, 2 ** -8, 0.03, 0.25, cone=cone, height_floor=0.1)
    assert res.case == "b" and res.meta["pattern"] == "interior"
    assert res.all_balls.contains(_oracle(cone, p, 2 ** -8)).all()


def test_slab_gluing_distance(cone):
    # neighbouring slab centres on one branch stay within K delta^(1/2)
    p = np.array([0.700621, 0.393081, -0.479685])
    d = 2 ** -9
    res = two_cones_cover(None, None, p, d, 0.03, 0.25, cone=cone, height_floor=0.1)
    c, h = res.cover.centres, res.slab_h
    w = res.meta["slab_width"]
    jumps = []
    for i in range(len(h)):
        nb = np.flatnonzero(np.abs(h - h[i]) <= w * 1.0001)
        nb = nb[nb != i]
        if nb.size:
            jumps.append(np.min(np.linalg.norm(c[nb] - c[i], axis=1)))
    assert max(jumps) <= 4 * d ** 0.5


def test_cover_dump(tmp_path, cone):
    p = np.array([0.700621, 0.393081, -0.479685])
    res = two_cones_cover(None, None, p, 2 ** -7, 0.03, 0.25, cone=cone, height_floor=0.1)
    path = tmp_path / "dump.txt"
    write_cover_dump(res, path)
    rows = path.read_text().splitlines()
    assert len(rows) == 2 + len(res.cover)
    assert rows[0].split()[-2:] == ["nan", "cap"]
    assert all(r.split()[-1] == "a" for r in rows[2:])
