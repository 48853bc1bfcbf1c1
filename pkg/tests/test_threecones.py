import math

import numpy as np
import pytest

from projcones.errors import (BranchError, DegenerateInputError, DomainError, NoLineError,
                              PreconditionError)
from projcones.oracles import circular_cone_distance as cone_dist
from projcones.oracles import lattice_oracle, plane_distance
from projcones.threecones import (ConeLine, Plane3, cone_distance, line_cone_cover,
                                  nearest_cone_line, plane_pair_line, radical_plane,
                                  separation_test, tangent_line_cover, three_cones_cover)

S2 = math.sqrt(2.0)
E101 = np.array([1.0, 0.0, 1.0]) / S2


def test_cone_distance_matches_oracle():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, (200, 3))
    assert np.allclose(cone_distance(x), cone_dist(x), atol=1e-15)


def test_radical_plane_examples():
    P = radical_plane((0, 0, 1))
    assert P.offset * np.sign(P.normal[2]) == pytest.approx(0.5)
    assert np.allclose(np.abs(P.normal), [0, 0, 1])
    Q = radical_plane((1, 0, 0))
    assert np.allclose(np.abs(Q.normal), [1, 0, 0]) and abs(Q.offset) == pytest.approx(0.5)
    p = np.array([0.3, -0.7, 0.2])
    assert radical_plane(p).distance(p / 2) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DegenerateInputError):
        radical_plane((0, 0, 0))


def test_radical_plane_contains_exact_intersection():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = rng.uniform(-1, 1, 3)
        P = radical_plane(p)
        # points of C on a random cone line: solve |x - p| on p + C along the line
        phi = rng.uniform(0, 2 * math.pi)
        d = np.array([math.cos(phi), math.sin(phi), 1.0]) / S2
        # Q(r d - p) = 0 is linear in r because Q(d) = 0
        bar = np.array([1.0, 1.0, -1.0])
        den = 2 * (d * bar) @ p
        if abs(den) < 1e-6:
            continue
        r = (p * bar) @ p / den
        assert P.distance(r * d) == pytest.approx(0.0, abs=1e-9)


def test_plane_normal_check():
    with pytest.raises(DomainError):
        Plane3(np.zeros(3), np.array([1.0, 1.0, 0.0]))


def test_cone_line_validation():
    with pytest.raises(DomainError):
        ConeLine(np.array([1.0, 0.0, 0.0]))
    ln = ConeLine(-E101)
    assert ln.direction[2] > 0
    assert ConeLine.from_angle(0.0).same_as(ln)


def test_nearest_cone_line():
    assert nearest_cone_line((0, 0.5, 0.5)).same_as(ConeLine.from_angle(math.pi / 2))
    assert nearest_cone_line((0.3, 0, -0.3)).same_as(ConeLine.from_angle(math.pi))
    assert nearest_cone_line((0, 0, 0)).same_as(ConeLine.from_angle(0.0))


def test_tangent_examples():
    tc = tangent_line_cover((0, 0.5, 0.5), 2 ** -9, 0.15)
    assert np.allclose(tc.line.direction, np.array([0, 1, 1]) / S2, atol=1e-15)
    tc = tangent_line_cover(np.array([0.5, 0, 0.5]) + 1e-6, 2 ** -9, 0.15)
    assert np.allclose(tc.line.direction, E101, atol=1e-5)
    with pytest.raises(BranchError):
        tangent_line_cover((0.0, 0.0, 0.6), 2 ** -9, 0.15)


def test_tangent_oracle():
    p = np.array([0.0, 0.5, 0.5])
    d = 2 ** -9
    tc = tangent_line_cover(p, d, 0.15)
    pts = lattice_oracle([cone_dist, lambda x: cone_dist(x, p)], d)
    assert len(pts) > 0
    assert tc.line.distance(pts).max() <= tc.radius


def test_separation_examples():
    q = np.array([0.3, 0.4, 0.1])
    rep = separation_test(2 * q, q, 2 ** -20, 0.1)
    assert rep.separated and rep.xi3_guard
    assert rep.distance > (2 ** -20) ** 0.5
    with pytest.raises(PreconditionError):
        separation_test(q, q, 2 ** -20, 0.1)
    with pytest.raises(BranchError):
        separation_test(q, np.array([0.0, 0.5, 0.5]), 2 ** -20, 0.1)


def test_separation_lower_bound_below_exact():
    from projcones.threecones import _disc_distance, _disc_gap_lower_bound
    rng = np.random.default_rng(12)
    for _ in range(30):
        q = rng.uniform(-0.8, 0.8, 3)
        p = rng.uniform(0.3, 1.5) * q + rng.normal(scale=0.05, size=3)
        P, Q = radical_plane(p), radical_plane(q)
        assert _disc_gap_lower_bound(P, Q) <= _disc_distance(P, Q) + 1e-9


def test_plane_pair_examples():
    ln = plane_pair_line((0, 0, 1), (1, 0, 0), 2 ** -10)
    assert np.allclose(np.abs(ln.direction), [0, 1, 0])
    assert ln.distance(np.array([[0.5, 7.0, 0.5]]))[0] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(NoLineError):
        plane_pair_line((0, 0, 1), (0, 0, 2), 2 ** -10)


def test_plane_pair_width_bound():
    rng = np.random.default_rng(11)
    d, c, R = 2 ** -8, 0.15, 8.0
    done = 0
    while done < 3:
        p, q = rng.uniform(-0.8, 0.8, (2, 3))
        try:
            ln = plane_pair_line(p, q, d, c, R=R)
        except BranchError:
            continue
        P, Q = radical_plane(p), radical_plane(q)
        r = R * d ** (1 - c)
        pts = lattice_oracle([lambda x: plane_distance(x, P.point, P.normal),
                              lambda x: plane_distance(x, Q.point, Q.normal)], r, pitch=d)
        assert ln.distance(pts).max() <= ln.width_bound
        done += 1


def test_line_cone_examples():
    d = 2 ** -12
    one = line_cone_cover((0.5, 0, 0.5), (0, 1, 0), d)
    assert len(one.lines) == 1 and one.lines[0].same_as(ConeLine(E101))
    assert one.discriminant == pytest.approx(0.0, abs=1e-12)
    two = line_cone_cover((0, 0, 0.5), (1, 0, 0), d)
    phis = sorted(round(ln.phi, 12) for ln in two.lines)
    assert phis == [0.0, round(math.pi, 12)]
    assert line_cone_cover((0, 0, 2), (1, 0, 0), d).lines == ()
    assert one.radius == pytest.approx(d ** (0.15 ** 2 / 5))


def test_line_cone_requires_unit_direction():
    with pytest.raises(DomainError):
        line_cone_cover((0, 0, 0.5), (2, 0, 0), 2 ** -10)


def test_three_cones_worked_pair():
    r = three_cones_cover((0, 0, 1), (1, 0, 0), 2 ** -12)
    assert r.decision == "lines" and r.branch == "plane-pair"
    assert len(r.lines) == 1 and r.lines[0].same_as(ConeLine(E101))
    assert r.radius == pytest.approx(2 ** (-12 * 0.15))
    assert r.meta["certified"] and r.nonempty == 1


def test_three_cones_worked_pair_oracle():
    p, q, d = np.array([0, 0, 1.0]), np.array([1.0, 0, 0]), 2 ** -10
    r = three_cones_cover(p, q, d)
    pts = lattice_oracle([cone_dist, lambda x: cone_dist(x, p), lambda x: cone_dist(x, q)], d)
    assert len(pts) > 0 and r.contains(pts).all()


def test_three_cones_tangent_branch():
    r = three_cones_cover((0, 0.5, 0.5), (0.9, 0.1, -0.2), 2 ** -12)
    assert r.branch == "tangent-p"
    assert np.allclose(r.lines[0].direction, np.array([0, 1, 1]) / S2)


def test_three_cones_collinear_empty():
    p = np.array([0.15, 0.2, 0.05])
    r = three_cones_cover(p, 2 * p, 2 ** -20)
    assert r.decision == "empty" and r.branch == "separated"


def test_three_cones_preconditions():
    with pytest.raises(PreconditionError):
        three_cones_cover((0.01, 0, 0), (0.5, 0, 0), 2 ** -10)
    with pytest.raises(PreconditionError):
        three_cones_cover((0.9, 0.9, 0), (0.5, 0, 0), 2 ** -10)


def test_returned_lines_on_cone():
    rng = np.random.default_rng(9)
    n = 0
    while n < 40:
        p, q = rng.uniform(-0.7, 0.7, (2, 3))
        try:
            r = three_cones_cover(p, q, 2 ** -10)
        except (PreconditionError, BranchError):
            continue
        n += 1
        for ln in r.lines:
            v = ln.direction
            assert abs(v[0] ** 2 + v[1] ** 2 - v[2] ** 2) <= 1e-12


def test_collinear_pair_empty_by_slab_widths():
    # planes only ~0.2 apart: below 3 R delta^(1-c) at 2^-8 but far wider
    # than the 3 delta/|p| + 3 delta/|q| slabs
    q = np.array([0.0, 0.3, 0.9])
    p = 0.48 * q
    r = three_cones_cover(p, q, 2 ** -8)
    assert r.decision == "empty" and r.branch == "separated-width"
    pts = lattice_oracle([cone_dist, lambda x: cone_dist(x, p),
                          lambda x: cone_dist(x, q)], 2 ** -8)
    assert len(pts) == 0
