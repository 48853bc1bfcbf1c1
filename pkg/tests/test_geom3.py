import math

import numpy as np
import pytest

from projcones.errors import DegenerateInputError, DomainError
from projcones.geom3 import (Family, ProjectionFamily, custom_curve, eval_curve,
                             nondegeneracy_margin, planar_curve, project,
                             projection_norms, special_curve, sublevel_measure,
                             sublevel_measure_detail, unit, vec3)

S2 = math.sqrt(2.0)


@pytest.fixture(scope="module")
def cur():
    return special_curve()


def test_special_curve_values(cur):
    g, g1, g2 = eval_curve(cur, 0.0)
    assert np.allclose(g, np.array([1, 0, 1]) / S2, atol=1e-15)
    assert np.allclose(g1, np.array([0, 1, 0]) / S2, atol=1e-15)
    assert np.allclose(g2, np.array([-1, 0, 0]) / S2, atol=1e-15)
    g, _, _ = eval_curve(cur, math.pi / 2)
    assert np.allclose(g, np.array([0, 1, 1]) / S2, atol=1e-15)


def test_unit_norm_on_grid(cur):
    g, _, _ = cur.evaluate(np.linspace(-math.pi, math.pi, 1001))
    assert np.max(np.abs(np.linalg.norm(g, axis=1) - 1)) < 1e-9


def test_angle_outside_interval():
    short = special_curve((0.0, 1.0))
    with pytest.raises(DomainError):
        eval_curve(short, 1.5)


def test_margin_special_constant(cur):
    assert nondegeneracy_margin(cur, 1000) == pytest.approx(1 / (2 * S2), abs=1e-12)
    g, g1, g2 = cur.evaluate(np.linspace(-math.pi, math.pi, 1000))
    det = np.abs(np.einsum("ij,ij->i", g, np.cross(g1, g2)))
    assert det.max() - det.min() <= 1e-12


def test_margin_planar_zero():
    assert nondegeneracy_margin(planar_curve(), 500) == pytest.approx(0.0, abs=1e-15)


def test_margin_needs_two_samples(cur):
    with pytest.raises(DomainError):
        nondegeneracy_margin(cur, 1)


def test_custom_curve_matches_finite_differences():
    # tilted circle of latitude, derivatives checked numerically
    a = 0.4

    def g(t):
        return np.stack([np.cos(t) * math.cos(a), np.sin(t) * math.cos(a),
                         np.full_like(t, math.sin(a))], axis=-1)

    def g1(t):
        return np.stack([-np.sin(t) * math.cos(a), np.cos(t) * math.cos(a),
                         np.zeros_like(t)], axis=-1)

    def g2(t):
        return np.stack([-np.cos(t) * math.cos(a), -np.sin(t) * math.cos(a),
                         np.zeros_like(t)], axis=-1)

    c = custom_curve(g, g1, g2, (-1.0, 1.0))
    t = np.linspace(-0.9, 0.9, 7)
    h = 1e-5
    fd1 = (g(t + h) - g(t - h)) / (2 * h)
    fd2 = (g(t + h) - 2 * g(t) + g(t - h)) / h ** 2
    _, d1, d2 = c.evaluate(t)
    assert np.allclose(d1, fd1, atol=1e-8)
    assert np.allclose(d2, fd2, atol=1e-4)
    assert nondegeneracy_margin(c, 100) == pytest.approx(math.sin(a) * math.cos(a) ** 2, rel=1e-12)


def test_projection_examples(cur):
    rho = ProjectionFamily(Family.LINE, cur)
    pi = ProjectionFamily(Family.PLANE, cur)
    pit = ProjectionFamily(Family.BAD_PLANE, cur)
    g0 = eval_curve(cur, 0.3)[0]
    assert project(rho, 0.3, g0) == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(project(pi, 0.3, g0), 0.0, atol=1e-15)
    assert project(rho, 0.0, [1, 1, 1]) == pytest.approx(S2, abs=1e-15)
    assert np.allclose(project(pit, 0.0, [1, 0, -1]), 0.0, atol=1e-15)


def test_pythagoras_and_frames(cur):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(1000, 3))
    th = rng.uniform(-math.pi, math.pi, 1000)
    for tag in (Family.PLANE, Family.BAD_PLANE):
        fam = ProjectionFamily(tag, cur)
        n = fam.normal(th)
        e1, e2 = fam.frame(th)
        gram = np.stack([e1, e2, n], axis=1)
        assert np.allclose(gram @ np.transpose(gram, (0, 2, 1)), np.eye(3), atol=1e-9)
        for x, t in zip(X[:50], th[:50]):
            v = project(fam, t, x)
            along = x @ fam.normal(t)[0]
            assert v @ v + along ** 2 == pytest.approx(x @ x, abs=1e-9)


def test_bad_plane_kernel(cur):
    th = np.linspace(-3, 3, 13)
    b = ProjectionFamily(Family.BAD_PLANE, cur).normal(th)
    ref = np.stack([np.cos(th), np.sin(th), -np.ones_like(th)], axis=1) / S2
    assert np.allclose(np.abs(np.einsum("ij,ij->i", b, ref)), 1.0, atol=1e-12)


def test_projection_norms_match_project(cur):
    fam = ProjectionFamily(Family.PLANE, cur)
    x = np.array([0.2, -0.5, 0.7])
    th = np.linspace(-3, 3, 9)
    direct = [np.linalg.norm(project(fam, t, x)) for t in th]
    assert np.allclose(projection_norms(fam, th, x), direct, atol=1e-12)


def test_sublevel_examples(cur):
    rho = ProjectionFamily(Family.LINE, cur)
    pi = ProjectionFamily(Family.PLANE, cur)
    assert sublevel_measure(rho, [0, 0, 1], 0.1) == 0.0
    # second-order zero: length about 4 sqrt(delta)
    assert sublevel_measure(rho, np.array([1, 0, -1]) / S2, 0.01) == pytest.approx(0.4, rel=0.02)
    # first-order zero: length about 2 sqrt(2) delta
    g0 = eval_curve(cur, 0.0)[0]
    assert sublevel_measure(pi, g0, 0.01) == pytest.approx(0.0283, rel=0.02)


def test_sublevel_zero_vector(cur):
    with pytest.raises(DegenerateInputError):
        sublevel_measure(ProjectionFamily(Family.LINE, cur), [0, 0, 0], 0.1)


def test_sublevel_grid_converges(cur):
    r = sublevel_measure_detail(ProjectionFamily(Family.LINE, cur),
                                np.array([1, 0, -1]) / S2, 2 ** -10, 256)
    assert r.converged and r.hits >= 256


def test_sublevel_universal_and_first_order_bounds(cur):
    rho = ProjectionFamily(Family.LINE, cur)
    pi = ProjectionFamily(Family.PLANE, cur)
    rng = np.random.default_rng(5)
    xs = [unit(rng.normal(size=3)) * rng.uniform(0.2, 1.0) for _ in range(4)]
    xs.append(np.array([1.0, 0.0, -1.0]) / S2)
    for x in xs:
        xn = np.linalg.norm(x)
        K = sublevel_measure(rho, x, 2 ** -6) / math.sqrt(2 ** -6 / xn)
        Kp = sublevel_measure(pi, x, 2 ** -6) / (2 ** -6 / xn)
        for k in (8, 10, 12):
            d = 2.0 ** -k
            assert sublevel_measure(rho, x, d) <= 1.2 * K * math.sqrt(d / xn) + 1e-12
            assert sublevel_measure(pi, x, d) <= 1.2 * Kp * d / xn + 1e-12


def test_vec3_rejects_nan():
    with pytest.raises(DomainError):
        vec3(0.0, float("nan"), 1.0)
    assert np.linalg.norm(unit([3, 4, 0])) == pytest.approx(1.0, abs=1e-12)
