"""Intersections of three translates of the right circular cone.

C = {x^2 + y^2 = z^2}. The set C(d) ∩ (p + C(d)) ∩ (q + C(d)) ∩ B(0,1) is
covered by neighbourhoods of at most two lines on C through the origin.
Depending on where p and q are, the cover comes from a tangency argument
(p or q close to C), a separation argument (p, q nearly collinear), or by
intersecting the two radical planes and cutting the line with C.

Q(x) = x1^2 + x2^2 - x3^2 is the quadratic form of C; Q(x) - Q(x - p) is an
affine function of x whose zero set is the radical plane V_p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import BranchError, DegenerateInputError, DomainError, NoLineError, PreconditionError

__all__ = [
    "Plane3", "ConeLine", "SeparationReport", "PlanePairLine", "LineConeCover",
    "ThreeConesResult", "cone_distance", "nearest_cone_line", "radical_plane",
    "tangent_line_cover", "separation_test", "plane_pair_line", "line_cone_cover",
    "three_cones_cover", "DEFAULT_R", "DEFAULT_C", "DEFAULT_TAU",
]

DEFAULT_R = 8.0
DEFAULT_C = 0.15
DEFAULT_TAU = 0.6
SQRT2 = math.sqrt(2.0)
_SIG = np.array([1.0, 1.0, -1.0])


def _v(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise DomainError(f"expected a finite 3-vector, got {x!r}")
    return a


def _bar(p: np.ndarray) -> np.ndarray:
    return p * _SIG


def cone_distance(x) -> np.ndarray:
    """Euclidean distance to C, via the meridian half-plane."""
    x = np.asarray(x, dtype=float)
    return np.abs(np.hypot(x[..., 0], x[..., 1]) - np.abs(x[..., 2])) / SQRT2


@dataclass(frozen=True)
class Plane3:
    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        n = _v(self.normal)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise DomainError("plane normal must have unit norm")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "point", _v(self.point))

    @property
    def offset(self) -> float:
        """The plane is {x : x . normal = offset}."""
        return float(self.point @ self.normal)

    def distance(self, x) -> np.ndarray:
        return np.abs(np.asarray(x, dtype=float) @ self.normal - self.offset)

    def disc(self) -> Tuple[np.ndarray, float]:
        """Centre and radius of the plane's section of B(0,1)."""
        o = self.offset
        return o * self.normal, math.sqrt(max(1.0 - o * o, 0.0))


@dataclass(frozen=True)
class ConeLine:
    """A line on C through the origin, stored with direction (cos phi, sin phi, 1)/sqrt 2."""

    direction: np.ndarray

    def __post_init__(self):
        d = _v(self.direction)
        if abs(d[0] ** 2 + d[1] ** 2 - d[2] ** 2) > 1e-12 or abs(np.linalg.norm(d) - 1) > 1e-12:
            raise DomainError(f"{d} is not a unit vector on the cone")
        if d[2] < 0:
            d = -d
        object.__setattr__(self, "direction", d)

    @classmethod
    def from_angle(cls, phi: float) -> "ConeLine":
        return cls(np.array([math.cos(phi), math.sin(phi), 1.0]) / SQRT2)

    @property
    def phi(self) -> float:
        return math.atan2(self.direction[1], self.direction[0])

    def distance(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        along = x @ self.direction
        sq = np.einsum("...i,...i->...", x, x) - along * along
        return np.sqrt(np.maximum(sq, 0.0))

    def same_as(self, other: "ConeLine", tol: float = 1e-9) -> bool:
        return bool(np.linalg.norm(self.direction - other.direction) <= tol)


def nearest_cone_line(x) -> ConeLine:
    """Cone line closest to x: azimuth of (x1, x2), nappe from the sign of x3.

    The vertex and the z-axis resolve to phi = 0 on the upper nappe.
    """
    x = _v(x)
    phi = math.atan2(x[1], x[0])
    if x[2] < 0:
        phi += math.pi
    return ConeLine.from_angle(phi)


def radical_plane(p) -> Plane3:
    """V_p: the plane through p/2 with normal along (p1, p2, -p3).

    C ∩ (p + C) lies in V_p, and every x in B(0,1) within delta of both C and
    p + C lies within 3 delta/|p| of it.
    """
    p = _v(p)
    if not np.any(p):
        raise DegenerateInputError("p = 0: C and p + C coincide")
    n = _bar(p) / np.linalg.norm(p)
    return Plane3(p / 2.0, n)


def _check_sizes(delta: float, c: float, *vecs):
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if not 0 < c < 1:
        raise DomainError("c must lie in (0, 1)")
    floor = delta ** c
    for name, v in vecs:
        n = float(np.linalg.norm(v))
        if n < floor:
            raise PreconditionError(f"|{name}| = {n:.4g} < delta^c = {floor:.4g}")


@dataclass(frozen=True)
class TangentCover:
    line: ConeLine
    radius: float
    cone_gap: float


def tangent_line_cover(p, delta: float, c: float = DEFAULT_C,
                       near_factor: float = 1.0) -> TangentCover:
    """Cover of C(delta) ∩ (p + C(delta)) for p within delta^(1/4) of C.

    Slice at height t: the circles S(0, |t|) and S(p', |p3 - t|) are nearly
    tangent at the point of the nearest cone line, so the slice intersection
    sits in a small disc there.
    """
    p = _v(p)
    _check_sizes(delta, c, ("p", p))
    gap = float(cone_distance(p))
    if gap > near_factor * delta ** 0.25:
        raise BranchError(f"dist(p, C) = {gap:.4g} > {near_factor:g} delta^(1/4)")
    return TangentCover(nearest_cone_line(p), delta ** c, gap)


def _dist_to_span(p: np.ndarray, q: np.ndarray) -> float:
    u = q / np.linalg.norm(q)
    return float(np.linalg.norm(p - (p @ u) * u))


def _project_disc(x, centre, normal, radius):
    y = x - ((x - centre) @ normal) * normal
    off = y - centre
    r = np.linalg.norm(off)
    return centre + off * (radius / r) if r > radius else y


def _disc_distance(P: Plane3, Q: Plane3, iters: int = 4000) -> float:
    """Distance between the two plane sections of B(0,1).

    Alternating projections between convex sets converge to a closest pair.
    """
    cp, rp = P.disc()
    cq, rq = Q.disc()
    x = cp.copy()
    best = math.inf
    for _ in range(iters):
        y = _project_disc(x, cq, Q.normal, rq)
        x_new = _project_disc(y, cp, P.normal, rp)
        best = min(best, float(np.linalg.norm(x_new - y)))
        if np.linalg.norm(x_new - x) < 1e-15:
            break
        x = x_new
    return best


def _disc_gap_lower_bound(P: Plane3, Q: Plane3) -> float:
    """Lower bound from the spread of x . n_Q over the section of V_P."""
    cp, rp = P.disc()
    cos = float(P.normal @ Q.normal)
    spread = rp * math.sqrt(max(1.0 - cos * cos, 0.0))
    centre = float(cp @ Q.normal)
    return max(0.0, abs(centre - Q.offset) - spread)


def _slab_gap(P: Plane3, Q: Plane3, a: float, b: float) -> float:
    """Lower bound for dist(x, V_Q) - b over x in B(0,1) within a of V_P.

    With the normals sign-aligned, x . n_Q - o_Q differs from x . n_P - o_P
    by at most |n_P - n_Q| + |o_P - o_Q| on the unit ball.
    """
    sgn = 1.0 if P.normal @ Q.normal >= 0 else -1.0
    nq, oq = sgn * Q.normal, sgn * Q.offset
    return abs(P.offset - oq) - a - float(np.linalg.norm(P.normal - nq)) - b


@dataclass(frozen=True)
class SeparationReport:
    separated: bool
    distance: float
    threshold: float
    lower_bound: float
    xi3_gap: float
    xi3_guard: bool
    exact: bool


def separation_test(p, q, delta: float, c: float = DEFAULT_C, tau: float = DEFAULT_TAU,
                    R: float = DEFAULT_R, near_factor: float = 1.0) -> SeparationReport:
    """Are V_p ∩ B(0,1) and V_q ∩ B(0,1) more than 3 R delta^(1-c) apart?

    For nearly collinear p, q off the cone the planes are nearly parallel
    with offsets differing by about |r - |q|| |1 - 2 xi3^2| / 2, where
    xi = q/|q| and p ≈ r xi. A lower bound of that kind is tried first;
    the exact section-to-section distance is computed only when it is
    inconclusive.
    """
    p, q = _v(p), _v(q)
    _check_sizes(delta, c, ("p", p), ("q", q), ("p - q", p - q))
    near = near_factor * delta ** 0.25
    for name, v in (("p", p), ("q", q)):
        if cone_distance(v) <= near:
            raise BranchError(f"{name} lies within {near_factor:g} delta^(1/4) of C")
    if _dist_to_span(p, q) > delta ** tau:
        raise BranchError("dist(p, span q) exceeds delta^tau")
    xi3 = q[2] / np.linalg.norm(q)
    xi3_gap = float(abs(abs(xi3) - 1 / SQRT2))
    thr = 3.0 * R * delta ** (1.0 - c)
    P, Q = radical_plane(p), radical_plane(q)
    lb = _disc_gap_lower_bound(P, Q)
    if lb > thr:
        return SeparationReport(True, lb, thr, lb, xi3_gap, xi3_gap >= near, False)
    d = _disc_distance(P, Q)
    return SeparationReport(bool(d > thr), d, thr, lb, xi3_gap, xi3_gap >= near, True)


@dataclass(frozen=True)
class PlanePairLine:
    point: np.ndarray
    direction: np.ndarray
    radius: float
    width_bound: float
    sine: float

    def distance(self, x) -> np.ndarray:
        y = np.asarray(x, dtype=float) - self.point
        along = y @ self.direction
        return np.sqrt(np.maximum(np.einsum("...i,...i->...", y, y) - along * along, 0.0))


def _plane_line(P: Plane3, Q: Plane3):
    d = np.cross(P.normal, Q.normal)
    s = float(np.linalg.norm(d))
    if s < 1e-12:
        raise NoLineError("parallel radical planes")
    A = np.stack([P.normal, Q.normal])
    b = np.array([P.offset, Q.offset])
    x0 = A.T @ np.linalg.solve(A @ A.T, b)
    return x0, d / s, s


def plane_pair_line(p, q, delta: float, c: float = DEFAULT_C, tau: float = DEFAULT_TAU,
                    R: float = DEFAULT_R) -> PlanePairLine:
    """V_p ∩ V_q with radius delta^c.

    ``width_bound`` = R delta^(1-c) (1 + 2/s), s the sine of the angle
    between the normals, bounds the distance to the line of any point within
    R delta^(1-c) of both planes.
    """
    p, q = _v(p), _v(q)
    x0, d, s = _plane_line(radical_plane(p), radical_plane(q))
    if _dist_to_span(p, q) < delta ** tau:
        raise BranchError("dist(p, span q) is below delta^tau")
    w = R * delta ** (1.0 - c) * (1.0 + 2.0 / s)
    return PlanePairLine(x0, d, delta ** c, w, s)


@dataclass(frozen=True)
class LineConeCover:
    lines: Tuple[ConeLine, ...]
    radius: float
    roots: Tuple[np.ndarray, ...]
    near_cone: bool
    discriminant: float
    certified_radius: float


def _chord(q, xi, rad):
    b = float(q @ xi)
    disc = b * b - (float(q @ q) - rad * rad)
    if disc < 0:
        return None
    s = math.sqrt(disc)
    return -b - s, -b + s


def _dedupe(lines: List[ConeLine]) -> Tuple[ConeLine, ...]:
    out: List[ConeLine] = []
    for ln in lines:
        if not any(ln.same_as(o) for o in out):
            out.append(ln)
    return tuple(out)


def _near_set(q, xi, tube, samples):
    """Sampled points x' of L ∩ B(0, 1 + tube) with dist(x', C) <= tube.

    Distance to C is 1-Lipschitz along L, so every qualifying point of L is
    within half a step of a returned sample; the half step is returned too.
    """
    ch = _chord(q, xi, 1.0 + tube)
    if ch is None:
        return np.empty((0, 3)), 0.0
    r = np.linspace(ch[0], ch[1], samples)
    half = (ch[1] - ch[0]) / (samples - 1) / 2.0
    pts = q[None, :] + r[:, None] * xi[None, :]
    return pts[cone_distance(pts) <= tube + half], half


def _certify(lines, near, half, tube) -> float:
    """Radius around ``lines`` that contains every point within ``tube`` of
    the near set; infinite if the near set is not covered at all."""
    if len(near) == 0:
        return 0.0
    if not lines:
        return math.inf
    d = np.min([ln.distance(near) for ln in lines], axis=0)
    return float(d.max()) + half + tube


def line_cone_cover(point, direction, delta: float, c: float = DEFAULT_C,
                    tube: Optional[float] = None, near_factor: float = 0.1,
                    samples: int = 8193, target: Optional[float] = None) -> LineConeCover:
    """Cone lines covering L(tube) ∩ C inside B(0,1), L = point + R direction.

    If the direction lies within near_factor * delta^(c/4) of C, L runs
    almost along a cone line and one line is returned: the cone line nearest
    the farthest point of L ∩ B(0, 1 + tube) that is within ``tube`` of C.
    Otherwise Q(point + r direction) = 0 is solved with the quadratic
    formula; the cone lines through its (at most two) roots are returned,
    after dropping roots outside B(0, 1 + tube). A negative discriminant
    means L misses C; the closest approach is kept only if it is within
    ``tube`` of C.

    ``radius`` is delta^(c^2/5); ``certified_radius`` is computed from a
    sampled scan of L and is what the returned lines actually guarantee.
    With ``target`` set, while fewer than two lines are returned and the
    certified radius exceeds the target, the cone line through the worst
    covered point of the scan is added.
    """
    q = _v(point)
    xi = _v(direction)
    if abs(np.linalg.norm(xi) - 1) > 1e-12:
        raise DomainError("direction must be a unit vector")
    tube = delta ** c if tube is None else float(tube)
    radius = delta ** (c * c / 5.0)
    near, half = _near_set(q, xi, tube, samples)

    a = float(xi @ _bar(xi))
    bq = float(xi @ _bar(q))
    cq = float(q @ _bar(q))
    disc = 4 * bq * bq - 4 * a * cq

    def done(lines, roots, near_cone):
        lines = list(lines)
        cert = _certify(lines, near, half, tube)
        while target is not None and cert > target and len(lines) < 2 and len(near):
            if lines:
                d = np.min([ln.distance(near) for ln in lines], axis=0)
                worst = near[int(np.argmax(d))]
            else:
                worst = near[int(np.argmax(np.linalg.norm(near, axis=1)))]
            lines.append(nearest_cone_line(worst))
            cert = _certify(lines, near, half, tube)
        return LineConeCover(tuple(lines), radius, tuple(roots), near_cone, disc, cert)

    if cone_distance(xi) <= near_factor * delta ** (c / 4.0):
        if len(near) == 0:
            return done((), (), True)
        far = near[np.argmax(np.linalg.norm(near, axis=1))]
        return done((nearest_cone_line(far),), (far,), True)

    if disc < 0:
        x = q - (bq / a) * xi
        if cone_distance(x) > tube or np.linalg.norm(x) > 1 + tube:
            return done((), (), False)
        return done((nearest_cone_line(x),), (x,), False)
    sq = math.sqrt(disc)
    rs = sorted({(-2 * bq - sq) / (2 * a), (-2 * bq + sq) / (2 * a)})
    roots = [q + r * xi for r in rs]
    roots = [x for x in roots if np.linalg.norm(x) <= 1 + tube]
    return done(_dedupe([nearest_cone_line(x) for x in roots]), roots, False)


@dataclass(frozen=True)
class ThreeConesResult:
    decision: str                 # "empty" or "lines"
    lines: Tuple[ConeLine, ...]
    radius: float
    branch: str
    nonempty: int
    meta: dict = field(default_factory=dict, compare=False)

    def distance(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if not self.lines:
            return np.full(len(x), np.inf)
        return np.min([ln.distance(x) for ln in self.lines], axis=0)

    def contains(self, x) -> np.ndarray:
        return self.distance(x) <= self.radius


def three_cones_cover(p, q, delta: float, c: float = DEFAULT_C, tau: float = DEFAULT_TAU,
                      R: float = DEFAULT_R, near_factor: float = 0.1) -> ThreeConesResult:
    """Cover C(delta) ∩ (p + C(delta)) ∩ (q + C(delta)) ∩ B(0,1) by at most two
    delta^c-neighbourhoods of cone lines, or certify it empty.

    Branches, in order: p or q within near_factor * delta^(1/4) of C gives
    the tangent cover; nearly collinear p, q with separated radical planes
    gives the empty set, as do collinear pairs whose planes are further
    apart than the two slab widths; otherwise the line V_p ∩ V_q is cut
    with C.
    ``nonempty`` counts the returned lines that carry an exact point of
    C ∩ (p + C) ∩ (q + C) inside B(0,1).
    """
    p, q = _v(p), _v(q)
    _check_sizes(delta, c, ("p", p), ("q", q), ("p - q", p - q))
    for name, v in (("p", p), ("q", q)):
        if np.linalg.norm(v) > 1 + 1e-12:
            raise PreconditionError(f"{name} lies outside B(0,1)")
    rad = delta ** c
    meta = {"R": R, "c": c, "tau": tau, "delta": delta, "near_factor": near_factor,
            "cone_gap_p": float(cone_distance(p)), "cone_gap_q": float(cone_distance(q))}
    near = near_factor * delta ** 0.25
    for name, v in (("p", p), ("q", q)):
        if cone_distance(v) <= near:
            tc = tangent_line_cover(v, delta, c, near_factor)
            return ThreeConesResult("lines", (tc.line,), rad, f"tangent-{name}", 1, meta)

    if _dist_to_span(p, q) <= delta ** tau:
        rep = separation_test(p, q, delta, c, tau, R, near_factor)
        meta.update(separation=rep.distance, separation_threshold=rep.threshold,
                    xi3_gap=rep.xi3_gap, xi3_guard=rep.xi3_guard)
        if rep.separated:
            return ThreeConesResult("empty", (), rad, "separated", 0, meta)
        branch = "collinear-unseparated"
    else:
        branch = "plane-pair"

    P, Q = radical_plane(p), radical_plane(q)
    # the triple set is within 3 delta/|p| of V_p and 3 delta/|q| of V_q
    a = 3 * delta / np.linalg.norm(p)
    b = 3 * delta / np.linalg.norm(q)
    if branch == "collinear-unseparated":
        gap = _slab_gap(P, Q, a, b)
        meta["slab_gap"] = gap
        if gap > 0:
            return ThreeConesResult("empty", (), rad, "separated-width", 0, meta)
    try:
        x0, xi, s = _plane_line(P, Q)
    except NoLineError:
        raise BranchError("nearly collinear p, q with parallel radical planes "
                          "that are not separated at this delta") from None
    # hence within this distance of the line
    width = float(a + (a + b) / s)
    lc = line_cone_cover(x0, xi, delta, c, tube=width + delta, near_factor=near_factor,
                         target=rad)
    meta.update(line_point=x0.tolist(), line_direction=xi.tolist(), sine=s,
                line_width=width, near_cone_direction=lc.near_cone,
                certified_radius=lc.certified_radius,
                certified=bool(lc.certified_radius <= rad))
    if not lc.lines:
        return ThreeConesResult("empty", (), rad, branch, 0, meta)
    exact = sum(1 for x in lc.roots
                if np.linalg.norm(x) <= 1 and cone_distance(x) < 1e-9
                and cone_distance(x - p) < 1e-9 and cone_distance(x - q) < 1e-9)
    return ThreeConesResult("lines", lc.lines, rad, branch, exact, meta)
