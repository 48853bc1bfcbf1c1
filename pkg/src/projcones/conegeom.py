"""Graph-cone coordinates for a curve patch, the slice difference d_h, its
special points, and the two-cones covering algorithm.

All work happens in cone coordinates y = M x, where M is orthogonal and
chosen so the patch reads {(t, h f(t/h), h) : h >= 0, t/h in [u_min, u_max]}
with f'' > 0. Covers are mapped back to world coordinates on output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Chebyshev

from .covers import BallCover
from .errors import BranchError, DegenerateInputError, DomainError, PreconditionError
from .geom3 import DirectionCurve

__all__ = [
    "GraphCone", "default_graph_cone", "graph_cone_from_curve", "ConeShift",
    "slice_interval", "slice_difference", "SpecialPoints", "special_points",
    "DegenerateShiftSignal", "graph_intersection_cover", "IntersectionCover",
    "TwoConesResult", "two_cones_cover", "kappa_of", "tau_of", "write_cover_dump",
    "DEFAULT_SLAB_C",
]

DEFAULT_SLAB_C = 4.0


def kappa_of(eps: float) -> float:
    return eps


def tau_of(eps: float) -> float:
    return 4.0 * eps + 0.01


class DegenerateShiftSignal(BranchError):
    """|d| and |d'| are both small somewhere: use the single-interval branch."""


# ---------------------------------------------------------------- graph cone

@dataclass(frozen=True)
class GraphCone:
    """Cone patch {(t, h f(t/h), h)} in cone coordinates y = M x.

    f is strictly convex on [u_min, u_max]; outside that interval it is
    continued by its second-order Taylor polynomial at the nearer endpoint,
    which keeps f' increasing. The continuation is only used for slack
    computations, never for ball centres.
    """

    f: Callable[[np.ndarray], np.ndarray]
    fp: Callable[[np.ndarray], np.ndarray]
    fpp: Callable[[np.ndarray], np.ndarray]
    u_min: float
    u_max: float
    M: np.ndarray = field(default_factory=lambda: np.eye(3))
    curve: Optional[DirectionCurve] = None
    J: Optional[Tuple[float, float]] = None
    source: str = "explicit"
    eta: float = field(init=False)
    L: float = field(init=False)
    lam_max: float = field(init=False)

    def __post_init__(self):
        if not self.u_max > self.u_min:
            raise DomainError("empty u-interval")
        u = np.linspace(self.u_min, self.u_max, 2001)
        fpp = self.fpp(u)
        eta = float(fpp.min())
        if eta <= 0:
            raise DegenerateInputError(f"f'' is not positive on I (min {eta:.3g})")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "L", float(np.abs(self.fp(u)).max()))
        lam = np.sqrt(u ** 2 + self.f(u) ** 2 + 1.0)
        object.__setattr__(self, "lam_max", float(lam.max()))
        M = np.asarray(self.M, dtype=float)
        if not np.allclose(M @ M.T, np.eye(3), atol=1e-12):
            raise DomainError("M must be orthogonal")
        object.__setattr__(self, "M", M)

    @property
    def I(self) -> Tuple[float, float]:
        return (self.u_min, self.u_max)

    def _split(self, u):
        u = np.asarray(u, dtype=float)
        lo, hi = self.u_min, self.u_max
        return u, np.clip(u, lo, hi)

    def fe(self, u):
        u, uc = self._split(u)
        du = u - uc
        return self.f(uc) + self.fp(uc) * du + 0.5 * self.fpp(uc) * du * du

    def fpe(self, u):
        u, uc = self._split(u)
        return self.fp(uc) + self.fpp(uc) * (u - uc)

    def fppe(self, u):
        _, uc = self._split(u)
        return self.fpp(uc)

    def slope_h_bound(self, margin: float) -> float:
        """max |f(u) - u f'(u)| over I widened by ``margin``."""
        u = np.linspace(self.u_min - margin, self.u_max + margin, 2001)
        return float(np.abs(self.fe(u) - u * self.fpe(u)).max())

    def lip_bound(self, margin: float) -> float:
        u = np.array([self.u_min - margin, self.u_max + margin])
        return float(np.abs(self.fpe(u)).max())

    def to_world(self, y):
        return np.asarray(y, dtype=float) @ self.M

    def to_cone(self, x):
        return np.asarray(x, dtype=float) @ self.M.T

    def point(self, t, h):
        """Cone-coordinate point (t, h f(t/h), h); t/h must lie in I."""
        t, h = np.asarray(t, float), np.asarray(h, float)
        return np.stack(np.broadcast_arrays(t, h * self.f(t / h), h), axis=-1)


def _circle_f(u):
    return -np.sqrt(1.0 - u * u)


def _circle_fp(u):
    return u / np.sqrt(1.0 - u * u)


def _circle_fpp(u):
    return (1.0 - u * u) ** -1.5


def default_graph_cone() -> GraphCone:
    """f(u) = -sqrt(1-u^2) on [-1/2, 1/2]: the special curve on J=[4pi/3, 5pi/3]."""
    from .geom3 import special_curve
    J = (4 * math.pi / 3, 5 * math.pi / 3)
    return GraphCone(_circle_f, _circle_fp, _circle_fpp, -0.5, 0.5, np.eye(3),
                     special_curve((0.0, 2 * math.pi)), J, "closed-form")


def _rot_z(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def graph_cone_from_curve(curve: DirectionCurve, J: Sequence[float],
                          samples: int = 2001, cheb_deg: int = 64) -> GraphCone:
    """Write the cone over gamma(J) as a graph cone.

    Steps: reflect z if the patch is in the lower hemisphere; project to the
    plane z=1 (lambda = gamma/gamma_3); rotate so lambda' points along +x at
    the middle of J; invert u = lambda_1(theta); reflect y if f'' < 0.
    """
    J = (float(J[0]), float(J[1]))
    sub = curve.restrict(J)
    th = np.linspace(J[0], J[1], samples)
    g, g1, g2 = sub.evaluate(th)
    g3 = g[:, 2]
    if np.any(np.abs(g3) < 1e-3) or (g3.min() < 0 < g3.max()):
        raise DegenerateInputError("gamma_3 vanishes on J: the patch is not in one hemisphere")
    zflip = 1.0 if g3.min() > 0 else -1.0
    Z = np.diag([1.0, 1.0, zflip])
    g, g1, g2 = g @ Z, g1 @ Z, g2 @ Z
    g3, d3, dd3 = g[:, 2], g1[:, 2], g2[:, 2]
    lam = g / g3[:, None]
    dlam = (g1 - lam * d3[:, None]) / g3[:, None]
    ddlam = (g2 - 2 * dlam * d3[:, None] - lam * dd3[:, None]) / g3[:, None]
    # gamma''.(gamma x gamma') = gamma_3^3 lambda''.(lambda x lambda')
    lhs = np.einsum("ij,ij->i", g2, np.cross(g, g1))
    rhs = g3 ** 3 * np.einsum("ij,ij->i", ddlam, np.cross(lam, dlam))
    if not np.allclose(lhs, rhs, atol=1e-9, rtol=1e-7):
        raise DomainError("supplied derivatives are inconsistent with gamma")
    if np.min(np.abs(lhs)) < 1e-9:
        raise DegenerateInputError("lambda'' vanishes on J (curve is degenerate)")
    mid = samples // 2
    phi = math.atan2(dlam[mid, 1], dlam[mid, 0])
    R = _rot_z(-phi)
    lam_r = lam @ R.T
    dlam_r = dlam @ R.T
    ddlam_r = ddlam @ R.T
    x1, dx1 = lam_r[:, 0], dlam_r[:, 0]
    if np.min(dx1) <= 1e-9:
        raise DomainError("lambda' turns vertical on J; shrink J")
    fpp_s = (ddlam_r[:, 1] * dx1 - dlam_r[:, 1] * ddlam_r[:, 0]) / dx1 ** 3
    yflip = 1.0 if fpp_s[mid] > 0 else -1.0
    if np.any(fpp_s * yflip <= 0):
        raise DegenerateInputError("f'' changes sign on J; shrink J")
    M = np.diag([1.0, yflip, 1.0]) @ R @ Z
    u_min, u_max = float(x1[0]), float(x1[-1])

    if curve.kind == "special":
        # lambda(J) is an arc of the unit circle; after the rotation it is
        # centred on the -y axis, so f is the lower semicircle
        fc, fpc, fppc = _circle_f, _circle_fp, _circle_fpp
        if yflip < 0:
            raise DomainError("unexpected orientation for the special curve")
        return GraphCone(fc, fpc, fppc, u_min, u_max, M, curve, J, "closed-form")

    def lam_at(thv):
        gg, _, _ = sub.evaluate(thv)
        gg = gg @ Z
        return (gg / gg[:, 2:3]) @ R.T

    def theta_of(u):
        lo = np.full_like(u, J[0])
        hi = np.full_like(u, J[1])
        for _ in range(64):
            m = 0.5 * (lo + hi)
            below = lam_at(m)[:, 0] < u
            lo = np.where(below, m, lo)
            hi = np.where(below, hi, m)
        return 0.5 * (lo + hi)

    nodes = np.cos(np.pi * (np.arange(cheb_deg + 1) + 0.5) / (cheb_deg + 1))
    un = u_min + (nodes + 1) * (u_max - u_min) / 2
    fn = yflip * lam_at(theta_of(un))[:, 1]
    cheb = Chebyshev.fit(un, fn, cheb_deg, domain=[u_min, u_max])
    test_u = np.linspace(u_min, u_max, 257)
    err = float(np.max(np.abs(cheb(test_u) - yflip * lam_at(theta_of(test_u))[:, 1])))
    if err > 1e-9:
        raise DomainError(f"graph interpolation error {err:.2g}; shrink J")
    d1, d2 = cheb.deriv(1), cheb.deriv(2)
    return GraphCone(lambda u: cheb(u), lambda u: d1(u), lambda u: d2(u),
                     u_min, u_max, M, curve, J, f"chebyshev(err={err:.1e})")


# ---------------------------------------------------------------- shifts, d_h

@dataclass(frozen=True)
class ConeShift:
    """Translation by p written as (a, b, c) = (-p_z, -p_x, p_y) in cone
    coordinates; the translated patch is {(t, (h+a) f((t+b)/(h+a)) + c, h)}."""

    a: float
    b: float
    c: float

    @classmethod
    def from_point(cls, p_cone) -> "ConeShift":
        p = np.asarray(p_cone, dtype=float)
        return cls(-float(p[2]), -float(p[0]), float(p[1]))

    @property
    def p(self) -> np.ndarray:
        return np.array([-self.b, self.c, -self.a])

    @property
    def ratio(self) -> float:
        return self.b / self.a if self.a != 0 else math.copysign(math.inf, self.b or 1.0)


def slice_interval(cone: GraphCone, shift: ConeShift, h):
    """I_h = [max(h u_min, (h+a) u_min - b), min(h u_max, (h+a) u_max - b)]."""
    h = np.asarray(h, dtype=float)
    hp = h + shift.a
    lo = np.maximum(h * cone.u_min, hp * cone.u_min - shift.b)
    hi = np.minimum(h * cone.u_max, hp * cone.u_max - shift.b)
    return lo, hi


def _d(cone: GraphCone, shift: ConeShift, h, t):
    hp = h + shift.a
    return h * cone.fe(t / h) - (hp * cone.fe((t + shift.b) / hp) + shift.c)


def _dp(cone: GraphCone, shift: ConeShift, h, t):
    return cone.fpe(t / h) - cone.fpe((t + shift.b) / (h + shift.a))


def slice_difference(cone: GraphCone, shift: ConeShift, h: float, t: float,
                     delta: float | None = None, eps: float | None = None,
                     tol: float = 1e-12) -> Tuple[float, float]:
    """(d_h(t), d_h'(t)); t must lie in I_h and h, h+a must be positive
    (at least delta^eps when both are given)."""
    floor = delta ** eps if (delta is not None and eps is not None) else 0.0
    if min(h, h + shift.a) <= 0 or min(h, h + shift.a) < floor:
        raise DomainError(f"height h={h} violates min(h, h+a) >= {floor:.3g}")
    lo, hi = slice_interval(cone, shift, h)
    if not (lo - tol <= t <= hi + tol):
        raise DomainError(f"t={t} outside I_h=[{float(lo):.6g}, {float(hi):.6g}]")
    return float(_d(cone, shift, h, t)), float(_dp(cone, shift, h, t))


def _bisect(fun, lo, hi, target, iters):
    """Vectorised bisection for an increasing ``fun`` with fun(lo) < target <= fun(hi)."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(iters):
        m = 0.5 * (lo + hi)
        below = fun(m) < target
        lo = np.where(below, m, lo)
        hi = np.where(below, hi, m)
    return 0.5 * (lo + hi)


def _iters_for(width: float, tol: float) -> int:
    return max(1, int(math.ceil(math.log2(max(width, tol) / tol))) + 1)


def _pieces(shift: ConeShift, h, lo, hi):
    """Split [lo, hi] at t* = h b/a into pieces where d is monotone.

    Returns (left_lo, left_hi, right_lo, right_hi, sign_left, sign_right);
    sign is +1 where d increases. Empty pieces have lo > hi.
    """
    a, b = shift.a, shift.b
    if a == 0:
        # d' has the sign of -b everywhere; treat t* as +inf (b<0) or -inf (b>0)
        inc = -1.0 if b > 0 else 1.0
        inf = np.full_like(h, np.inf)
        if inc > 0:
            return lo, hi, inf, -inf, inc, -inc
        return inf, -inf, lo, hi, -inc, inc
    ts = h * b / a
    left_hi = np.minimum(hi, ts)
    right_lo = np.maximum(lo, ts)
    # d' >= 0  <=>  a t >= h b
    sl = -1.0 if a > 0 else 1.0
    return lo, left_hi, right_lo, hi, sl, -sl


@dataclass(frozen=True)
class SpecialPoints:
    s1: float
    s2: float
    kinds: Tuple[str, str]
    t_star: float
    gaps: Tuple[float, float]


def _zero_on(cone, shift, h, lo, hi, sign, tol):
    """Zero of d on [lo, hi] (d monotone with the given sign) or None."""
    if not lo <= hi:
        return None
    g = lambda t: sign * _d(cone, shift, h, t)  # noqa: E731
    glo, ghi = float(g(lo)), float(g(hi))
    if glo > 0 or ghi < 0:
        return None
    if glo == 0:
        return float(lo)
    return float(_bisect(g, lo, hi, 0.0, _iters_for(hi - lo, tol)))


def special_points(cone: GraphCone, shift: ConeShift, h: float, delta: float,
                   tau: float, scan: int = 2049) -> SpecialPoints:
    """Special points s1 <= s2 of the slice at height h.

    s1 is the zero of d_h left of h b/a if there is one, else the left end of
    I_h; s2 likewise on the right. Raises DegenerateShiftSignal when a scan
    of I_h finds |d| <= delta^tau together with |d'| <= delta^tau.
    """
    lo, hi = (float(v) for v in slice_interval(cone, shift, h))
    if not lo <= hi:
        raise DomainError(f"I_h is empty at h={h}")
    if min(h, h + shift.a) <= 0:
        raise DomainError("heights must be positive for both patches")
    thr = delta ** tau
    ts = np.linspace(lo, hi, scan)
    if shift.a != 0 and lo <= h * shift.b / shift.a <= hi:
        ts = np.append(ts, h * shift.b / shift.a)
    bad = (np.abs(_d(cone, shift, h, ts)) <= thr) & (np.abs(_dp(cone, shift, h, ts)) <= thr)
    if np.any(bad):
        raise DegenerateShiftSignal(f"transversality fails at h={h}, t={ts[bad][0]:.6g}")
    ll, lh, rl, rh, sl, sr = (np.asarray(v, dtype=float) for v in
                              _pieces(shift, np.float64(h), np.float64(lo), np.float64(hi)))
    tol = delta ** 2
    z1 = _zero_on(cone, shift, h, float(ll), float(lh), float(sl), tol)
    z2 = _zero_on(cone, shift, h, float(rl), float(rh), float(sr), tol)
    if z1 is not None and z2 is not None and z1 == z2:
        z2 = None
    s1, k1 = (z1, "zero") if z1 is not None else (lo, "endpoint")
    s2, k2 = (z2, "zero") if z2 is not None else (hi, "endpoint")
    t_star = h * shift.ratio if shift.a != 0 else shift.ratio
    gaps = tuple(abs(s - t_star) if k == "zero" else math.inf
                 for s, k in ((s1, k1), (s2, k2)))
    return SpecialPoints(s1, s2, (k1, k2), float(t_star), gaps)


# ------------------------------------------------------ graph comparison fact

@dataclass(frozen=True)
class IntersectionCover:
    intervals: List[Tuple[float, float]]
    balls: BallCover
    threshold: float


def graph_intersection_cover(g1, g2, delta: float, L: float, step: float | None = None
                             ) -> IntersectionCover:
    """Cover Gamma_1(delta) & Gamma_2(delta) for L-Lipschitz graphs.

    ``g1``, ``g2`` are (callable, (lo, hi)) pairs. The set
    {t in I1 & I2 : |g1 - g2| <= 6 L delta} is located on a grid; a grid
    point is kept when the bound could hold anywhere in its cell, so the
    returned intervals contain the true set. Discs of radius 6 L delta plus
    the cell slack are placed at the kept grid points.
    """
    (f1, (a1, b1)), (f2, (a2, b2)) = g1, g2
    if L < 1:
        raise DomainError("the Lipschitz bound must be at least 1")
    lo, hi = max(a1, a2), min(b1, b2)
    if lo > hi:
        raise DomainError("graph domains are disjoint")
    thr = 6.0 * L * delta
    if step is None:
        step = delta / 4.0
    n = max(1, int(math.ceil((hi - lo) / step)))
    t = np.linspace(lo, hi, n + 1)
    h = (hi - lo) / n if n else 0.0
    diff = np.abs(f1(t) - f2(t))
    keep = diff <= thr + 2 * L * h / 2
    intervals: List[Tuple[float, float]] = []
    idx = np.flatnonzero(keep)
    if idx.size:
        breaks = np.flatnonzero(np.diff(idx) > 1)
        starts = np.r_[idx[0], idx[breaks + 1]]
        ends = np.r_[idx[breaks], idx[-1]]
        for s, e in zip(starts, ends):
            intervals.append((max(lo, t[s] - h / 2), min(hi, t[e] + h / 2)))
    tk = t[keep]
    centres = np.stack([tk, f1(tk)], axis=1) if tk.size else np.empty((0, 2))
    rad = thr + (h / 2) * math.sqrt(1 + L * L)
    balls = BallCover(centres, np.full(len(tk), rad), None, {"threshold": thr})
    return IntersectionCover(intervals, balls, thr)


# ------------------------------------------------------- two-cones covering

@dataclass
class TwoConesResult:
    cover: BallCover
    case: str
    cap_balls: BallCover
    slab_h: np.ndarray
    kinds: List[str]
    meta: dict = field(default_factory=dict)

    @property
    def all_balls(self) -> BallCover:
        c = np.vstack([self.cap_balls.centres, self.cover.centres])
        r = np.r_[self.cap_balls.radii, self.cover.radii]
        return BallCover(c, r)


def _slab_balls(cone: GraphCone, shift: ConeShift, hc: np.ndarray, w: float,
                delta: float, tol: float):
    """Balls covering C(delta) & (C+p)(delta) within the slabs [hc -+ w/2].

    For every height h of a slab, the slice of the intersection lies within
    6 L A of g1({t in I_h : |d_h| <= 6 L A}), A = delta (1 + max|lambda|).
    Moving from h to the slab centre changes d by at most 2 M w/2 and I_h by
    U w/2, so two exact level-set intervals of d_{hc} (one per monotone
    piece) bound everything; their ends give the ball radii.
    Returns arrays (centres, radii, slab index, kind) in cone coordinates.
    """
    A = delta * (1.0 + cone.lam_max)
    LF = max(1.0, cone.L)
    U = max(abs(cone.u_min), abs(cone.u_max))
    hmin = float(np.min(np.minimum(hc, hc + shift.a))) - w / 2
    margin_u = U * w / hmin + 1e-12
    Mh = cone.slope_h_bound(2 * margin_u + 1e-9)
    Le = max(cone.lip_bound(2 * margin_u + 1e-9), 1e-300)
    T = 6.0 * LF * A + Mh * w
    Rpt = 6.0 * LF * A + (w / 2) * math.sqrt(1.0 + Mh * Mh)
    lo0, hi0 = slice_interval(cone, shift, hc)
    lo = lo0 - U * w / 2
    hi = hi0 + U * w / 2
    nonempty = lo <= hi
    ll, lh, rl, rh, sl, sr = _pieces(shift, hc, lo, hi)
    out_c, out_r, out_i, out_k = [], [], [], []
    # true patch interval for centres: h I intersected with I_h when possible
    plo = np.where(lo0 <= hi0, lo0, hc * cone.u_min)
    phi = np.where(lo0 <= hi0, hi0, hc * cone.u_max)
    for plo_, phi_, sign in ((ll, lh, sl), (rl, rh, sr)):
        ok = nonempty & (plo_ <= phi_)
        if not np.any(ok):
            continue
        idx = np.flatnonzero(ok)
        h = hc[idx]
        a_, b_ = np.asarray(plo_)[idx], np.asarray(phi_)[idx]
        g = lambda t, h=h: sign * _d(cone, shift, h, t)  # noqa: E731
        ga, gb = g(a_), g(b_)
        live = (gb >= -T) & (ga <= T)
        if not np.any(live):
            continue
        idx, h, a_, b_, ga, gb = (v[live] for v in (idx, h, a_, b_, ga, gb))
        g = lambda t, h=h: sign * _d(cone, shift, h, t)  # noqa: E731
        it = _iters_for(float(np.max(b_ - a_)), tol)
        alpha = np.where(ga >= -T, a_, _bisect(g, a_, b_, -T, it))
        beta = np.where(gb <= T, b_, _bisect(g, a_, b_, T, it))
        has_zero = (ga <= 0) & (gb >= 0)
        z = np.where(has_zero, _bisect(g, a_, b_, 0.0, it), np.nan)
        pl, ph = plo[idx], phi[idx]
        # special point: the zero, else the I_h endpoint nearest the interval
        end = np.where(np.abs(pl - 0.5 * (alpha + beta)) <= np.abs(ph - 0.5 * (alpha + beta)),
                       pl, ph)
        s = np.where(has_zero, z, end)
        s = np.clip(s, hc[idx] * cone.u_min, hc[idx] * cone.u_max)
        span = np.maximum(np.abs(alpha - s), np.abs(beta - s))
        rad = span * math.sqrt(1.0 + Le * Le) + Rpt + tol
        out_c.append(cone.point(s, h))
        out_r.append(rad)
        out_i.append(idx)
        out_k.append(np.where(has_zero, "zero", "endpoint"))
    if not out_c:
        return np.empty((0, 3)), np.empty(0), np.empty(0, dtype=int), np.empty(0, dtype=str)
    C = np.vstack(out_c)
    R = np.concatenate(out_r)
    I = np.concatenate(out_i)
    K = np.concatenate(out_k)
    order = np.lexsort((np.arange(len(I)), I))
    return C[order], R[order], I[order], K[order]


def _degeneracy_scan(cone, shift, heights, thr, nt=257):
    """First (h, t) with |d| <= thr and |d'| <= thr, or None."""
    lo, hi = slice_interval(cone, shift, heights)
    ok = lo <= hi
    h = heights[ok]
    if h.size == 0:
        return None
    s = np.linspace(0.0, 1.0, nt)
    T = lo[ok, None] + (hi[ok] - lo[ok])[:, None] * s[None, :]
    if shift.a != 0:
        ts = h * shift.b / shift.a
        ts = np.clip(ts, lo[ok], hi[ok])
        T = np.concatenate([T, ts[:, None]], axis=1)
    H = np.broadcast_to(h[:, None], T.shape)
    bad = (np.abs(_d(cone, shift, H, T)) <= thr) & (np.abs(_dp(cone, shift, H, T)) <= thr)
    if not np.any(bad):
        return None
    i, j = np.argwhere(bad)[0]
    return float(H[i, j]), float(T[i, j])


def two_cones_cover(curve: DirectionCurve | None, J, p, delta: float, eps: float,
                    tau: float, *, cone: GraphCone | None = None,
                    slab_C: float = DEFAULT_SLAB_C, height_floor: float | None = None,
                    band_K: float = 1.0, scan_heights: int = 1024,
                    check_tau: bool = True) -> TwoConesResult:
    """Cover C(delta) & (C(delta) + p) & B(0,1) for the cone over gamma(J).

    Two cap balls take care of heights where min(h, h+a) < floor (default
    delta^eps). If a scan finds a height with |d| and |d'| both at most
    delta^tau, the single-interval branch (case "b") is used: one ball per
    height band of width delta^(tau/4), centred on t(h) = h b/a (or the
    endpoint variant). Otherwise (case "a") each slab of width
    delta^(1/2 + 2 tau + C eps) gets at most two balls at its special
    points. Ball radii are computed from the exact level sets of d, so the
    cover is valid for every delta; the fitted constants are reported in
    ``meta``.
    """
    if cone is None:
        if curve is None:
            raise DomainError("need a curve or a graph cone")
        cone = graph_cone_from_curve(curve, J)
    p = np.asarray(p, dtype=float)
    pn = float(np.linalg.norm(p))
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if pn < delta ** eps:
        raise PreconditionError(f"|p|={pn:.4g} < delta^eps={delta ** eps:.4g}")
    if pn > 1 + 1e-12:
        raise PreconditionError(f"|p|={pn:.4g} > 1")
    if check_tau and not (tau_of(eps) - 1e-12 <= tau < 0.5):
        raise PreconditionError(f"tau={tau} outside [tau(eps)={tau_of(eps):.4g}, 1/2)")
    shift = ConeShift.from_point(cone.to_cone(p))
    a = shift.a
    floor = delta ** eps if height_floor is None else float(height_floor)
    if floor <= 2 * delta:
        raise DomainError("height floor must exceed 2 delta")

    cap_r = cone.lam_max * (floor + delta) + delta
    caps = BallCover(np.vstack([np.zeros(3), p]), np.array([cap_r, cap_r]), None,
                     {"kind": "caps"})

    w = delta ** (0.5 + 2 * tau + slab_C * eps)
    h_lo = max(floor, floor - a)
    h_hi = 1.0
    meta = {"delta": delta, "eps": eps, "tau": tau, "kappa": kappa_of(eps),
            "slab_C": slab_C, "slab_width": w, "height_floor": floor,
            "a": a, "b": shift.b, "c": shift.c, "cap_radius": cap_r,
            "cone_source": cone.source}
    empty = BallCover(np.empty((0, 3)), np.empty(0))
    if h_lo >= h_hi:
        meta.update(K_fit=0.0, slabs=0, degenerate_at=None)
        return TwoConesResult(empty, "a", caps, np.empty(0), [], meta)

    n_slabs = int(math.ceil((h_hi - h_lo) / w))
    hc = h_lo + (np.arange(n_slabs) + 0.5) * w

    scan_idx = np.unique(np.linspace(0, n_slabs - 1, min(n_slabs, scan_heights)).astype(int))
    deg = _degeneracy_scan(cone, shift, hc[scan_idx], delta ** tau)
    meta["degenerate_at"] = deg
    case = "a" if deg is None else "b"

    tol = min(delta ** 2, 1e-9)
    C, R, I, K = _slab_balls(cone, shift, hc, w, delta, tol)
    C_w = cone.to_world(C) if len(C) else C
    near = np.linalg.norm(C_w, axis=1) - R <= 1.0 if len(C) else np.zeros(0, bool)
    C, C_w, R, I, K = C[near], C_w[near], R[near], I[near], K[near]
    meta["slabs"] = n_slabs

    if case == "a":
        cover = BallCover(C_w, R, None, {"case": "a"})
        meta["K_fit"] = float(R.max() / delta ** 0.5) if len(R) else 0.0
        meta["pattern"] = "transversal"
        return TwoConesResult(cover, "a", caps, hc[I], list(K), meta)

    # single-interval branch
    if a == 0:
        meta["pattern"] = "unmatched"
        t_of = None
    else:
        r = shift.b / a
        if cone.u_min <= r <= cone.u_max:
            t_of = lambda h: h * r  # noqa: E731
            meta["pattern"] = "interior"
        elif r > cone.u_max:
            t_of = lambda h: (h + a) * cone.u_max - shift.b  # noqa: E731
            meta["pattern"] = "endpoint-max"
        else:
            t_of = lambda h: (h + a) * cone.u_min - shift.b  # noqa: E731
            meta["pattern"] = "endpoint-min"
    wb = delta ** (tau / 4)
    nb = int(math.ceil((h_hi - h_lo) / wb))
    band_of = np.minimum(((hc[I] - h_lo) // wb).astype(int), nb - 1)
    centres, radii, bh = [], [], []
    base = band_K * wb
    for j in range(nb):
        sel = band_of == j
        if not np.any(sel):
            continue
        h = h_lo + (j + 0.5) * wb
        if t_of is not None:
            t = float(np.clip(t_of(h), h * cone.u_min, h * cone.u_max))
            cen = cone.to_world(cone.point(t, h))
        else:
            k = np.flatnonzero(sel)[len(np.flatnonzero(sel)) // 2]
            cen = C_w[k]
        need = float(np.max(np.linalg.norm(C_w[sel] - cen, axis=1) + R[sel]))
        centres.append(cen)
        radii.append(max(base, need))
        bh.append(h)
    if centres:
        cover = BallCover(np.vstack(centres), np.array(radii), None, {"case": "b"})
        meta["K_fit"] = float(max(radii) / wb)
    else:
        cover = empty
        meta["K_fit"] = 0.0
    meta["bands"] = nb
    return TwoConesResult(cover, "b", caps, np.array(bh), ["band"] * len(bh), meta)


def write_cover_dump(result: TwoConesResult, path) -> None:
    """Rows ``cx cy cz radius slab_h case_tag``; caps carry slab_h = nan."""
    with open(path, "w") as fh:
        for c, r in zip(result.cap_balls.centres, result.cap_balls.radii):
            fh.write(f"{c[0]!r} {c[1]!r} {c[2]!r} {r!r} nan cap\n")
        for c, r, h in zip(result.cover.centres, result.cover.radii, result.slab_h):
            fh.write(f"{c[0]!r} {c[1]!r} {c[2]!r} {r!r} {float(h)!r} {result.case}\n")
