"""Diagnostic chain of the main argument, evaluated exactly on atom sets.

Tube systems (per-angle disc or interval covers of projected clouds),
the tube energy computed two ways, the Cauchy-Schwarz lower bound chain,
cone fields and their masses, good sets, heavy pair/triple search with the
Hölder aggregate, and the restricted sublevel measure.

Every inequality is returned as lhs, rhs and the constant that was needed,
never as a bare pass/fail.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from .covers import BallCover
from .errors import BranchError, CoverageError, DomainError, PreconditionError
from .geom3 import DirectionCurve, Family, ProjectionFamily, project
from .measure import WeightedPointCloud

__all__ = [
    "ConeField", "TubeSystem", "ChainRow", "TubeEnergy", "GoodSets", "HeavyTuple",
    "build_tube_system", "tube_energy", "relation_measures", "cone_mass",
    "membership_matrix", "good_sets", "heavy_tuple_search", "restricted_sublevel",
    "extremal_difference",
]


@dataclass(frozen=True)
class ChainRow:
    name: str
    lhs: float
    rhs: float
    delta: float
    constant: float = 1.0

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs


# ---------------------------------------------------------------- cone fields

@dataclass(frozen=True)
class ConeField:
    """Union of lines span(v(theta)), theta on a grid, thickened by ``radius``.

    ``axis`` selects v = gamma or v = b = unit(gamma x gamma'); ``side``
    "plus" keeps only points with nonnegative third coordinate.
    """

    curve: DirectionCurve
    thetas: np.ndarray
    radius: float
    side: str = "two-sided"
    axis: str = "gamma"

    def __post_init__(self):
        th = np.asarray(self.thetas, dtype=float).ravel()
        if th.size == 0:
            raise DomainError("empty theta grid")
        if self.radius <= 0:
            raise DomainError("thickening must be positive")
        if self.side not in ("two-sided", "plus"):
            raise DomainError(f"unknown side {self.side!r}")
        if self.axis not in ("gamma", "b"):
            raise DomainError(f"unknown axis {self.axis!r}")
        object.__setattr__(self, "thetas", th)
        tag = Family.LINE if self.axis == "gamma" else Family.BAD_PLANE
        object.__setattr__(self, "_dirs", ProjectionFamily(tag, self.curve).normal(th))

    @property
    def directions(self) -> np.ndarray:
        return self._dirs

    def with_side(self, side: str) -> "ConeField":
        return ConeField(self.curve, self.thetas, self.radius, side, self.axis)

    def line_distance(self, w, chunk: int = 1 << 14) -> np.ndarray:
        """min over the grid of dist(w, span v(theta))."""
        w = np.atleast_2d(np.asarray(w, dtype=float))
        out = np.empty(len(w))
        D = self._dirs
        for i in range(0, len(w), chunk):
            blk = w[i:i + chunk]
            along = np.abs(blk @ D.T).max(axis=1)
            sq = np.einsum("ij,ij->i", blk, blk) - along * along
            out[i:i + chunk] = np.sqrt(np.maximum(sq, 0.0))
        return out

    def grid_slack(self, w) -> np.ndarray:
        """How far the sampled distance may exceed the distance to the
        continuous family: |w| times half the largest angular gap of v."""
        D = self._dirs
        if len(D) == 1:
            return np.zeros(len(np.atleast_2d(w)))
        # jumps between separate pieces of the angle set are not grid gaps
        dth = np.diff(self.thetas)
        inner = dth <= 1.5 * np.median(dth)
        gap = float(np.max(np.linalg.norm(np.diff(D, axis=0), axis=1)[inner]))
        return np.linalg.norm(np.atleast_2d(w), axis=1) * gap / 2.0

    def contains(self, w) -> np.ndarray:
        w = np.atleast_2d(np.asarray(w, dtype=float))
        ok = self.line_distance(w) <= self.radius
        if self.side == "plus":
            ok &= w[:, 2] >= 0
        return ok


def cone_mass(cloud: WeightedPointCloud, fld: ConeField, y) -> float:
    """mu(y + field)."""
    y = np.asarray(y, dtype=float)
    return math.fsum(cloud.masses[fld.contains(cloud.points - y)])


def membership_matrix(points: np.ndarray, fld: ConeField) -> np.ndarray:
    """M[a, b] = (points[b] - points[a] in field), i.e. points[b] in points[a] + field."""
    n = len(points)
    M = np.zeros((n, n), dtype=bool)
    for a in range(n):
        M[a] = fld.contains(points - points[a])
    return M


# -------------------------------------------------------------- tube systems

@dataclass(frozen=True)
class TubeSystem:
    """Per-angle covers of the projected cloud at scale delta.

    ``covers[i]`` covers the image of the cloud under the projection at
    ``thetas[i]``; ``weights[i]`` is the theta-measure carried by that angle.
    """

    family: ProjectionFamily
    thetas: np.ndarray
    weights: np.ndarray
    covers: Tuple[BallCover, ...]
    delta: float
    sigma: float

    def __post_init__(self):
        if len(self.thetas) != len(self.covers) or len(self.thetas) != len(self.weights):
            raise DomainError("thetas, weights and covers differ in length")

    @property
    def measure(self) -> float:
        return math.fsum(self.weights)


def _project_all(family, theta, pts):
    img = np.asarray(project(family, theta, pts), dtype=float)
    return img[:, None] if img.ndim == 1 else img


def build_tube_system(cloud: WeightedPointCloud, family: ProjectionFamily, thetas,
                      delta: float, sigma: float, weights=None,
                      workers: int = 1) -> TubeSystem:
    """Cover each projected cloud by radius-delta balls at the centres of its
    occupied delta-cells (delta a power of 2, so the cells are dyadic)."""
    k = -math.log2(delta)
    if abs(k - round(k)) > 1e-12 or k < 1:
        raise DomainError("delta must be 2^-k with k >= 1")
    thetas = np.asarray(thetas, dtype=float)
    if weights is None:
        weights = np.full(len(thetas), family.curve.length / len(thetas))

    def one(th):
        img = _project_all(family, th, cloud.points)
        cells = np.unique(np.floor(img / delta).astype(np.int64), axis=0)
        return BallCover((cells + 0.5) * delta, np.full(len(cells), delta), int(round(k)))

    covers = _map(one, thetas, workers)
    return TubeSystem(family, thetas, np.asarray(weights, dtype=float), tuple(covers),
                      delta, sigma)


def _map(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _incidence(img: np.ndarray, cover: BallCover, theta: float) -> sparse.csr_matrix:
    tree = cKDTree(cover.centres)
    hits = tree.query_ball_point(img, float(cover.radii.max()) * (1 + 1e-12))
    rows, cols = [], []
    for i, nb in enumerate(hits):
        nb = [j for j in nb if np.linalg.norm(cover.centres[j] - img[i]) <= cover.radii[j]]
        if not nb:
            raise CoverageError(f"theta={theta!r}: projected point {i} at {img[i]} is in no tube")
        rows.extend([i] * len(nb))
        cols.extend(sorted(nb))
    data = np.ones(len(rows), dtype=np.int32)
    return sparse.csr_matrix((data, (rows, cols)), shape=(len(img), len(cover)))


@dataclass(frozen=True)
class TubeEnergy:
    theta_first: float
    pair_first: float
    chain: Tuple[ChainRow, ...]
    per_theta: np.ndarray
    tube_counts: np.ndarray


def _theta_terms(cloud, system, i):
    th = float(system.thetas[i])
    img = _project_all(system.family, th, cloud.points)
    inc = _incidence(img, system.covers[i], th)
    share = (inc @ inc.T).toarray() > 0
    m = cloud.masses
    pair_mass = math.fsum((m[:, None] * m[None, :])[share])
    # partition: each atom goes to the first tube containing it
    first = np.asarray(inc.argmax(axis=1)).ravel()
    tube_mass = np.bincount(first, weights=m, minlength=inc.shape[1])
    used = tube_mass[tube_mass > 0]
    part_sq = math.fsum(used * used)
    union = math.fsum(m)            # every atom is covered
    n_tubes = inc.shape[1]
    return share, pair_mass, part_sq, union, n_tubes


def tube_energy(cloud: WeightedPointCloud, system: TubeSystem,
                workers: int = 1) -> TubeEnergy:
    """Tube energy sum_theta w_theta (mu x mu){x ~_theta y}, summed angle-first
    and pair-first, plus the lower bound chain

        (mu x mu){x ~ y} >= sum_j mu(T'_j)^2 >= mu(U T_j)^2 / N
                         >= delta^sigma mu(U T_j)^2 / C,

    where T'_j partitions the union of tubes and C = max N delta^sigma.
    """
    terms = _map(lambda i: _theta_terms(cloud, system, i), range(len(system.thetas)), workers)
    w = system.weights
    m = cloud.masses
    per_theta = np.array([t[1] for t in terms])
    theta_first = math.fsum(w * per_theta)
    acc = np.zeros((len(m), len(m)))
    for wi, t in zip(w, terms):
        acc += wi * t[0]
    pair_first = math.fsum((m[:, None] * m[None, :] * acc).ravel())

    counts = np.array([t[4] for t in terms])
    d, s = system.delta, system.sigma
    C = max(1.0, float(np.max(counts)) * d ** s)
    part = math.fsum(w * np.array([t[2] for t in terms]))
    cs = math.fsum(w * np.array([t[3] ** 2 / t[4] for t in terms]))
    dsig = math.fsum(w * np.array([d ** s * t[3] ** 2 / C for t in terms]))
    chain = (
        ChainRow("pairs>=partition_squares", theta_first, part, d),
        ChainRow("partition_squares>=union_sq_over_N", part, cs, d),
        ChainRow("union_sq_over_N>=delta_sigma_union_sq", cs, dsig, d, C),
    )
    return TubeEnergy(theta_first, pair_first, chain, per_theta, counts)


def relation_measures(cloud: WeightedPointCloud, system: TubeSystem) -> np.ndarray:
    """R[i, j] = theta-measure of {theta : x_i ~_theta x_j}."""
    n = len(cloud)
    acc = np.zeros((n, n))
    for i, wi in enumerate(system.weights):
        share, *_ = _theta_terms(cloud, system, i)
        acc += wi * share
    return acc


# ---------------------------------------------------------------- good sets

@dataclass(frozen=True)
class GoodSets:
    threshold: float
    half_threshold: float
    mass_two_sided: np.ndarray      # mu(y + C) for each atom y
    mass_plus: np.ndarray           # mu(y + C+)
    mass_minus: np.ndarray          # mu(y - C+)
    G: np.ndarray
    G_plus: np.ndarray
    G_minus: np.ndarray
    mu_G: float
    mu_G_plus: float
    mu_G_minus: float

    @property
    def dichotomy(self) -> ChainRow:
        return ChainRow("mu(G+)+mu(G-)>=mu(G)", self.mu_G_plus + self.mu_G_minus,
                        self.mu_G, float("nan"))


def good_sets(cloud: WeightedPointCloud, fld: ConeField, delta: float,
              tau: float) -> GoodSets:
    """G = {y : mu(y + C) >= delta^tau}; G+ and G- use the one-sided field
    with threshold delta^tau / 2 on both sides."""
    two = fld.with_side("two-sided")
    plus = fld.with_side("plus")
    m = cloud.masses
    M2 = membership_matrix(cloud.points, two)
    Mp = membership_matrix(cloud.points, plus)
    mass2 = np.array([math.fsum(m[row]) for row in M2])
    massp = np.array([math.fsum(m[row]) for row in Mp])
    massm = np.array([math.fsum(m[col]) for col in Mp.T])   # y - x in C+
    thr = delta ** tau
    G, Gp, Gm = mass2 >= thr, massp >= thr / 2, massm >= thr / 2
    return GoodSets(thr, thr / 2, mass2, massp, massm, G, Gp, Gm,
                    math.fsum(m[G]), math.fsum(m[Gp]), math.fsum(m[Gm]))


# ------------------------------------------------------- heavy tuple search

@dataclass(frozen=True)
class HeavyTuple:
    indices: Optional[Tuple[int, ...]]
    points: Optional[Tuple[np.ndarray, ...]]
    mass: float
    aggregate: float
    holder_rhs: float
    searched: int
    exhaustive: bool


def heavy_tuple_search(cloud: WeightedPointCloud, fld: ConeField, k: int, sep: float,
                       thresh: float, budget: int = 200_000, seed: int = 0) -> HeavyTuple:
    """Find x_1..x_k in the support, pairwise at least ``sep`` apart, with
    mu(∩ (x_i + field)) >= thresh; the heaviest such tuple is returned.

    Also returns A = ∫..∫ mu(∩ (x_i + field)) dmu^k = sum_y m_y mu(y - field)^k
    and the Hölder lower bound (∫ mu(y - field) dmu(y))^k.
    Tuples are enumerated exhaustively when there are at most ``budget`` of
    them, otherwise ``budget`` seeded random tuples are tried.
    """
    if k not in (2, 3):
        raise DomainError("k must be 2 or 3")
    if k == 2 and fld.side != "plus":
        raise PreconditionError("pair search uses the one-sided field")
    if not (0 < sep < 1 and 0 < thresh < 1):
        raise DomainError("sep and thresh must lie in (0, 1)")
    pts, m = cloud.points, cloud.masses
    n = len(pts)
    M = membership_matrix(pts, fld)          # M[x, y]: y in x + field
    back = np.array([math.fsum(m[M[:, y]]) for y in range(n)])   # mu(y - field)
    aggregate = math.fsum(m * back ** k)
    holder = math.fsum(m * back) ** k
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)

    total = math.comb(n, k)
    exhaustive = total <= budget
    if exhaustive:
        tuples = combinations(range(n), k)
    else:
        rng = np.random.default_rng(seed)
        tuples = (tuple(sorted(rng.choice(n, size=k, replace=False))) for _ in range(budget))
    best, best_mass, tried = None, -1.0, 0
    for tup in tuples:
        tried += 1
        if any(dist[a, b] < sep for a, b in combinations(tup, 2)):
            continue
        common = np.logical_and.reduce([M[i] for i in tup])
        mass = math.fsum(m[common])
        if mass >= thresh and mass > best_mass:
            best, best_mass = tup, mass
    if best is None:
        return HeavyTuple(None, None, 0.0, aggregate, holder, tried, exhaustive)
    return HeavyTuple(tuple(int(i) for i in best), tuple(pts[i] for i in best),
                      best_mass, aggregate, holder, tried, exhaustive)


# ----------------------------------------------------- restricted sublevel

def _intervals(E, curve: DirectionCurve):
    if E is None:
        return [curve.J]
    E = [tuple(map(float, iv)) for iv in E]
    for lo, hi in E:
        if not (hi > lo and curve.contains(lo) and curve.contains(hi)):
            raise DomainError(f"interval {(lo, hi)} is not inside J={curve.J}")
    return E


def restricted_sublevel(x, y, fld: ConeField, delta: float, tau: float,
                        theta_grid: int = 4096, c: float = 0.5, E=None,
                        rel_tol: float = 0.01, min_hits: int = 128,
                        max_grid: int = 1 << 26) -> float:
    """Length of {theta in E : |(x-y).gamma| <= delta and |(x-y).gamma'| > c delta^tau}.

    ``fld`` is the b-cone over the grid of E with thickening delta^tau; the
    difference y - x must lie outside it. E is a list of intervals inside J
    (default J). The grid on each interval doubles until the estimate is
    stable to ``rel_tol`` with at least ``min_hits`` hits, or the set is
    empty on a grid fine enough to resolve delta.
    """
    xi = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if fld.axis != "b":
        raise DomainError("the restricted bound uses the b-cone")
    # the sampled distance overestimates the true one by at most the grid slack
    if float(fld.line_distance(xi)[0] - fld.grid_slack(xi)[0]) <= fld.radius:
        raise BranchError("y - x lies in the thickened b-cone; use the universal bound")
    curve = fld.curve
    ivs = _intervals(E, curve)
    span = sum(hi - lo for lo, hi in ivs)
    thr = c * delta ** tau
    xn = float(np.linalg.norm(xi))

    def count(n_total):
        hits, length = 0, 0.0
        for lo, hi in ivs:
            n = max(1, int(round(n_total * (hi - lo) / span)))
            th = lo + (np.arange(n) + 0.5) * (hi - lo) / n
            g, g1, _ = curve.evaluate(th)
            ok = (np.abs(g @ xi) <= delta) & (np.abs(g1 @ xi) > thr)
            h = int(np.count_nonzero(ok))
            hits += h
            length += h * (hi - lo) / n
        return hits, length

    n = int(theta_grid)
    prev = None
    while True:
        hits, est = count(n)
        if prev is not None:
            if hits == 0 and prev == 0.0 and 2 * xn * span / n <= delta:
                return 0.0
            if hits >= min_hits and abs(est - prev) <= rel_tol * est:
                return est
        if 2 * n > max_grid:
            return est
        prev = est
        n *= 2


def extremal_difference(delta: float, tau: float, K: float = 2.5,
                        keep: float = 0.7) -> Tuple[np.ndarray, List[Tuple[float, float]]]:
    """A unit difference xi and an angle set E, for the special curve, on which
    the restricted sublevel set is as long as the bound allows.

    xi lies in the xz-plane with gamma . xi vanishing at theta0 = K delta^tau,
    so |gamma' . xi| is of order delta^tau there; E = {keep theta0 <= |theta| <= pi}
    removes the angles where xi is close to b_theta.
    """
    t0 = K * delta ** tau
    if not 0 < t0 < math.pi / 2:
        raise DomainError("K delta^tau must lie in (0, pi/2)")
    beta = math.atan2(1.0, math.cos(t0))       # tan(beta) cos(t0) = 1
    xi = np.array([math.sin(beta), 0.0, -math.cos(beta)])
    a = keep * t0
    return xi, [(-math.pi, -a), (a, math.pi)]
