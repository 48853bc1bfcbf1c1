"""Discrete measures: weighted point clouds, self-similar samples, growth
exponents, Riesz energies and the energy mass bound."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .errors import DomainError, ResourceError, SingularPairError
from .fitting import fit_loglog_slope
from .geom3 import Family, ProjectionFamily, project

__all__ = [
    "WeightedPointCloud", "IFSSpec", "generate_ifs", "frostman_exponent",
    "riesz_energy", "mass_bound_check", "pushforward", "uniform_segment",
    "save_cloud", "load_cloud", "corner_ifs", "sierpinski_ifs",
    "four_corner_ifs", "cantor_ifs", "DEFAULT_POINT_BUDGET",
]

DEFAULT_POINT_BUDGET = 1 << 22


@dataclass(frozen=True)
class WeightedPointCloud:
    """Atoms ``points[i]`` carrying ``masses[i]``; total mass 1."""

    points: np.ndarray
    masses: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        m = np.asarray(self.masses, dtype=float).ravel()
        if pts.shape[0] != m.shape[0]:
            raise DomainError("points and masses differ in length")
        if pts.shape[0] == 0:
            raise DomainError("empty cloud")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise DomainError("masses must be finite and nonnegative")
        if abs(math.fsum(m) - 1.0) > 1e-9:
            raise DomainError(f"masses sum to {math.fsum(m)!r}, expected 1")
        if not np.all(np.isfinite(pts)):
            raise DomainError("non-finite coordinates")
        if pts.shape[1] == 3 and np.any(np.linalg.norm(pts, axis=1) > 1 + 1e-9):
            raise DomainError("3-d clouds must lie in the closed unit ball")
        pts.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", m)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def mass_in_ball(self, centre, radius: float) -> float:
        d = np.linalg.norm(self.points - np.asarray(centre, dtype=float), axis=1)
        return math.fsum(self.masses[d <= radius])


@dataclass(frozen=True)
class IFSSpec:
    """Similarities x -> r x + t_i sharing one ratio r."""

    ratio: float
    translations: np.ndarray

    def __post_init__(self):
        t = np.atleast_2d(np.asarray(self.translations, dtype=float))
        if t.shape[1] != 3:
            raise DomainError("translations must be 3-vectors")
        if not 0 < self.ratio < 1:
            raise DomainError("ratio must lie in (0, 1)")
        if np.any(np.linalg.norm(t, axis=1) + self.ratio > 1 + 1e-12):
            raise DomainError("some map does not send B(0,1) into itself")
        t.setflags(write=False)
        object.__setattr__(self, "translations", t)

    @property
    def n_maps(self) -> int:
        return len(self.translations)

    @property
    def similarity_dimension(self) -> float:
        return math.log(self.n_maps) / math.log(1.0 / self.ratio)


def corner_ifs() -> IFSSpec:
    """Eight half-size copies tiling the cube [-1/2, 1/2]^3."""
    c = np.array([[x, y, z] for x in (-.25, .25) for y in (-.25, .25) for z in (-.25, .25)])
    return IFSSpec(0.5, c)


def sierpinski_ifs() -> IFSSpec:
    """Three half-size maps towards the vertices of a planar triangle
    tilted out of the coordinate planes; dimension log 3/log 2."""
    ang = np.array([0.0, 2 * math.pi / 3, 4 * math.pi / 3]) + 0.3
    v = 0.45 * np.stack([np.cos(ang), np.sin(ang), np.zeros(3)], axis=1)
    tilt = np.array([[1, 0, 0], [0, math.cos(0.7), -math.sin(0.7)],
                     [0, math.sin(0.7), math.cos(0.7)]])
    return IFSSpec(0.5, v @ tilt.T)


def four_corner_ifs() -> IFSSpec:
    """Four-corner dust in the plane z=0, ratio 1/3."""
    t = np.array([[x, y, 0.0] for x in (-1 / 3, 1 / 3) for y in (-1 / 3, 1 / 3)])
    return IFSSpec(1 / 3, t)


def cantor_ifs() -> IFSSpec:
    """Middle-thirds Cantor set on [-1/2, 1/2] along the x-axis."""
    return IFSSpec(1 / 3, np.array([[-1 / 3, 0, 0], [1 / 3, 0, 0]]))


def generate_ifs(spec: IFSSpec, depth: int,
                 budget: int = DEFAULT_POINT_BUDGET) -> WeightedPointCloud:
    """One atom per word w of length ``depth`` at f_w(0), mass N^-depth.

    Atoms are in lexicographic word order.
    """
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    n = spec.n_maps
    if n ** depth > budget:
        raise ResourceError(f"{n}^{depth} points exceed the budget of {budget}")
    pts = np.zeros((1, 3))
    t = spec.translations
    for _ in range(depth):
        pts = (t[:, None, :] + spec.ratio * pts[None, :, :]).reshape(-1, 3)
    m = np.full(len(pts), 1.0 / len(pts))
    meta = {"similarity_dimension": spec.similarity_dimension, "depth": depth,
            "maps": n, "ratio": spec.ratio}
    return WeightedPointCloud(pts, m, meta)


def uniform_segment(n: int, start=(0.0, 0.0, 0.0), end=(1.0, 0.0, 0.0),
                    seed: int | None = None) -> WeightedPointCloud:
    """n equal atoms on a segment: grid midpoints, or iid uniform if seeded."""
    a, b = np.asarray(start, float), np.asarray(end, float)
    if seed is None:
        s = (np.arange(n) + 0.5) / n
    else:
        s = np.sort(np.random.default_rng(seed).random(n))
    return WeightedPointCloud(a + s[:, None] * (b - a), np.full(n, 1.0 / n))


def _max_ball_masses(points, masses, radii, chunk=512):
    """max over atoms x of mu(B(x, r)) for each r, closed balls."""
    best = np.zeros(len(radii))
    for i in range(0, len(points), chunk):
        d = np.linalg.norm(points[i:i + chunk, None, :] - points[None, :, :], axis=2)
        order = np.argsort(d, axis=1)
        ds = np.take_along_axis(d, order, axis=1)
        cm = np.cumsum(masses[order], axis=1)
        for k, r in enumerate(radii):
            cnt = (ds <= r).sum(axis=1)
            best[k] = max(best[k], float(cm[np.arange(len(cnt)), cnt - 1].max()))
    return best


def frostman_exponent(cloud: WeightedPointCloud,
                      radii: Sequence[float]) -> Tuple[float, float]:
    """Fit log max_x mu(B(x, r)) = log C + s log r over the given radii."""
    radii = np.sort(np.asarray(radii, dtype=float))
    if len(radii) < 2 or radii[-1] / radii[0] < 4 - 1e-12:
        raise DomainError("radii must span at least two octaves")
    pts = cloud.points
    if len(cloud) < 2 or np.ptp(pts, axis=0).max() == 0:
        warnings.warn("degenerate cloud: growth exponent reported as 0")
        return 0.0, 1.0
    ys = _max_ball_masses(pts, cloud.masses, radii)
    fit = fit_loglog_slope(radii, ys)
    return fit.slope, math.exp(fit.intercept)


def _energy_block(pts, m, s, i0, i1):
    d = np.linalg.norm(pts[i0:i1, None, :] - pts[None, :, :], axis=2)
    rows = np.arange(i0, i1)
    d[rows - i0, rows] = np.inf
    zero = np.argwhere(d == 0)
    if zero.size:
        return None, [(int(i0 + a), int(b)) for a, b in zero]
    terms = (m[i0:i1, None] * m[None, :]) * d ** (-s)
    return math.fsum(terms.sum(axis=1)), []


def riesz_energy(cloud: WeightedPointCloud, s: float, workers: int = 1,
                 block: int = 256) -> float:
    """Sum over i != j of m_i m_j |x_i - x_j|^-s.

    Row blocks may run on several threads; their partial sums are combined
    with ``math.fsum`` in block order, so the value does not depend on the
    worker count.
    """
    if s <= 0:
        raise DomainError("s must be positive")
    pts, m = cloud.points, cloud.masses
    n = len(pts)
    if n == 1:
        return 0.0
    starts = list(range(0, n, block))
    job = lambda i0: _energy_block(pts, m, s, i0, min(n, i0 + block))  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(job, starts))
    else:
        parts = [job(i0) for i0 in starts]
    bad = [p for _, ps in parts for p in ps if p[0] < p[1]]
    if bad:
        raise SingularPairError(bad)
    return math.fsum(v for v, _ in parts)


def mass_bound_check(cloud2d: WeightedPointCloud, region: Tuple[Sequence[float], float],
                     s: float, energy: float | None = None) -> Tuple[float, float, bool]:
    """Compare nu(B) with I_s(nu)^(1/2) diam(B)^(s/2) for a closed ball B.

    ``region`` is (centre, radius). A precomputed energy may be passed to
    avoid recomputing it for many regions.
    """
    centre, radius = region
    if radius < 0:
        raise DomainError("negative radius")
    if energy is None:
        energy = riesz_energy(cloud2d, s)
    lhs = cloud2d.mass_in_ball(centre, radius)
    rhs = math.sqrt(energy) * (2.0 * radius) ** (s / 2.0)
    return lhs, rhs, bool(lhs <= rhs)


def pushforward(cloud: WeightedPointCloud, family: ProjectionFamily,
                theta: float) -> WeightedPointCloud:
    """Image cloud under the projection at theta; masses copied unchanged."""
    img = project(family, theta, cloud.points)
    img = np.asarray(img, dtype=float)
    if family.tag is Family.LINE:
        img = img[:, None]
    meta = dict(cloud.meta, projection=family.tag.value, theta=theta)
    return WeightedPointCloud(img, cloud.masses.copy(), meta)


def save_cloud(cloud: WeightedPointCloud, path) -> None:
    """Header ``<count> <dim>`` then one ``coords... mass`` row per atom."""
    with open(path, "w") as fh:
        fh.write(f"{len(cloud)} {cloud.dim}\n")
        for p, m in zip(cloud.points, cloud.masses):
            fh.write(" ".join(repr(float(c)) for c in p) + f" {float(m)!r}\n")


def load_cloud(path) -> WeightedPointCloud:
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 2:
            raise DomainError(f"{path}: bad header {head}")
        n, dim = int(head[0]), int(head[1])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (n, dim + 1):
        raise DomainError(f"{path}: expected {n} rows of {dim + 1} values, got {data.shape}")
    return WeightedPointCloud(data[:, :dim], data[:, dim])
