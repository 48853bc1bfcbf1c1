"""Ball covers, greedy 5r reduction, box counting and the scale pigeonhole."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, PreconditionError, ScaleWindowError
from .fitting import fit_loglog_slope

__all__ = ["BallCover", "ScaleReport", "five_r_reduce", "box_dimension",
           "occupied_cells", "pigeonhole_scale", "PIGEONHOLE_C0"]

PIGEONHOLE_C0 = 6.0 / math.pi ** 2


@dataclass(frozen=True)
class BallCover:
    """Closed balls B(centres[i], radii[i]) in R^d."""

    centres: np.ndarray
    radii: np.ndarray
    scale_k: Optional[int] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = np.asarray(self.centres, dtype=float)
        if c.ndim == 1:
            c = c[:, None] if c.size else c.reshape(0, 1)
        r = np.asarray(self.radii, dtype=float).ravel()
        if len(c) != len(r):
            raise DomainError("centres and radii differ in length")
        if np.any(r <= 0):
            raise DomainError("radii must be positive")
        if self.scale_k is not None and len(r):
            lo = 2.0 ** -self.scale_k
            if np.any(r < lo * (1 - 1e-12)) or np.any(r > 5 * lo * (1 + 1e-12)):
                raise DomainError(f"radii outside [2^-k, 5*2^-k] for k={self.scale_k}")
        object.__setattr__(self, "centres", c)
        object.__setattr__(self, "radii", r)

    def __len__(self) -> int:
        return len(self.radii)

    @property
    def dim(self) -> int:
        return self.centres.shape[1]

    def contains(self, pts, slack: float = 0.0) -> np.ndarray:
        """Boolean mask: which points lie in at least one ball."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros(len(pts), dtype=bool)
        if len(self) == 0:
            return out
        tree = cKDTree(self.centres)
        rmax = float(self.radii.max())
        for i, nb in enumerate(tree.query_ball_point(pts, rmax + slack)):
            if nb:
                d = np.linalg.norm(self.centres[nb] - pts[i], axis=1)
                out[i] = bool(np.any(d <= self.radii[nb] + slack))
        return out

    def overlap(self) -> int:
        """Largest number of balls containing a common ball centre."""
        if len(self) == 0:
            return 0
        d = np.linalg.norm(self.centres[:, None, :] - self.centres[None, :, :], axis=2)
        return int((d <= self.radii[None, :]).sum(axis=1).max())


def five_r_reduce(cover: BallCover) -> BallCover:
    """Greedy Vitali selection followed by 5x dilation.

    Balls are visited by decreasing radius, ties by input index; a ball is
    kept if it is disjoint from every ball kept so far.
    """
    if len(cover) == 0:
        raise DomainError("empty cover")
    order = sorted(range(len(cover)), key=lambda i: (-cover.radii[i], i))
    kept: list[int] = []
    kc = np.empty((0, cover.dim))
    kr = np.empty(0)
    for i in order:
        c, r = cover.centres[i], cover.radii[i]
        if len(kept) and np.any(np.linalg.norm(kc - c, axis=1) <= kr + r):
            continue
        kept.append(i)
        kc = np.vstack([kc, c])
        kr = np.append(kr, r)
    meta = dict(cover.meta, selected=kept)
    return BallCover(kc, 5.0 * kr, None, meta)


def occupied_cells(points: np.ndarray, k: int) -> int:
    cells = np.floor(np.asarray(points) * 2.0 ** k).astype(np.int64)
    return len(np.unique(cells, axis=0))


def box_dimension(cloud, k_range: Tuple[int, int]) -> Tuple[float, float]:
    """Slope of log N(2^-k) against k log 2 over k_min..k_max.

    N counts occupied dyadic cells. The median nearest-neighbour spacing of
    the cloud must not exceed 2^-k_max.
    """
    kmin, kmax = int(k_range[0]), int(k_range[1])
    if kmax - kmin < 4:
        raise DomainError("k_range must span at least 4 octaves")
    pts = cloud.points if hasattr(cloud, "points") else np.asarray(cloud, dtype=float)
    pts = np.atleast_2d(pts)
    uniq = np.unique(pts, axis=0)
    if len(uniq) == 1:
        return 0.0, 1.0
    nn, _ = cKDTree(uniq).query(uniq, k=2)
    spacing = float(np.median(nn[:, 1]))
    if spacing > 2.0 ** -kmax:
        raise ScaleWindowError(
            f"median spacing {spacing:.3g} is coarser than 2^-{kmax}={2.0 ** -kmax:.3g}")
    ks = np.arange(kmin, kmax + 1)
    counts = [occupied_cells(uniq, k) for k in ks]
    fit = fit_loglog_slope(2.0 ** ks, counts)
    return fit.slope, fit.r2


@dataclass(frozen=True)
class ScaleReport:
    k: int
    mass: float
    threshold: float

    @property
    def delta(self) -> float:
        return 2.0 ** -self.k


def pigeonhole_scale(mass_per_scale: Mapping[int, float],
                     c0: float = PIGEONHOLE_C0) -> ScaleReport:
    """Smallest k with m_k >= c0 k^-2.

    Because sum_k c0 k^-2 <= 1, some k qualifies whenever the masses add up
    to at least 1.
    """
    total = math.fsum(mass_per_scale.values())
    if total < 1 - 1e-9:
        raise PreconditionError(f"total mass {total!r} < 1")
    for k in sorted(mass_per_scale):
        if k < 1:
            raise DomainError("scales are indexed from k = 1")
        thr = c0 / k ** 2
        if mass_per_scale[k] >= thr:
            return ScaleReport(int(k), float(mass_per_scale[k]), thr)
    raise PreconditionError("no scale reached its threshold")
