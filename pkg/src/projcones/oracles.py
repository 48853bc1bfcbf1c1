"""Brute-force membership oracles on a cubic lattice.

Every oracle returns lattice points (pitch ``pitch``, offset by half a pitch)
inside B(0,1) whose distances to a list of sets are all at most ``delta``.
Distances are 1-Lipschitz, so whole cells can be discarded when the value at
the centre exceeds delta by more than the half-diagonal; the result equals a
full scan of the lattice.
"""
from __future__ import annotations

import math
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .geom3 import DirectionCurve

__all__ = ["lattice_oracle", "circular_cone_distance", "halfline_patch_distance",
           "plane_distance", "line_distance"]

DistFn = Callable[[np.ndarray], np.ndarray]


def circular_cone_distance(x: np.ndarray, apex=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Distance to the double cone {x^2 + y^2 = z^2} translated to ``apex``.

    In the meridian plane the cone is the pair of lines w = +-z, so the
    distance is |rho - |z|| / sqrt(2).
    """
    y = np.asarray(x, dtype=float) - np.asarray(apex, dtype=float)
    rho = np.hypot(y[..., 0], y[..., 1])
    return np.abs(rho - np.abs(y[..., 2])) / math.sqrt(2.0)


def halfline_patch_distance(x: np.ndarray, curve: DirectionCurve, J: Sequence[float],
                            apex=(0.0, 0.0, 0.0), coarse: int = 96,
                            iters: int = 48) -> np.ndarray:
    """Distance to the union of half-lines {r gamma(theta): r >= 0, theta in J} + apex.

    dist^2 = |y|^2 - max(0, max_theta y.gamma(theta))^2; the inner maximum is
    bracketed on a grid and refined by golden-section search.
    """
    y = np.atleast_2d(np.asarray(x, dtype=float) - np.asarray(apex, dtype=float))
    lo, hi = float(J[0]), float(J[1])
    th = np.linspace(lo, hi, coarse)
    G, _, _ = curve.evaluate(th)
    vals = y @ G.T
    k = np.argmax(vals, axis=1)
    step = (hi - lo) / (coarse - 1)
    a = np.maximum(lo, th[k] - step)
    b = np.minimum(hi, th[k] + step)
    gr = (math.sqrt(5) - 1) / 2

    def phi(t):
        g, _, _ = curve.evaluate(t)
        return np.einsum("ij,ij->i", y, g)

    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(iters):
        left = fc > fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = np.where(left, b - gr * (b - a), d)
        nd = np.where(left, c, a + gr * (b - a))
        fnew = phi(np.where(left, nc, nd))
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
        c, d = nc, nd
    best = np.maximum.reduce([phi(0.5 * (a + b)), vals.max(axis=1)])
    best = np.maximum(best, 0.0)
    sq = np.einsum("ij,ij->i", y, y) - best * best
    return np.sqrt(np.maximum(sq, 0.0))


def plane_distance(x, point, normal) -> np.ndarray:
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return np.abs((np.asarray(x, dtype=float) - np.asarray(point, dtype=float)) @ n)


def line_distance(x, point, direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    y = np.asarray(x, dtype=float) - np.asarray(point, dtype=float)
    along = y @ d
    return np.sqrt(np.maximum(np.einsum("...i,...i->...", y, y) - along * along, 0.0))


def lattice_oracle(dists: List[DistFn], delta: float, pitch: float | None = None,
                   radius: float = 1.0, coarse_levels: int | None = None,
                   chunk: int = 1 << 18) -> np.ndarray:
    """Lattice points x in B(0, radius) with every dist(x) <= delta.

    Lattice: pitch * (k + 1/2), k integer. Coarse-to-fine refinement keeps a
    cell only when every distance at its centre is within delta plus the
    cell half-diagonal.
    """
    if pitch is None:
        pitch = delta / 2.0
    levels = int(math.ceil(math.log2(radius / pitch))) if coarse_levels is None else coarse_levels
    n = 1 << levels                      # lattice indices run over [-n, n)
    # cells: integer corner (in lattice units) and side length s (power of 2)
    s = 1 << max(levels - 4, 0)
    rng = np.arange(-n, n, s)
    corners = np.stack(np.meshgrid(rng, rng, rng, indexing="ij"), axis=-1).reshape(-1, 3)
    while True:
        keep_parts = []
        for i in range(0, len(corners), chunk):
            cc = corners[i:i + chunk]
            centre = (cc + s / 2.0) * pitch
            slack = math.sqrt(3) * (s - 1) / 2.0 * pitch if s > 1 else 0.0
            ok = np.linalg.norm(centre, axis=1) <= radius + slack
            for fn in dists:
                if not np.any(ok):
                    break
                idx = np.flatnonzero(ok)
                ok[idx] = fn(centre[idx]) <= delta + slack
            keep_parts.append(cc[ok])
        corners = np.vstack(keep_parts) if keep_parts else np.empty((0, 3), int)
        if s == 1 or len(corners) == 0:
            break
        s //= 2
        offs = np.array([[i, j, k] for i in (0, s) for j in (0, s) for k in (0, s)])
        corners = (corners[:, None, :] + offs[None, :, :]).reshape(-1, 3)
    pts = (corners + 0.5) * pitch
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))
    return pts[order]
