"""Vector helpers, direction curves on S^2, projection families and
theta-sublevel measurement."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from .errors import DegenerateInputError, DomainError

__all__ = [
    "vec3", "norm", "unit",
    "DirectionCurve", "special_curve", "planar_curve", "custom_curve",
    "eval_curve", "nondegeneracy_margin",
    "Family", "ProjectionFamily", "project", "projection_norms",
    "sublevel_measure", "sublevel_measure_detail", "SublevelResult",
]

SQRT2 = math.sqrt(2.0)
_SEEDS = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


def vec3(x, y, z) -> np.ndarray:
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"non-finite vector {v}")
    return v


def norm(v) -> np.ndarray | float:
    return np.linalg.norm(np.asarray(v, dtype=float), axis=-1)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise DegenerateInputError("cannot normalise the zero vector")
    return v / n


Evaluator = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class DirectionCurve:
    """A C^3 curve theta -> S^2 with analytic first and second derivatives.

    ``evaluator`` maps a 1-d array of angles to three (n, 3) arrays.
    """

    evaluator: Evaluator
    J: Tuple[float, float]
    kind: str = "custom"
    name: str = "custom"

    def __post_init__(self):
        lo, hi = float(self.J[0]), float(self.J[1])
        if not hi > lo:
            raise DomainError(f"empty parameter interval {self.J}")
        object.__setattr__(self, "J", (lo, hi))

    @property
    def length(self) -> float:
        return self.J[1] - self.J[0]

    def contains(self, theta, tol: float = 1e-12) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        return (th >= self.J[0] - tol) & (th <= self.J[1] + tol)

    def evaluate(self, theta) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if not np.all(self.contains(th)):
            bad = th[~self.contains(th)][0]
            raise DomainError(f"theta={bad!r} outside J={self.J}")
        g, g1, g2 = self.evaluator(th)
        return (np.asarray(g, dtype=float), np.asarray(g1, dtype=float),
                np.asarray(g2, dtype=float))

    def restrict(self, J: Tuple[float, float]) -> "DirectionCurve":
        lo, hi = float(J[0]), float(J[1])
        if not (self.contains(lo) and self.contains(hi)):
            raise DomainError(f"{J} is not inside {self.J}")
        return DirectionCurve(self.evaluator, (lo, hi), self.kind, self.name)


def _special(th):
    c, s = np.cos(th), np.sin(th)
    one, zero = np.ones_like(th), np.zeros_like(th)
    g = np.stack([c, s, one], axis=-1) / SQRT2
    g1 = np.stack([-s, c, zero], axis=-1) / SQRT2
    g2 = np.stack([-c, -s, zero], axis=-1) / SQRT2
    return g, g1, g2


def _planar(th):
    c, s = np.cos(th), np.sin(th)
    zero = np.zeros_like(th)
    return (np.stack([c, s, zero], axis=-1), np.stack([-s, c, zero], axis=-1),
            np.stack([-c, -s, zero], axis=-1))


def special_curve(J: Tuple[float, float] = (-math.pi, math.pi)) -> DirectionCurve:
    """gamma(theta) = (cos theta, sin theta, 1)/sqrt(2)."""
    return DirectionCurve(_special, J, kind="special", name="special")


def planar_curve(J: Tuple[float, float] = (-math.pi, math.pi)) -> DirectionCurve:
    """The equator (cos theta, sin theta, 0); degenerate on purpose."""
    return DirectionCurve(_planar, J, kind="custom", name="planar")


def custom_curve(gamma, dgamma, ddgamma, J, name: str = "custom") -> DirectionCurve:
    """Wrap three vectorised callables theta -> (n, 3) into a curve."""

    def ev(th):
        return gamma(th), dgamma(th), ddgamma(th)

    return DirectionCurve(ev, J, kind="custom", name=name)


def eval_curve(curve: DirectionCurve, theta: float):
    """Return (gamma, gamma', gamma'') at a single angle."""
    g, g1, g2 = curve.evaluate(theta)
    return g[0], g1[0], g2[0]


def _grid(curve: DirectionCurve, samples: int) -> np.ndarray:
    return np.linspace(curve.J[0], curve.J[1], samples)


def nondegeneracy_margin(curve: DirectionCurve, samples: int) -> float:
    """min over a uniform grid of |det[gamma, gamma', gamma'']|."""
    if samples < 2:
        raise DomainError("need at least 2 samples")
    g, g1, g2 = curve.evaluate(_grid(curve, samples))
    det = np.einsum("ij,ij->i", g, np.cross(g1, g2))
    return float(np.min(np.abs(det)))


class Family(str, enum.Enum):
    LINE = "rho"
    PLANE = "pi"
    BAD_PLANE = "pi_tilde"


def _gram_schmidt_frame(n: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal (e1, e2) spanning n^perp for each row of unit n.

    Seeds are tried in a fixed order; the first one making an angle of at
    least ~35 degrees with n wins, so the frame is reproducible.
    """
    n = np.atleast_2d(n)
    e1 = np.empty_like(n)
    chosen = np.zeros(len(n), dtype=bool)
    for seed in _SEEDS:
        r = seed - (n @ seed)[:, None] * n
        rn = np.linalg.norm(r, axis=1)
        take = (~chosen) & (rn > 0.57)
        e1[take] = r[take] / rn[take, None]
        chosen |= take
    e2 = np.cross(n, e1)
    return e1, e2


def _kernel_normals(tag: "Family", curve: DirectionCurve, theta) -> np.ndarray:
    g, g1, _ = curve.evaluate(theta)
    if tag is Family.BAD_PLANE:
        w = np.cross(g, g1)
        wn = np.linalg.norm(w, axis=1)
        if np.any(wn < 1e-14):
            raise DegenerateInputError("gamma x gamma' vanishes")
        return w / wn[:, None]
    return g


@dataclass(frozen=True)
class ProjectionFamily:
    """One of the three families along a curve.

    rho: x -> x.gamma; pi: orthogonal projection onto gamma^perp;
    pi_tilde: orthogonal projection onto (gamma x gamma')^perp.
    """

    tag: Family
    curve: DirectionCurve
    _lip: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "tag", Family(self.tag))

    def normal(self, theta) -> np.ndarray:
        """Unit vector spanning gamma (rho, pi) or the kernel b (pi_tilde)."""
        return _kernel_normals(self.tag, self.curve, theta)

    def frame(self, theta) -> Tuple[np.ndarray, np.ndarray]:
        if self.tag is Family.LINE:
            raise DomainError("the line family has a 1-d codomain")
        return _gram_schmidt_frame(self.normal(theta))

    def lipschitz_per_unit(self, samples: int = 4097) -> float:
        """Bound on |d/dtheta n(theta)| over J, used to skip grid blocks."""
        if "n" not in self._lip:
            th = _grid(self.curve, samples)
            g, g1, g2 = self.curve.evaluate(th)
            if self.tag is Family.BAD_PLANE:
                w = np.cross(g, g1)
                dw = np.cross(g, g2)
                wn = np.linalg.norm(w, axis=1)
                b = w / wn[:, None]
                db = (dw - np.einsum("ij,ij->i", b, dw)[:, None] * b) / wn[:, None]
                v = np.linalg.norm(db, axis=1)
            else:
                v = np.linalg.norm(g1, axis=1)
            # slack for what the sampling may miss between grid points
            self._lip["n"] = float(v.max()) * 1.25 + 1e-12
        return self._lip["n"]


def project(family: ProjectionFamily, theta: float, x) -> np.ndarray | float:
    """Apply the projection at angle theta to x of shape (3,) or (m, 3)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    n = family.normal(theta)[0]
    if family.tag is Family.LINE:
        out = X @ n
        return float(out[0]) if single else out
    e1, e2 = _gram_schmidt_frame(n[None, :])
    out = np.stack([X @ e1[0], X @ e2[0]], axis=-1)
    return out[0] if single else out


def projection_norms(family: ProjectionFamily, thetas, x) -> np.ndarray:
    """|proj_theta(x)| for a single x over an array of angles."""
    x = np.asarray(x, dtype=float)
    n = family.normal(thetas)
    dots = n @ x
    if family.tag is Family.LINE:
        return np.abs(dots)
    sq = float(x @ x) - dots * dots
    return np.sqrt(np.maximum(sq, 0.0))


@dataclass(frozen=True)
class SublevelResult:
    length: float
    grid: int
    hits: int
    converged: bool


def _count_hits(family, x, delta, n, lo, span, lip, block=256, chunk=1 << 20):
    """Number of midpoint-grid angles with |proj| <= delta, grid of size n.

    Blocks whose centre value exceeds delta by more than the Lipschitz slack
    cannot contain hits and are skipped; the count equals a full scan.
    """
    h = span / n
    nblocks = -(-n // block)
    hits = 0
    slack = lip * block * h / 2.0 + 1e-15
    for b0 in range(0, nblocks, chunk // block):
        bidx = np.arange(b0, min(nblocks, b0 + chunk // block))
        start = bidx * block
        stop = np.minimum(start + block, n)
        centre = lo + ((start + stop) / 2.0) * h
        vals = projection_norms(family, np.clip(centre, lo, lo + span), x)
        cand = bidx[vals - slack <= delta]
        if cand.size == 0:
            continue
        idx = (cand[:, None] * block + np.arange(block)[None, :]).ravel()
        idx = idx[idx < n]
        th = lo + (idx + 0.5) * h
        hits += int(np.count_nonzero(projection_norms(family, th, x) <= delta))
    return hits


def sublevel_measure_detail(family: ProjectionFamily, x, delta: float,
                            theta_grid: int, rel_tol: float = 0.01,
                            min_hits: int = 256, max_grid: int = 1 << 30
                            ) -> SublevelResult:
    """Grid estimate of |{theta in J : |proj_theta(x)| <= delta}|.

    The midpoint grid is doubled until two successive estimates agree to
    ``rel_tol`` with at least ``min_hits`` grid points inside the set, or
    until the set is empty on a grid that resolves the delta scale.
    """
    x = np.asarray(x, dtype=float)
    if delta <= 0:
        raise DomainError("delta must be positive")
    if theta_grid < 1:
        raise DomainError("theta_grid must be positive")
    xn = float(np.linalg.norm(x))
    if xn == 0.0:
        raise DegenerateInputError("x = 0: every angle is in the sublevel set")
    lo, span = family.curve.J[0], family.curve.length
    lip = family.lipschitz_per_unit() * xn
    n = int(theta_grid)
    prev = None
    while True:
        hits = _count_hits(family, x, delta, n, lo, span, lip)
        est = hits * span / n
        if prev is not None:
            if hits == 0 and prev == 0.0 and lip * span / n <= delta:
                return SublevelResult(0.0, n, 0, True)
            if hits >= min_hits and abs(est - prev) <= rel_tol * est:
                return SublevelResult(est, n, hits, True)
        if 2 * n > max_grid:
            return SublevelResult(est, n, hits, False)
        prev = est
        n *= 2


def sublevel_measure(family: ProjectionFamily, x, delta: float,
                     theta_grid: int = 1024) -> float:
    return sublevel_measure_detail(family, x, delta, theta_grid).length
