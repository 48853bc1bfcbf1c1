"""Least-squares power-law fits."""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError

__all__ = ["LogLogFit", "fit_loglog_slope"]


class LogLogFit(NamedTuple):
    slope: float
    r2: float
    intercept: float = 0.0
    dropped: int = 0
    used: int = 0


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> LogLogFit:
    """OLS of log y on log x; entries with y == 0 are dropped and counted.

    Unpacks as (slope, r2, intercept, dropped, used).
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("xs and ys must be 1-d and of equal length")
    if np.any(x <= 0):
        raise DomainError("xs must be positive")
    dx = np.diff(x)
    if len(x) > 1 and not (np.all(dx > 0) or np.all(dx < 0)):
        raise DomainError("xs must be strictly monotone")
    if np.any(y < 0):
        raise DomainError("ys must be nonnegative")
    keep = y > 0
    dropped = int(np.count_nonzero(~keep))
    if np.count_nonzero(keep) < 3:
        raise InsufficientDataError(
            f"{int(np.count_nonzero(keep))} usable points (dropped {dropped} zeros); need 3")
    lx, ly = np.log(x[keep]), np.log(y[keep])
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + icpt)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return LogLogFit(float(slope), r2, float(icpt), dropped, int(keep.sum()))
