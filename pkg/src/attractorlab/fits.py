"""Shared least-squares and trend-test helpers used by the certificates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LineFit", "line_fit", "quadratic_fit", "local_slopes", "monotone_increase"]


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r_squared: float


def line_fit(x, y) -> LineFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two points to fit a line")
    a = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return LineFit(float(coef[0]), float(coef[1]), r2)


def quadratic_fit(x, y) -> tuple[float, float, float, float]:
    """Least-squares y ~ a*x^2 + b*x + c; returns (a, b, c, R^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("need at least three points for a quadratic fit")
    a = np.vstack([x**2, x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(coef[0]), float(coef[1]), float(coef[2]), r2


def local_slopes(x, y) -> np.ndarray:
    """Finite-difference slopes between consecutive samples."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.diff(y) / np.diff(x)


def monotone_increase(values, window_fraction: float = 0.5, rel_tol: float = 1e-9) -> bool:
    """True when the last `window_fraction` of the sequence increases
    monotonically (a divergence certificate; limsups are not computable)."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return False
    start = max(0, int(np.floor(len(v) * (1.0 - window_fraction))) - 1)
    tail = v[start:]
    scale = np.maximum(np.abs(tail[:-1]), 1.0)
    return bool(np.all(np.diff(tail) > -rel_tol * scale) and tail[-1] > tail[0])
