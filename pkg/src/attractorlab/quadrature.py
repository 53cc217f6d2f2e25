"""Deterministic adaptive Simpson quadrature (fixed refinement order)."""

from __future__ import annotations

__all__ = ["adaptive_simpson"]


def _recurse(f, a, fa, m, fm, b, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) < 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    # tolerance halving floored at rounding level, otherwise hard support
    # edges recurse to full depth
    half = max(0.5 * tol, 1e-17)
    return _recurse(f, a, fa, lm, flm, m, fm, left, half, depth - 1) + _recurse(
        f, m, fm, rm, frm, b, fb, right, half, depth - 1
    )


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-12, max_depth: int = 48) -> float:
    """Integrate f over [a, b]; left-to-right refinement keeps results
    bit-reproducible for identical inputs."""
    if b == a:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _recurse(f, a, fa, m, fm, b, fb, whole, tol, max_depth)
