"""Scalar special functions and generic solvers shared by the whole package.

Everything here is a pure function of its inputs and safe to call from any
number of threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "ConvergenceError",
    "DivergenceError",
    "lambert_w0",
    "find_root_bracketed",
    "integrate_levy",
]

_INV_E = math.exp(-1.0)
_OVERFLOW_GUARD = 1e100


class ConvergenceError(RuntimeError):
    """An iterative scheme ran out of iterations before meeting its tolerance."""


class DivergenceError(ArithmeticError):
    """Partial results exceeded the overflow guard; the quantity is treated as divergent."""


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair plus an iteration budget."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0.0):
            raise ValueError("abs_tol must be > 0")
        if not (self.rel_tol > 0.0):
            raise ValueError("rel_tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_TOL = Tolerance()


def lambert_w0(x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Principal branch of the inverse of w -> w*exp(w).

    Halley iteration seeded by a log-based guess; converges to machine
    precision in a handful of steps for the whole domain [-1/e, inf).
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("lambert_w0: argument is NaN")
    if x < -_INV_E - 4e-16:
        raise ValueError(f"lambert_w0: argument {x} below -1/e")
    if x == 0.0:
        return 0.0
    if x < -_INV_E + 1e-14:
        return -1.0

    # Seed: branch-point series near -1/e, w ~ x near 0, log-asymptotic for large x.
    if x < -0.25:
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0
    elif x < 1.0:
        w = x * (1.0 - x)
    else:
        lx = math.log(x)
        llx = math.log(lx) if lx > 0 else 0.0
        w = lx - llx + (llx / lx if lx > 0 else 0.0)

    for _ in range(tol.max_iter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            w += 1e-12
            continue
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 1e-16 * (2.0 + abs(w)):
            break
    else:
        raise ConvergenceError(f"lambert_w0 did not converge for x={x}")

    resid = abs(w * math.exp(w) - x)
    if resid > max(tol.abs_tol, tol.rel_tol * abs(x)):
        raise ConvergenceError(f"lambert_w0 residual {resid} too large for x={x}")
    return w


def find_root_bracketed(
    f: Callable[[float], float], lo: float, hi: float, tol: Tolerance = DEFAULT_TOL
) -> float:
    """Root of f on [lo, hi] given a sign change.

    Bisection with inverse-quadratic/secant acceleration (Brent's scheme).
    Stops when |f| <= abs_tol or the bracket narrows to rel_tol*|root|.
    Deterministic for fixed inputs.
    """
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise ValueError(f"find_root_bracketed: no sign change on [{lo}, {hi}]")

    c, fc = a, fa
    d = e = b - a
    eps = np.finfo(float).eps

    for _ in range(tol.max_iter):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        t = 2.0 * eps * abs(b) + 0.5 * tol.rel_tol * abs(b)
        m = 0.5 * (c - b)
        if abs(fb) <= tol.abs_tol or abs(m) <= t or fb == 0.0:
            return b
        if abs(e) < t or abs(fa) <= abs(fb):
            d = e = m
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            s, e = e, d
            if 2.0 * p < 3.0 * m * q - abs(t * q) and p < abs(0.5 * s * q):
                d = p / q
            else:
                d = e = m
        a, fa = b, fb
        b += d if abs(d) > t else (t if m > 0 else -t)
        fb = f(b)
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            d = e = b - a
    raise ConvergenceError(f"find_root_bracketed: no convergence in {tol.max_iter} iterations")


# Gauss-Kronrod 7-15 nodes/weights on [-1, 1]; all nodes are interior, so
# integrable endpoint singularities are never evaluated directly.
_GK_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_GK_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_GK_WG = np.array([
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0,
    0.381830050505119, 0.0, 0.417959183673469, 0.0,
    0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0,
])


def _gk_panel(fn, a: float, b: float):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _GK_NODES
    y = np.asarray(fn(x), dtype=float)
    if not np.all(np.isfinite(y)):
        raise DivergenceError("integrand evaluated to a non-finite value")
    k = half * float(np.dot(_GK_WK, y))
    g = half * float(np.dot(_GK_WG, y))
    return k, (200.0 * abs(k - g)) ** 1.5 if k != g else abs(k) * 1e-15


def _adaptive(fn, a: float, b: float, tol: Tolerance):
    panels = [(a, b) + _gk_panel(fn, a, b)]
    for _ in range(4 * tol.max_iter):
        total = sum(p[2] for p in panels)
        err = sum(p[3] for p in panels)
        if abs(total) > _OVERFLOW_GUARD:
            raise DivergenceError("integral exceeds overflow guard")
        if err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
            return total, err
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        pa, pb, _, _ = panels.pop(worst)
        mid = 0.5 * (pa + pb)
        if mid <= pa or mid >= pb:  # panel width at machine precision
            return total, err
        panels.append((pa, mid) + _gk_panel(fn, pa, mid))
        panels.append((mid, pb) + _gk_panel(fn, mid, pb))
    raise ConvergenceError("integrate_levy: adaptive refinement did not converge")


def integrate_levy(
    g: Callable[[np.ndarray], np.ndarray],
    density: Callable[[np.ndarray], np.ndarray],
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Integral of g(x)*density(x) over (0, inf).

    g must be O(x) near zero (this keeps x^{-3/2}-type jump densities
    integrable) and both callables must accept numpy arrays.  The interval is
    split at x = 1; on [0, 1] the substitution x = t^2 flattens inverse
    square-root behaviour, on the tail x = -ln(u) maps semi-exponential decay
    onto a finite interval.
    """

    def low(tt):
        xx = tt * tt
        return g(xx) * density(xx) * 2.0 * tt

    def tail(uu):
        xx = -np.log(uu)
        return g(xx) * density(xx) / uu

    half_tol = Tolerance(0.5 * tol.abs_tol, 0.5 * tol.rel_tol, tol.max_iter)
    v_low, _ = _adaptive(low, 0.0, 1.0, half_tol)
    v_tail, _ = _adaptive(tail, 0.0, _INV_E, half_tol)
    return v_low + v_tail
