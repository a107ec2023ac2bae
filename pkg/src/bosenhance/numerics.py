"""
Numerical building blocks: adaptive quadrature, bracketing root finder,
damped fixed-point iteration.

Integrands passed to :func:`integrate_1d` must accept a 1-D numpy array and
return an array of the same shape; every panel is evaluated in one call.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NoBracket, NonConvergence


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")


DEFAULT_TOL = Tolerance()

# Gauss-Kronrod 7/15 abscissae on [-1, 1] (non-negative half, descending)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss weights sit on the odd-indexed Kronrod abscissae
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    with np.errstate(over="ignore"):
        y = np.asarray(f(mid + half * _NODES), dtype=float)
    if not np.all(np.isfinite(y)):
        raise NonConvergence(f"integrand not finite on [{a}, {b}]")
    k = half * np.dot(_KWEIGHTS, y)
    g = half * np.dot(_GWEIGHTS, y)
    return k, abs(k - g)


def integrate_1d(f, a, b, tol=DEFAULT_TOL, points=()):
    """Integrate ``f`` over ``[a, b]`` with globally adaptive Gauss-Kronrod.

    ``b`` may be ``math.inf``; the tail is mapped onto ``[0, 1)`` through
    ``x = c + u / (1 - u)``. ``points`` are interior breakpoints (kinks,
    integrable singularities) where the initial panels are split.

    Returns the integral; raises :class:`NonConvergence` when the summed
    error estimate is still above ``max(abs_tol, rel_tol*|I|)`` after
    ``tol.max_iter`` bisections.
    """
    a = float(a)
    b = float(b)
    if b < a:
        return -integrate_1d(f, b, a, tol, points)
    if a == b:
        return 0.0
    if math.isinf(a):
        raise DomainError("lower limit must be finite")

    cuts = sorted({float(p) for p in points if a < p < b})
    if math.isinf(b):
        # finite panels up to the last breakpoint, transformed tail beyond it
        c = cuts[-1] if cuts else a
        finite = integrate_1d(f, a, c, tol, cuts[:-1]) if c > a else 0.0

        def g(u):
            w = 1.0 - u
            return f(c + u / w) / (w * w)

        return finite + integrate_1d(g, 0.0, 1.0, tol)

    edges = [a, *cuts, b]
    heap = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = _gk15(f, lo, hi)
        total += val
        err += e
        heapq.heappush(heap, (-e, lo, hi, val))

    for _ in range(tol.max_iter):
        if err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
            return total
        neg_e, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise NonConvergence(f"panel [{lo}, {hi}] cannot be split further", residual=err)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        total += v1 + v2 - val
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))

    if err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
        return total
    raise NonConvergence(
        f"quadrature error {err:.3e} above tolerance after {tol.max_iter} refinements",
        residual=err,
    )


def find_root(f, lo, hi, tol=DEFAULT_TOL):
    """Root of a continuous scalar function bracketed by ``[lo, hi]`` (Brent)."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise NoBracket(f"f({lo})={flo:.3e} and f({hi})={fhi:.3e} have equal sign")
    root, info = brentq(
        f, lo, hi,
        xtol=tol.abs_tol,
        rtol=max(tol.rel_tol, 4 * np.finfo(float).eps),
        maxiter=tol.max_iter,
        full_output=True,
        disp=False,
    )
    if not info.converged:
        raise NonConvergence(f"root finder stopped after {info.iterations} iterations")
    return float(root)


def bisect_array(f, lo, hi, iterations=60):
    """Elementwise bisection for a vector of independent monotone problems.

    ``f(x)`` maps an array of candidates to residuals of the same shape;
    each component must change sign between ``lo`` and ``hi``.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    lo, hi = np.broadcast_arrays(lo, hi)
    lo = lo.copy()
    hi = hi.copy()
    f_lo = f(lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        same = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(same, mid, lo)
        f_lo = np.where(same, f_mid, f_lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def fixed_point(g, x0, damping=0.3, tol=DEFAULT_TOL):
    """Damped iteration ``x <- (1-d) x + d g(x)`` until ``|g(x) - x|_inf <= abs_tol``."""
    if not 0.0 < damping <= 1.0:
        raise DomainError("damping must lie in (0, 1]")
    x = np.array(x0, dtype=float)
    scalar = x.ndim == 0
    res = math.inf
    for _ in range(tol.max_iter + 1):
        gx = np.asarray(g(x), dtype=float)
        res = float(np.max(np.abs(gx - x)))
        if res <= tol.abs_tol:
            return float(x) if scalar else x
        x = (1.0 - damping) * x + damping * gx
    raise NonConvergence(f"fixed point residual {res:.3e} after {tol.max_iter} iterations",
                         residual=res)
