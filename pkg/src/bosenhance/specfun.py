"""
Special functions on the real line: polylogarithm (Bose function), Riemann
zeta, Gamma and the upper incomplete Gamma function.

The polylogarithm is evaluated from its power series for ``z <= 1/e`` and
from the expansion in ``mu = ln z`` above that, where the power series
converges too slowly to be useful.  The expansion converges for
``|mu| < 2 pi``; at ``|mu| = 1`` its 24 terms reach double precision.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special as sp

from .errors import DivergentValue, DomainError

SERIES_CROSSOVER = math.exp(-1.0)
_EXPANSION_TERMS = 24
_INTEGER_ATOL = 1e-12


def zeta(s):
    """Riemann zeta function for ``s > 1``."""
    s = float(s)
    if not s > 1.0:
        raise DomainError(f"zeta(s) requires s > 1, got {s}")
    return float(sp.zeta(s))


def gamma_fn(s):
    s = float(s)
    if not s > 0.0:
        raise DomainError(f"gamma_fn(s) requires s > 0, got {s}")
    return float(sp.gamma(s))


def gamma_upper(s, x):
    """Upper incomplete Gamma ``Gamma(s, x) = int_x^inf t^(s-1) e^-t dt``.

    ``s = 0`` is the exponential integral ``E1(x)``.
    """
    s = float(s)
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"gamma_upper requires x > 0, got {x}")
    if s < 0.0:
        raise DomainError(f"gamma_upper requires s >= 0, got {s}")
    if s == 0.0:
        return float(sp.exp1(x))
    return float(sp.gammaincc(s, x) * sp.gamma(s))


@lru_cache(maxsize=256)
def _expansion_coefficients(s):
    # zeta(s - k) / k!, with the k = s - 1 slot zeroed for integer s
    k = np.arange(_EXPANSION_TERMS)
    arg = s - k
    coeff = np.empty(_EXPANSION_TERMS)
    for i, a in enumerate(arg):
        coeff[i] = 0.0 if a == 1.0 else sp.zeta(a) / math.factorial(i)
    coeff.flags.writeable = False
    return coeff


def _is_integer(s):
    return abs(s - round(s)) < _INTEGER_ATOL


def _series(s, z):
    zmax = float(np.max(z)) if z.size else 0.0
    if zmax <= 0.0:
        return np.zeros_like(z)
    n_terms = int(math.log(1e-18) / math.log(zmax)) + 8
    if s < 0.0:
        # l^|s| growth pushes the tail out
        n_terms = int(n_terms * (1.0 + 0.5 * abs(s)))
    n_terms = max(n_terms, 4)
    l = np.arange(1, n_terms + 1, dtype=float)
    terms = z[:, None] ** l[None, :] * l[None, :] ** (-s)
    return terms[:, ::-1].sum(axis=1)


def _snap(s):
    # near-integer orders would hit the zeta pole in the coefficients
    s = float(s)
    return float(round(s)) if _is_integer(s) else s


def _expansion(s, z=None, mu=None):
    if mu is None:
        mu = np.log(z)
    coeff = _expansion_coefficients(s)
    regular = np.polynomial.polynomial.polyval(mu, coeff)
    if _is_integer(s) and s >= 1.0:
        n = int(round(s))
        harmonic = sum(1.0 / j for j in range(1, n))
        sing = mu ** (n - 1) / math.factorial(n - 1) * (harmonic - np.log(-mu))
    else:
        sing = sp.gamma(1.0 - s) * (-mu) ** (s - 1.0)
    return regular + sing


def li(s, z):
    """Vectorised polylogarithm for ``z`` in ``[0, 1]`` without domain checks.

    Points with ``z == 1`` and ``s <= 1`` evaluate to ``inf``.
    """
    s = _snap(s)
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    out = np.empty_like(flat)
    low = flat <= SERIES_CROSSOVER
    one = flat >= 1.0
    high = ~low & ~one
    if np.any(low):
        out[low] = _series(s, flat[low])
    if np.any(high):
        out[high] = _expansion(s, flat[high])
    if np.any(one):
        out[one] = sp.zeta(s) if s > 1.0 else np.inf
    return out.reshape(z.shape) if z.ndim else float(out[0])


def li_exp(s, mu):
    """``Li_s(exp(mu))`` for ``mu <= 0`` given the logarithm of the argument.

    Near ``mu = 0`` this keeps full relative accuracy in ``mu`` where
    ``exp(mu)`` would round to 1.
    """
    s = _snap(s)
    mu = np.asarray(mu, dtype=float)
    flat = mu.ravel()
    out = np.empty_like(flat)
    low = flat <= math.log(SERIES_CROSSOVER)
    zero = flat >= 0.0
    high = ~low & ~zero
    if np.any(low):
        out[low] = _series(s, np.exp(flat[low]))
    if np.any(high):
        out[high] = _expansion(s, mu=flat[high])
    if np.any(zero):
        out[zero] = sp.zeta(s) if s > 1.0 else np.inf
    return out.reshape(mu.shape) if mu.ndim else float(out[0])


def polylog(s, z):
    """Polylogarithm ``Li_s(z) = sum_{l>=1} z^l / l^s`` for real ``z`` in ``[0, 1]``.

    Accepts scalars or arrays. Raises :class:`DivergentValue` at ``z = 1``
    when ``s <= 1``.
    """
    arr = np.asarray(z, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
        raise DomainError("polylog argument must lie in [0, 1]")
    if s <= 1.0 and np.any(arr == 1.0):
        raise DivergentValue(f"Li_{s}(1) diverges for s <= 1")
    return li(s, arr)


def bose_function(s, z):
    """Alias of :func:`polylog` under the name used in Bose-gas thermodynamics."""
    return polylog(s, z)
