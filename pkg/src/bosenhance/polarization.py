"""
Rayleigh versus Raman scattering of circularly polarised probe light.

A sigma+ photon on a stretched state only scatters back into the same
state (Rayleigh), so its rate carries the full enhancement ``eta``.  A
sigma- photon can also end in other ground states (Raman); those final
states are empty and are not enhanced.  With Rayleigh fraction ``gamma``

    R_minus = m (gamma eta R + a (1 - gamma) R)

where ``m`` is the reduced matrix element (1/3) and ``a`` the angular
factor of pi versus sigma emission into the detector (2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import DegenerateFit, DomainError


@dataclass(frozen=True)
class PolarizationModel:
    gamma: float = 1.0 / 3.0
    matrix_prefactor: float = 1.0 / 3.0
    angular_pi_factor: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma}")


def rate_sigma_minus(eta, R, model=PolarizationModel()):
    """Scattering rate for sigma- light given the sigma+ enhancement ``eta`` and base rate ``R``."""
    g = model.gamma
    return model.matrix_prefactor * (g * eta * R + model.angular_pi_factor * (1 - g) * R)


def sigma_minus_enhancement(eta, gamma=1.0 / 3.0, angular_pi_factor=2.0):
    """Enhancement of sigma- scattering, ``(gamma eta + 2 (1-gamma)) / (gamma + 2 (1-gamma))``.

    For ``gamma = 1/3`` this is ``(4 + eta) / 5``.
    """
    gamma = np.asarray(gamma, dtype=float)
    if not np.all((gamma >= 0.0) & (gamma <= 1.0)):
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    a = angular_pi_factor
    return (gamma * np.asarray(eta, dtype=float) + a * (1 - gamma)) / (gamma + a * (1 - gamma))


def fit_gamma(eta, observed, weights=None, angular_pi_factor=2.0):
    """Weighted least-squares estimate of the Rayleigh fraction ``gamma``.

    Minimises ``sum w (E_i - sigma_minus_enhancement(eta_i, gamma))^2`` with
    ``eta`` treated as exact.  The rearranged relation
    ``a (E - 1) = gamma (eta - a + (a - 1) E)`` is linear in ``gamma`` and
    supplies the starting value.  Returns ``(gamma_hat, stderr)``; the
    standard error comes from the Jacobian scaled by the reduced residual
    variance.
    """
    eta = np.asarray(eta, dtype=float)
    E = np.asarray(observed, dtype=float)
    w = np.ones_like(eta) if weights is None else np.asarray(weights, dtype=float)
    if not (eta.shape == E.shape == w.shape) or eta.ndim != 1:
        raise DomainError("eta, observed and weights must be 1-D arrays of equal length")
    if eta.size < 2:
        raise DegenerateFit("need at least two points")
    if np.any(w < 0) or not np.any(w > 0):
        raise DomainError("weights must be non-negative and not all zero")
    if np.ptp(eta) == 0:
        raise DegenerateFit("all eta equal: gamma is not identifiable")
    a = angular_pi_factor
    x = eta - a + (a - 1) * E
    y = a * (E - 1)
    sxx = float(np.sum(w * x * x))
    if sxx == 0:
        raise DegenerateFit("design has no spread")
    start = float(np.sum(w * x * y) / sxx)
    # the denominator a - (a-1) gamma must stay positive
    upper = a / (a - 1) if a > 1 else np.inf
    start = min(max(start, -1.0), 0.5 * (1 + upper) if np.isfinite(upper) else start)
    sw = np.sqrt(w)

    def resid(g):
        return sw * (_model(eta, g[0], a) - E)

    sol = least_squares(resid, [start], bounds=([-np.inf], [upper - 1e-9]),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    gamma = float(sol.x[0])
    J = sol.jac[:, 0]
    jtj = float(J @ J)
    if jtj == 0:
        raise DegenerateFit("model is insensitive to gamma at these points")
    dof = eta.size - 1
    s2 = float(sol.fun @ sol.fun) / dof
    return gamma, float(np.sqrt(s2 / jtj))


def _model(eta, gamma, a):
    return (gamma * eta + a * (1 - gamma)) / (gamma + a * (1 - gamma))
