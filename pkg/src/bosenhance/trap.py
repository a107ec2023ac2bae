"""
Power-law trap geometry, critical temperature and recoil normalisation.

A trap ``V(r) ~ r**alpha`` in ``d`` dimensions has a density of states
``g(eps) ~ eps**x`` with ``x = d/2 + d/alpha - 1``; ``alpha = inf`` is a box.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from . import constants as C
from .errors import DomainError
from .specfun import zeta


class Statistics(enum.Enum):
    BOSE = "bose"
    FERMI = "fermi"

    @property
    def sign(self):
        return 1 if self is Statistics.BOSE else -1


def dos_exponent(d, alpha):
    """Density-of-states exponent for a ``d``-dimensional ``r**alpha`` trap."""
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d}")
    if not alpha > 0:
        raise DomainError(f"trap power must be positive, got {alpha}")
    spatial = 0.0 if math.isinf(alpha) else d / alpha
    return d / 2 + spatial - 1


@dataclass(frozen=True)
class TrapSpec:
    d: int = 3
    alpha: float = 2.0
    omega: float | None = None
    length: float | None = None

    def __post_init__(self):
        dos_exponent(self.d, self.alpha)  # validates
        if self.omega is not None and not self.omega > 0:
            raise DomainError("trap frequency must be positive")

    @property
    def x(self):
        return dos_exponent(self.d, self.alpha)

    @property
    def is_harmonic(self):
        return self.d == 3 and self.alpha == 2

    @property
    def is_box(self):
        return self.d == 3 and math.isinf(self.alpha)

    @classmethod
    def harmonic(cls, omega=None):
        return cls(3, 2.0, omega=omega)

    @classmethod
    def box(cls, length=None):
        return cls(3, math.inf, length=length)


@dataclass(frozen=True)
class RecoilSpec:
    kappa: float
    statistics: Statistics = Statistics.BOSE

    def __post_init__(self):
        if not self.kappa >= 0:
            raise DomainError(f"kappa must be non-negative, got {self.kappa}")


class EnhancementClass(enum.Enum):
    BOUNDED = "bounded"
    DIVERGES_AT_TC = "diverges_at_tc"
    BOUNDED_ABOVE_TC = "bounded_above_tc_by_zeta_ratio"


@dataclass(frozen=True)
class RegimeReport:
    x: float
    has_bec: bool
    enhancement_class: EnhancementClass
    # divergence exponent of kappa for DIVERGES_AT_TC, zeta(x)/zeta(1+x) for BOUNDED_ABOVE_TC
    value: float | None = field(default=None)

    def describe(self):
        if self.enhancement_class is EnhancementClass.BOUNDED:
            return "bounded"
        if self.enhancement_class is EnhancementClass.DIVERGES_AT_TC:
            return f"diverges as kappa^{self.value:g} when T->Tc"
        return f"bounded by zeta(x)/zeta(1+x) = {self.value:.10g} for T >= Tc"


def classify_regime(x):
    """Three-way classification of the kappa -> 0 enhancement by DOS exponent."""
    x = float(x)
    if x <= 0:
        return RegimeReport(x, False, EnhancementClass.BOUNDED)
    if x <= 1:
        return RegimeReport(x, True, EnhancementClass.DIVERGES_AT_TC, 2 * x - 2)
    return RegimeReport(x, True, EnhancementClass.BOUNDED_ABOVE_TC, zeta(x) / zeta(1 + x))


def mean_frequency(omega_x, omega_y, omega_z):
    """Geometric mean trap frequency used in place of an anisotropic trap."""
    return (omega_x * omega_y * omega_z) ** (1.0 / 3.0)


def critical_temperature_harmonic(N, omega):
    """Ideal-gas BEC temperature ``(hbar omega / kB) (N / zeta(3))**(1/3)`` in kelvin."""
    if not (N >= 1 and omega > 0):
        raise DomainError("N must be >= 1 and omega > 0")
    return C.hbar * omega / C.kB * (N / zeta(3.0)) ** (1.0 / 3.0)


def momentum_transfer(wavelength, angle=math.pi / 2):
    """|q| = 2 k sin(angle/2) for light of ``wavelength`` scattered by ``angle``."""
    if not (wavelength > 0 and 0 < angle <= math.pi):
        raise DomainError("wavelength must be positive and angle in (0, pi]")
    return 2 * (2 * math.pi / wavelength) * math.sin(angle / 2)


def kappa_from_momentum_transfer(q, mass, T_c):
    """kappa = sqrt(hbar^2 q^2 / (2 m kB T_c)).

    At 90 degrees ``q = sqrt(2) k`` and this is ``sqrt(hbar^2 k^2 / (m kB T_c))``.
    """
    if not (q > 0 and mass > 0 and T_c > 0):
        raise DomainError("q, mass and T_c must be positive")
    return math.sqrt((C.hbar * q) ** 2 / (2 * mass * C.kB * T_c))


def kappa_from_physical(wavelength, mass, T_c, angle=math.pi / 2):
    return kappa_from_momentum_transfer(momentum_transfer(wavelength, angle), mass, T_c)
