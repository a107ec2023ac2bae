"""
Ideal quantum gases: fugacity, condensate fraction and the static structure
factor ``S(q) = 1 +/- <n(r, p+q)>`` averaged over phase space.

Reduced units throughout: energies in ``kB Tc``, momenta scaled so that the
kinetic energy is ``p**2`` and the harmonic potential is ``r**2``. The recoil
shifts the momentum by ``kappa`` along one axis, so the occupation of the
recoil state at the trap centre is ``1 / (exp(kappa**2 / t) - 1)``.

For a density of states ``eps**x`` every energy except the one along the
recoil direction can be lumped into a single variable ``a`` with weight
``a**(x - 1/2)``; the phase-space average is then a double integral over
``a`` and the longitudinal momentum ``y``. The ``a`` integral of a product of
two Bose factors has a closed form in polylogarithms, which leaves a single
quadrature over ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergentOccupation, DivergentValue, DomainError
from .numerics import Tolerance, find_root, integrate_1d
from .specfun import gamma_fn, li, li_exp, polylog, zeta
from .trap import RecoilSpec, Statistics

# Bose factors are integrated up to this energy (in units of kB T)
ENERGY_CUTOFF = 40.0

SF_TOL = Tolerance(abs_tol=1e-12, rel_tol=1e-9, max_iter=2000)


class DivergentStructureFactor(DivergentValue, DomainError):
    """kappa = 0 below Tc: the condensate term 2 f n(0, q) is infinite."""


@dataclass(frozen=True)
class GasState:
    """Thermodynamic state of an ideal gas in a trap with DOS exponent ``x``.

    ``t`` is T/Tc; for fermions (no condensation) it just sets the energy
    scale and ``z`` is given directly.
    """

    t: float
    z: float
    f: float = 0.0
    N: float = 1.0
    x: float = 2.0

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError("t must be positive")
        if not 0.0 <= self.f <= 1.0:
            raise DomainError("condensate fraction must lie in [0, 1]")
        if self.f > 0 and self.z != 1.0:
            raise DomainError("a condensate requires z = 1")

    @property
    def thermal_fraction(self):
        return 1.0 - self.f

    @classmethod
    def bose(cls, t, x=2.0, N=1.0):
        """Equilibrium Bose gas at reduced temperature ``t``."""
        if not t > 0:
            raise DomainError("t must be positive")
        if x <= 0:
            raise DomainError("no condensation for x <= 0; construct GasState with z directly")
        if t <= 1.0:
            return cls(t=t, z=1.0, f=condensate_fraction(t, x), N=N, x=x)
        return cls(t=t, z=fugacity(t, x), f=0.0, N=N, x=x)


@dataclass(frozen=True)
class EnhancementResult:
    """Structure factor with its decomposition.

    ``term_single`` is the uncorrelated single-particle term (1),
    ``term_bec_thermal`` the condensate<->thermal scattering and
    ``term_thermal_thermal`` scattering within the thermal cloud. The
    sign of the last is negative for fermions. ``factors`` records any
    multiplicative corrections already applied to the enhancement terms.
    """

    S: float
    term_single: float
    term_bec_thermal: float
    term_thermal_thermal: float
    factors: tuple = ()

    @property
    def enhancement(self):
        return self.S - self.term_single

    @classmethod
    def from_terms(cls, bec_thermal, thermal_thermal, factors=()):
        return cls(1.0 + bec_thermal + thermal_thermal, 1.0, bec_thermal, thermal_thermal,
                   tuple(factors))

    def scaled(self, factor, label):
        """Multiply the enhancement terms (not the single-particle 1) by ``factor``."""
        return EnhancementResult.from_terms(
            self.term_bec_thermal * factor,
            self.term_thermal_thermal * factor,
            self.factors + ((label, factor),),
        )


def condensate_fraction(t, x=2.0):
    """Ideal-gas condensate fraction ``max(0, 1 - t**(1+x))``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    return max(0.0, 1.0 - t ** (1.0 + x))


def fugacity(t, x=2.0):
    """Fugacity above Tc from ``g_{1+x}(z) = zeta(1+x) / t**(1+x)``."""
    if not t > 1.0:
        raise DomainError("fugacity is pinned at 1 for t <= 1")
    if not x > 0:
        raise DomainError("x must be positive for a critical temperature to exist")
    s = 1.0 + x
    target = zeta(s) / t ** s
    # z <= g_s(z) <= zeta(s) z brackets the root
    lo = target / zeta(s)
    hi = min(target, 1.0)
    if hi == lo:
        return hi
    tol = Tolerance(abs_tol=1e-17 * lo, rel_tol=1e-15, max_iter=200)
    return find_root(lambda z: li(s, z) - target, lo, hi, tol)


def occupation(t, z, r, p, statistics=Statistics.BOSE):
    """Occupation ``1 / (exp((p^2 + r^2)/t) / z -+ 1)`` of a harmonic-trap phase-space cell.

    ``r`` and ``p`` are magnitudes in reduced units (arrays broadcast).
    """
    energy = (np.asarray(r, dtype=float) ** 2 + np.asarray(p, dtype=float) ** 2) / t
    if statistics is Statistics.BOSE:
        if z == 1.0 and np.any(energy == 0):
            raise DivergentOccupation("Bose occupation diverges at zero energy when z = 1")
        out = 1.0 / (np.exp(energy) / z - 1.0)
    else:
        out = 1.0 / (np.exp(energy) / z + 1.0)
    return float(out) if np.ndim(out) == 0 else out


def recoil_occupation(t, kappa):
    """Thermal occupation of the recoil state at the trap centre with mu = 0."""
    e = kappa * kappa / t
    if e == 0:
        raise DivergentOccupation("recoil state has zero energy")
    return 1.0 / math.expm1(e)


# ---------------------------------------------------------------------------
# thermal-thermal term

def _li_tail(s, mu):
    # Li_s(e^mu) - e^mu without cancellation for small arguments
    mu = np.asarray(mu, dtype=float)
    w = np.exp(mu)
    out = li_exp(s, mu) - w
    small = w < 1e-3
    if np.any(small):
        ws = w[small]
        l = np.arange(2, 12, dtype=float)
        out[small] = (ws[:, None] ** l * l ** (-s)).sum(axis=1)
    return out


def _pair_kernel(s, z, shift):
    """Integrand in ``u`` (longitudinal momentum centred between the two states).

    Equals ``int da a^(s-1) n(a + c1) n(a + c2) / Gamma(s)`` with
    ``c1 = (u - shift/2)**2`` and ``c2 = (u + shift/2)**2``.
    """
    half = 0.5 * shift
    log_z = math.log(z)

    def kernel(u):
        u = np.asarray(u, dtype=float)
        c1 = (u - half) ** 2
        c2 = (u + half) ** 2
        delta = c2 - c1
        out = np.empty_like(u)
        near = np.abs(delta) < 1e-6
        far = ~near
        if np.any(far):
            l1 = _li_tail(s, log_z - c1[far])
            l2 = _li_tail(s, log_z - c2[far])
            out[far] = (l1 - np.exp(delta[far]) * l2) / np.expm1(delta[far])
        if np.any(near):
            mu = log_z - 0.5 * (c1[near] + c2[near])
            out[near] = li_exp(s - 1.0, mu) - li_exp(s, mu)
        return out

    return kernel


def thermal_pair_integral(x, z, shift, tol=SF_TOL):
    """``int da a^(x-1/2) int dy n(a+y^2) n(a+(y+shift)^2) / (sqrt(pi) Gamma(x+1/2))``.

    Energies in units of kB T; ``shift`` is the recoil in the same units.
    """
    s = x + 0.5
    if not s > 0:
        raise DomainError("x must exceed -1/2")
    kernel = _pair_kernel(s, z, shift)
    half = 0.5 * shift
    upper = half + math.sqrt(ENERGY_CUTOFF)
    points = sorted({p for p in (half, 2 * half, 4 * half, 0.25, 1.0, 2.0) if 0 < p < upper})
    val = integrate_1d(kernel, 0.0, upper, tol, points)
    return 2.0 * val / math.sqrt(math.pi)


def _fermi_pair_integral(x, z, shift, tol):
    # nested route; Fermi factors are bounded so no singular points
    s = x + 0.5
    upper = ENERGY_CUTOFF + math.log(max(z, 1.0))
    ymax = math.sqrt(upper) + shift

    def nf(e):
        return 1.0 / (np.exp(e) / z + 1.0)

    def inner(a):
        def g(y):
            return nf(a + y * y) * nf(a + (y + shift) ** 2)
        return integrate_1d(g, -ymax, ymax, tol, (-shift, -0.5 * shift, 0.0))

    outer = np.vectorize(lambda a: a ** (s - 1.0) * inner(a))
    num = integrate_1d(outer, 0.0, upper, tol, (1.0,))
    den = integrate_1d(lambda e: e ** x * nf(e), 0.0, upper, tol, (1.0,))
    # folding the y direction back into the energy density of states
    return num * gamma_fn(1.0 + x) / (math.sqrt(math.pi) * gamma_fn(s) * den)


def nested_pair_integral(x, z, shift, tol=Tolerance(abs_tol=1e-10, rel_tol=1e-7, max_iter=2000)):
    """Direct two-dimensional evaluation of :func:`thermal_pair_integral` (cross-check).

    Needs ``z < 1`` when ``x <= 1``: the zero-energy pole is then too strong
    for the nested quadrature.
    """
    s = x + 0.5
    upper = ENERGY_CUTOFF
    ymax = math.sqrt(upper) + shift

    def nb(e):
        return 1.0 / (np.exp(e) / z - 1.0)

    def inner(a):
        def g(y):
            return nb(a + y * y) * nb(a + (y + shift) ** 2)
        return integrate_1d(g, -ymax, ymax, tol, (-shift, -0.5 * shift, 0.0))

    outer = np.vectorize(lambda a: a ** (s - 1.0) * inner(a))
    points = tuple(p for p in (shift * shift, 0.1, 1.0) if 0 < p < upper)
    val = integrate_1d(outer, 0.0, upper, tol, points)
    return val / (math.sqrt(math.pi) * gamma_fn(s))


# ---------------------------------------------------------------------------
# structure factor

def structure_factor(state, recoil, tol=SF_TOL, method="reduced"):
    """Static structure factor of an ideal gas.

    Above Tc only thermal-thermal scattering contributes. Below Tc the
    condensate adds ``2 f n(0, q)`` and the thermal cloud (now at ``mu = 0``)
    carries a weight ``1 - f``.

    ``method="nested"`` evaluates the double integral directly instead of
    the closed-form ``a`` integration; it is slower and meant for checks.
    """
    if not isinstance(recoil, RecoilSpec):
        recoil = RecoilSpec(float(recoil))
    t, z, x, f = state.t, state.z, state.x, state.f
    kappa = recoil.kappa
    shift = kappa / math.sqrt(t)

    if recoil.statistics is Statistics.FERMI:
        if f > 0:
            raise DomainError("fermions do not condense")
        avg = _fermi_pair_integral(x, z, shift, Tolerance(1e-10, 1e-8, 2000))
        return EnhancementResult.from_terms(0.0, -avg)

    if kappa == 0 and t <= 1.0:
        raise DivergentStructureFactor("S(q=0) diverges at and below Tc; use the closed form")
    if kappa == 0 and z < 1.0 and method == "reduced":
        return EnhancementResult.from_terms(0.0, enhancement_closed_form_k0(z, x) - 1.0)

    pair = thermal_pair_integral if method == "reduced" else nested_pair_integral
    weighted = pair(x, z, shift, tol) if method == "reduced" else pair(x, z, shift)
    norm = zeta(x + 1.0) if z == 1.0 else li(x + 1.0, z)
    term_tt = (1.0 - f) * weighted / norm
    term_bt = 2.0 * f * recoil_occupation(t, kappa) if f > 0 else 0.0
    return EnhancementResult.from_terms(term_bt, term_tt)


def structure_factor_at(t, kappa, x=2.0, tol=SF_TOL):
    """Convenience wrapper: Bose gas in equilibrium at ``t`` with recoil ``kappa``."""
    return structure_factor(GasState.bose(t, x), RecoilSpec(kappa), tol)


def enhancement_closed_form_k0(z, x):
    """``S(q=0) = g_x(z) / g_{1+x}(z)`` (single-particle term included)."""
    if not 0.0 <= z <= 1.0:
        raise DomainError("fugacity must lie in [0, 1]")
    if z == 0.0:
        return 1.0
    if z == 1.0:
        if x <= 1.0:
            raise DivergentValue(f"g_x(1) diverges for x = {x} <= 1")
        return zeta(x) / zeta(1.0 + x)
    if z < 1e-8:
        # leading terms of both series; avoids 0/0 noise
        return (1 + z / 2 ** x) / (1 + z / 2 ** (1 + x))
    return float(polylog(x, z) / polylog(1.0 + x, z))


def enhancement_asymptote_small_kappa(kappa, x):
    """Leading small-kappa behaviour of ``S`` at Tc for ``0 < x < 1``.

    ``2 pi^(3/2) kappa^(2x-2) / (4^x sin(pi x) Gamma(x+1/2) zeta(x+1))``.
    ``S`` and ``S - 1`` share this leading term; the next correction is a
    kappa-independent constant, which is why ``S`` approaches the
    asymptote faster than ``S - 1`` for x close to 1.
    """
    if not 0.0 < x < 1.0:
        raise DomainError("asymptote defined for 0 < x < 1 (x = 1 is marginal)")
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    return asymptote_prefactor(x) * kappa ** (2 * x - 2)


def asymptote_prefactor(x):
    return (2 * math.pi ** 1.5
            / (4 ** x * math.sin(math.pi * x) * gamma_fn(x + 0.5) * zeta(x + 1.0)))


def naive_psd_enhancement(psd=None):
    """``1 + n lambda^3 / 2^(3/2)``: the non-degenerate average PSD extrapolated.

    With ``psd = zeta(3/2)`` (the homogeneous critical point) this is the
    naive estimate of the enhancement at Tc.
    """
    if psd is None:
        psd = zeta(1.5)
    return 1.0 + psd / 2 ** 1.5


# ---------------------------------------------------------------------------
# brute-force oracle

def phase_space_oracle(state, recoil, grid=96):
    """Midpoint-rule phase-space sum for the harmonic (x=2) or box (x=1/2) trap.

    The harmonic case integrates ``d^3r d^3p`` using spherical symmetry in
    ``r`` and cylindrical symmetry of ``p`` about the recoil axis; the box
    case drops the spatial integral. The condensate term is added
    analytically.
    """
    if grid < 32:
        raise DomainError("grid must have at least 32 points per axis")
    if not isinstance(recoil, RecoilSpec):
        recoil = RecoilSpec(float(recoil))
    t, z, f = state.t, state.z, state.f
    kappa = recoil.kappa
    sign = recoil.statistics.sign

    def occ(e):
        return 1.0 / (np.exp(e / t) / z - sign)

    pmax = math.sqrt(ENERGY_CUTOFF * t)
    h_perp = pmax / grid
    p_perp = (np.arange(grid) + 0.5) * h_perp
    y_lo, y_hi = -pmax - kappa, pmax
    h_y = (y_hi - y_lo) / grid
    p_y = y_lo + (np.arange(grid) + 0.5) * h_y

    if abs(state.x - 2.0) < 1e-12:
        h_r = pmax / grid
        r = (np.arange(grid) + 0.5) * h_r
        R2 = (r ** 2)[:, None, None]
        w = (4 * np.pi * r ** 2 * h_r)[:, None, None]
        P2 = (p_perp ** 2)[None, :, None]
        wp = (2 * np.pi * p_perp * h_perp)[None, :, None]
        Y = p_y[None, None, :]
    elif abs(state.x - 0.5) < 1e-12:
        R2 = 0.0
        w = 1.0
        P2 = (p_perp ** 2)[:, None]
        wp = (2 * np.pi * p_perp * h_perp)[:, None]
        Y = p_y[None, :]
    else:
        raise DomainError("oracle implemented for the 3D harmonic trap and 3D box only")

    base = R2 + P2
    n1 = occ(base + Y ** 2)
    n2 = occ(base + (Y + kappa) ** 2)
    weight = w * wp * h_y
    avg = float(np.sum(weight * n1 * n2) / np.sum(weight * n1))
    term_tt = sign * (1.0 - f) * avg
    term_bt = 2.0 * f * recoil_occupation(t, kappa) if f > 0 else 0.0
    return 1.0 + term_bt + term_tt


# ---------------------------------------------------------------------------
# homogeneous pair function for local-density sums

class LocalPairTable:
    """``lambda^3 int d^3p/h^3 n(p) n(p+q)`` for a uniform Bose gas as a function of ``beta mu``.

    Tabulated once per recoil ``shift`` (in units of sqrt(kB T)) on
    ``v = sqrt(-beta mu)`` and interpolated; beyond the table the
    Boltzmann form ``z^2 exp(-shift^2/2) / 2^(3/2)`` is used.
    """

    V_MAX = 7.0

    def __init__(self, shift, n_nodes=160):
        from scipy.interpolate import CubicSpline

        self.shift = float(shift)
        # nodes cluster toward v = 0 where the fugacity approaches 1
        v = self.V_MAX * np.linspace(0.0, 1.0, n_nodes) ** 1.5
        vals = np.array([thermal_pair_integral(0.5, math.exp(-vi * vi), self.shift)
                         for vi in v])
        self._boltzmann = math.exp(-0.5 * self.shift ** 2) / 2 ** 1.5
        # ln(P / z^2) is smooth in v
        self._spline = CubicSpline(v, np.log(vals) + 2 * v * v)

    def __call__(self, beta_mu):
        beta_mu = np.minimum(np.asarray(beta_mu, dtype=float), 0.0)
        v = np.sqrt(-beta_mu)
        out = np.empty_like(v)
        inside = v <= self.V_MAX
        out[inside] = np.exp(self._spline(v[inside]) - 2 * v[inside] ** 2)
        out[~inside] = np.exp(2 * beta_mu[~inside]) * self._boltzmann
        return out


_TABLES = {}


def local_pair_table(shift):
    key = round(float(shift), 12)
    table = _TABLES.get(key)
    if table is None:
        table = _TABLES[key] = LocalPairTable(key)
    return table
