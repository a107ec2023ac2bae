"""
Interacting Bose gas in an isotropic harmonic trap, in the local density
approximation.

Three density models are provided: the ideal gas, the semi-ideal gas (a
Thomas-Fermi condensate plus an ideal thermal cloud in the condensate's
mean field) and the Hartree-Fock gas solved self-consistently at every
radius.  On top of these sit the pair-correlation corrections and the
interacting structure factors.

Everything is in SI units.  Internally the local problem is reduced to
``nu = n lambda^3`` and ``gamma = beta g / lambda^3``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special as sp

from . import constants as C
from .errors import (
    AmbiguousBranch,
    DomainError,
    ModelMismatch,
    NoBracket,
    NonConvergence,
    NormalizationFailure,
)
from .ideal import (
    EnhancementResult,
    local_pair_table,
    recoil_occupation,
    structure_factor_at,
)
from .numerics import Tolerance, bisect_array, find_root
from .specfun import li, li_exp, zeta
from .trap import RecoilSpec

ZETA_32 = zeta(1.5)
NORMALIZATION_RTOL = 5e-3
GRID_POINTS = 600
# local solver: bisection steps, enough for double precision on any bracket
_BISECT_STEPS = 80


class Model(enum.Enum):
    IDEAL = "ideal"
    SEMI_IDEAL = "semi_ideal"
    HARTREE_FOCK = "hartree_fock"


class Regime(enum.Enum):
    HIGH_T = "high_t"
    NEAR_CRITICAL = "near_critical"
    AUTO = "auto"


class SFModel(enum.Enum):
    IDEAL = "ideal"
    MF_ONLY = "mf_only"
    MF_PLUS_OVERALL_SUPPRESSION = "mf_plus_overall_suppression"
    FULL_INTERACTING = "full_interacting"
    SEMI_IDEAL_BELOW_TC = "semi_ideal_below_tc"


def thermal_wavelength(T, m=C.mass_na23):
    """``h / sqrt(2 pi m kB T)``."""
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T}")
    return C.h / math.sqrt(2 * math.pi * m * C.kB * T)


@dataclass(frozen=True)
class InteractionSpec:
    a: float
    omega: float = C.REFERENCE_OMEGA
    N: float = C.REFERENCE_ATOM_NUMBER
    m: float = C.mass_na23

    def __post_init__(self):
        if not self.a >= 0:
            raise DomainError("only repulsive interactions (a >= 0) are supported")
        if not (self.omega > 0 and self.N >= 1 and self.m > 0):
            raise DomainError("omega, N and m must be positive")

    @classmethod
    def reference(cls):
        """Sodium, a = 85 a0, N = 4e5, omega = 2 pi 2.7 kHz."""
        return cls(C.NA23_SCATTERING_LENGTH)

    @property
    def g(self):
        return 4 * math.pi * C.hbar ** 2 * self.a / self.m

    @property
    def a_ho(self):
        return math.sqrt(C.hbar / (self.m * self.omega))

    @property
    def T_c(self):
        """Ideal-gas critical temperature."""
        return C.hbar * self.omega / C.kB * (self.N / zeta(3.0)) ** (1.0 / 3.0)

    def potential(self, r):
        return 0.5 * self.m * self.omega ** 2 * np.asarray(r, dtype=float) ** 2

    def thomas_fermi_mu(self, N0):
        """``(hbar omega / 2) (15 N0 a / a_ho)^(2/5)``."""
        return 0.5 * C.hbar * self.omega * (15 * N0 * self.a / self.a_ho) ** 0.4

    def with_(self, **changes):
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class DensityProfile:
    r: np.ndarray
    n_total: np.ndarray
    n_bec: np.ndarray
    n_thermal: np.ndarray
    model: Model
    mu: float
    T: float
    # beta * (effective chemical potential of thermal atoms), per radius; <= 0
    beta_mu_local: np.ndarray = field(repr=False)
    spec: InteractionSpec = field(repr=False)

    @property
    def weights(self):
        return _radial_weights(self.r)

    @property
    def N(self):
        return float(self.weights @ self.n_total)

    @property
    def N0(self):
        return float(self.weights @ self.n_bec)

    @property
    def condensate_fraction(self):
        return self.N0 / self.N


@dataclass(frozen=True)
class CorrelationResult:
    xi: float
    suppression_high_T: float
    suppression_local: float


# ---------------------------------------------------------------------------
# radial grid

def _radial_grid(r_max, n=GRID_POINTS):
    # geometric from 1e-4 r_max, plus the origin
    return np.concatenate([[0.0], np.geomspace(1e-4 * r_max, r_max, n - 1)])


def _radial_weights(r):
    """Trapezoid weights for ``4 pi int r^2 f(r) dr``."""
    dr = np.diff(r)
    w = np.zeros_like(r)
    w[:-1] += 0.5 * dr
    w[1:] += 0.5 * dr
    return 4 * math.pi * r * r * w


def _grid_for(spec, T):
    kT = C.kB * T
    mu_cap = spec.thomas_fermi_mu(spec.N) if spec.a > 0 else 0.0
    r_max = math.sqrt(2 * (mu_cap + 40 * kT) / (spec.m * spec.omega ** 2))
    r = _radial_grid(r_max)
    r_tf = math.sqrt(2 * mu_cap / (spec.m * spec.omega ** 2))
    if 0 < r_tf < 1e-2 * r_max:
        # weak coupling shrinks the condensate below the base resolution
        r = np.union1d(r, np.geomspace(1e-3 * r_tf, r_tf, 120))
    return r


# ---------------------------------------------------------------------------
# Hartree-Fock local problem

def _hf_thermal(m_loc, gamma):
    """Thermal branch ``nu = g_3/2(exp(m - 2 gamma nu))``; nan where no solution."""
    m_loc = np.asarray(m_loc, dtype=float)
    if gamma == 0.0:
        out = np.full_like(m_loc, np.nan)
        ok = m_loc <= 0
        out[ok] = li_exp(1.5, m_loc[ok])
        return out
    lo = np.maximum(m_loc, 0.0) / (2 * gamma)  # keeps the fugacity <= 1
    hi = np.maximum(lo, ZETA_32)
    ok = lo <= ZETA_32
    out = np.full_like(m_loc, np.nan)
    if np.any(ok):
        m = m_loc[ok]

        def resid(nu):
            return nu - li_exp(1.5, np.minimum(m - 2 * gamma * nu, 0.0))

        out[ok] = bisect_array(resid, lo[ok], hi[ok], _BISECT_STEPS)
    return out


def _hf_condensed(m_loc, gamma):
    """Largest root of ``m = gamma nu0 + 2 gamma g_3/2(exp(-gamma nu0))``; nan if none."""
    m_loc = np.asarray(m_loc, dtype=float)
    out = np.full_like(m_loc, np.nan)
    if gamma == 0.0:
        return out
    # minimum of the left-hand side: 2 gamma g_1/2(exp(-gamma nu0*)) = 1
    x_star = _condensed_turning_point(gamma)
    nu_star = x_star / gamma
    lhs_min = x_star + 2 * gamma * li_exp(1.5, -x_star)
    ok = m_loc > lhs_min
    if np.any(ok):
        m = m_loc[ok]

        def resid(nu0):
            return gamma * nu0 + 2 * gamma * li_exp(1.5, -gamma * nu0) - m

        out[ok] = bisect_array(resid, np.full_like(m, nu_star), m / gamma, _BISECT_STEPS)
    return out


@lru_cache(maxsize=64)
def _condensed_turning_point(gamma):
    # x = gamma nu0 with 2 gamma g_1/2(exp(-x)) = 1; g_1/2(exp(-x)) falls monotonically
    def h(x):
        return 2 * gamma * li_exp(0.5, -x) - 1.0

    hi = 1.0
    while h(hi) > 0:
        hi *= 4.0
    return find_root(h, 1e-300, hi, Tolerance(1e-300, 1e-14, 500))


def _hf_local(m_loc, gamma, strict=False):
    """Return ``(nu, nu0)`` arrays for local ``beta mu`` values."""
    m_loc = np.atleast_1d(np.asarray(m_loc, dtype=float))
    nu0 = _hf_condensed(m_loc, gamma)
    condensed = np.isfinite(nu0)
    thermal = np.full_like(m_loc, np.nan)
    need = ~condensed | strict
    if np.any(need):
        thermal[need] = _hf_thermal(m_loc[need], gamma)
    if strict and np.any(condensed & np.isfinite(thermal)):
        raise AmbiguousBranch("both the condensed and the thermal branch have solutions")
    if np.any(~condensed & ~np.isfinite(thermal)):
        raise NonConvergence("no Hartree-Fock solution at some local chemical potentials")
    nu_th_cond = li_exp(1.5, -gamma * np.where(condensed, nu0, 0.0))
    nu = np.where(condensed, nu0 + nu_th_cond, thermal)
    return nu, np.where(condensed, nu0, 0.0)


def hf_local_solve(mu_local, T, spec, strict=False):
    """Hartree-Fock densities ``(n, n0)`` in m^-3 at local chemical potential ``mu_local``.

    The condensed branch (``mu = g n0 + 2 g n_th``, largest root) is taken
    whenever it exists; otherwise the thermal branch
    ``n = g_3/2(exp(beta (mu - 2 g n))) / lambda^3``.  With ``strict=True``
    a point where both branches exist raises :class:`AmbiguousBranch`.
    """
    lam = thermal_wavelength(T, spec.m)
    beta = 1.0 / (C.kB * T)
    gamma = beta * spec.g / lam ** 3
    scalar = np.ndim(mu_local) == 0
    nu, nu0 = _hf_local(beta * np.asarray(mu_local, dtype=float), gamma, strict)
    n, n0 = nu / lam ** 3, nu0 / lam ** 3
    if scalar:
        return float(n[0]), float(n0[0])
    return n, n0


def hf_residuals(n, n0, mu_local, T, spec):
    """Relative residuals of the two Hartree-Fock equations."""
    lam = thermal_wavelength(T, spec.m)
    beta = 1.0 / (C.kB * T)
    n = np.asarray(n, dtype=float)
    n0 = np.asarray(n0, dtype=float)
    n_th = n - n0
    e1 = n_th - li_exp(1.5, np.minimum(beta * (mu_local - 2 * spec.g * n), 0.0)) / lam ** 3
    # the chemical-potential equation only constrains the condensed branch
    e2 = np.where(n0 > 0, (2 * spec.g * n - spec.g * n0 - mu_local) * beta, 0.0)
    return np.abs(e1) / np.maximum(n, 1e-300), np.abs(e2)


# ---------------------------------------------------------------------------
# density profiles

def _normalize(N_of, lo, hi, target, what):
    try:
        x = find_root(lambda v: N_of(v) - target, lo, hi, Tolerance(1e-14, 1e-12, 300))
    except NoBracket as exc:
        raise NormalizationFailure(f"{what}: atom number {target:g} not bracketed") from exc
    return x


def _ideal_profile(T, spec, r):
    beta = 1.0 / (C.kB * T)
    lam = thermal_wavelength(T, spec.m)
    w = _radial_weights(r)
    bU = beta * spec.potential(r)
    saturated = float(w @ li_exp(1.5, -bU)) / lam ** 3
    if saturated >= spec.N:
        def count(bm):
            return float(w @ li_exp(1.5, bm - bU)) / lam ** 3

        bm = _normalize(count, -60.0, 0.0, spec.N, "ideal")
        n_th = li_exp(1.5, bm - bU) / lam ** 3
        n0 = np.zeros_like(r)
    else:
        bm = 0.0
        n_th = li_exp(1.5, -bU) / lam ** 3
        N0 = spec.N - saturated
        # harmonic-oscillator ground state carries the condensate
        gauss = np.exp(-(r / spec.a_ho) ** 2)
        n0 = N0 * gauss / float(w @ gauss)
    return DensityProfile(r, n0 + n_th, n0, n_th, Model.IDEAL, bm / beta, T,
                          bm - bU, spec)


def _semi_ideal_profile(T, spec, r):
    if spec.a == 0:
        return _ideal_profile(T, spec, r)
    beta = 1.0 / (C.kB * T)
    lam = thermal_wavelength(T, spec.m)
    w = _radial_weights(r)
    U = spec.potential(r)
    g = spec.g

    def parts(N0):
        mu0 = spec.thomas_fermi_mu(N0)
        n0 = np.maximum(0.0, (mu0 - U) / g)
        bm_loc = beta * (mu0 - U - 2 * g * n0)
        return mu0, n0, bm_loc, li_exp(1.5, np.minimum(bm_loc, 0.0)) / lam ** 3

    saturated = float(w @ li_exp(1.5, -beta * U)) / lam ** 3
    if saturated >= spec.N:
        p = _ideal_profile(T, spec, r)
        return DensityProfile(r, p.n_total, p.n_bec, p.n_thermal, Model.SEMI_IDEAL, p.mu, T,
                              p.beta_mu_local, spec)

    def count(N0):
        _, n0, _, n_th = parts(N0)
        return float(w @ (n0 + n_th))

    N0 = _normalize(count, 1e-9 * spec.N, spec.N, spec.N, "semi-ideal")
    mu0, n0, bm_loc, n_th = parts(N0)
    return DensityProfile(r, n0 + n_th, n0, n_th, Model.SEMI_IDEAL, mu0, T,
                          np.minimum(bm_loc, 0.0), spec)


def _hf_profile(T, spec, r):
    if spec.a == 0:
        p = _ideal_profile(T, spec, r)
        return DensityProfile(r, p.n_total, p.n_bec, p.n_thermal, Model.HARTREE_FOCK, p.mu, T,
                              p.beta_mu_local, spec)
    beta = 1.0 / (C.kB * T)
    lam = thermal_wavelength(T, spec.m)
    gamma = beta * spec.g / lam ** 3
    w = _radial_weights(r)
    bU = beta * spec.potential(r)

    def count(bm):
        nu, _ = _hf_local(bm - bU, gamma)
        return float(w @ nu) / lam ** 3

    hi = beta * (spec.thomas_fermi_mu(spec.N) + 2 * spec.g * ZETA_32 / lam ** 3) + 1.0
    bm = _normalize(count, -60.0, hi, spec.N, "Hartree-Fock")
    nu, nu0 = _hf_local(bm - bU, gamma)
    n, n0 = nu / lam ** 3, nu0 / lam ** 3
    N = float(w @ n)
    if abs(N - spec.N) > NORMALIZATION_RTOL * spec.N:
        # N(mu) jumps where the condensate appears; the target can fall in the gap
        raise NormalizationFailure(
            f"Hartree-Fock atom number {N:.6g} misses {spec.N:.6g} by more than 0.5%")
    # thermal atoms see mu - U - 2 g n
    bm_loc = np.minimum(bm - bU - 2 * gamma * nu, 0.0)
    return DensityProfile(r, n, n0, n - n0, Model.HARTREE_FOCK, bm / beta, T, bm_loc, spec)


_PROFILES = {
    Model.IDEAL: _ideal_profile,
    Model.SEMI_IDEAL: _semi_ideal_profile,
    Model.HARTREE_FOCK: _hf_profile,
}


def profile(model, T, spec, r=None):
    """LDA density profile for ``model`` at temperature ``T`` normalised to ``spec.N``.

    The condensate number is solved self-consistently: below T_c the
    condensed and thermal parts together hold exactly ``spec.N`` atoms.
    """
    model = Model(model)
    if not T > 0:
        raise DomainError("temperature must be positive")
    if r is None:
        return _cached_profile(model, float(T), spec)
    return _PROFILES[model](T, spec, np.asarray(r, dtype=float))


@lru_cache(maxsize=32)
def _cached_profile(model, T, spec):
    return _PROFILES[model](T, spec, _grid_for(spec, T))


def hf_critical_temperature(spec):
    """Highest temperature at which the Hartree-Fock cloud carries a condensate.

    Under the branch rule of :func:`hf_local_solve` the condensate appears
    once the central chemical potential passes the minimum of the
    condensed-branch equation, slightly before the thermal branch
    saturates.
    """
    if spec.a == 0:
        return spec.T_c

    def excess(t):
        T = t * spec.T_c
        beta = 1.0 / (C.kB * T)
        lam = thermal_wavelength(T, spec.m)
        gamma = beta * spec.g / lam ** 3
        r = _grid_for(spec, T)
        x_star = _condensed_turning_point(gamma)
        onset = x_star + 2 * gamma * float(li_exp(1.5, -x_star))
        nu, _ = _hf_local(onset * (1 - 1e-12) - beta * spec.potential(r), gamma)
        return float(_radial_weights(r) @ nu) / lam ** 3 - spec.N

    return find_root(excess, 0.3, 1.0, Tolerance(1e-12, 1e-10, 200)) * spec.T_c


def model_critical_temperature(model, spec):
    """Critical temperature against which ``t`` is measured for a structure-factor model.

    The ideal and semi-ideal clouds condense at the ideal-gas T_c; the
    Hartree-Fock models condense at :func:`hf_critical_temperature`.
    """
    model = SFModel(model)
    if model in (SFModel.IDEAL, SFModel.SEMI_IDEAL_BELOW_TC):
        return spec.T_c
    return hf_critical_temperature(spec)


def temperature_for_fraction(model, f, spec):
    """Temperature at which the self-consistent condensate fraction of ``model`` is ``f``."""
    model = Model(model)
    if not 0 < f < 1:
        raise DomainError("condensate fraction must lie in (0, 1)")
    T_top = hf_critical_temperature(spec) if model is Model.HARTREE_FOCK else spec.T_c

    def resid(t):
        return profile(model, t * spec.T_c, spec).condensate_fraction - f

    return find_root(resid, 0.05, T_top / spec.T_c * (1 - 1e-6), Tolerance(1e-9, 1e-9, 100)) * spec.T_c


def density_ratio_scaling(spec, condensate_fraction=1.0):
    """Peak thermal density at T_c over the peak Thomas-Fermi condensate density.

    ``n_th(0) = zeta(3/2) / lambda(T_c)^3`` grows as ``N^(1/2) / a_ho^3`` and
    ``n0(0) = mu0 / g`` with ``mu0`` from ``N0 = condensate_fraction * N``,
    so the ratio scales as ``N^(1/10) (a / a_ho)^(3/5)``.
    """
    if not spec.a > 0:
        raise DomainError("density ratio needs a > 0")
    if not 0 < condensate_fraction <= 1:
        raise DomainError("condensate fraction must lie in (0, 1]")
    lam = thermal_wavelength(spec.T_c, spec.m)
    n_th = ZETA_32 / lam ** 3
    n0 = spec.thomas_fermi_mu(condensate_fraction * spec.N) / spec.g
    return n_th / n0


def overlap_reduction_factor(profile_th, recoil, T=None, profile_bec=None):
    """``int n0(r) n_th_int(r, q) d^3r / (N0 n_th(0, q))``.

    ``n_th_int`` is the thermal occupation at the recoil momentum in the
    effective potential of ``profile_th``; ``n_th(0, q)`` is the ideal-gas
    value at the trap centre.  The condensate is taken from ``profile_bec``
    when given.
    """
    bec = profile_th if profile_bec is None else profile_bec
    if not np.array_equal(bec.r, profile_th.r):
        raise DomainError("profiles must share a radial grid")
    T = profile_th.T if T is None else T
    N0 = bec.N0
    if not N0 > 0:
        raise DomainError("overlap reduction is defined below T_c only")
    # recoil energy in units of kB T
    e_rec = recoil.kappa ** 2 * profile_th.spec.T_c / T
    if e_rec == 0:
        raise DomainError("overlap reduction needs kappa > 0")
    occ_int = 1.0 / np.expm1(e_rec - profile_th.beta_mu_local)
    num = float(bec.weights @ (bec.n_bec * occ_int))
    return num / (N0 * recoil_occupation(T / profile_th.spec.T_c, recoil.kappa))


# ---------------------------------------------------------------------------
# pair correlations

def pair_correlation_g1(r, T, mu, m=C.mass_na23):
    """Normalised first-order correlation ``G1(r) / G1(0)`` of a uniform ideal Bose gas.

    ``G1(r) = sum_l exp(l beta mu) exp(-pi r^2 / (l lambda^2)) / (lambda^3 l^(3/2))``.
    The sum is taken exactly up to ``L`` and its remainder is replaced by the
    integral from ``L + 1/2`` (midpoint rule), which has a closed form in
    terms of ``erfc``; the neglected remainder is far below 1e-12 relative.
    """
    if mu > 0:
        raise DomainError("g1 needs mu <= 0")
    lam = thermal_wavelength(T, m)
    bm = mu / (C.kB * T)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("r must be non-negative")
    c = math.pi * (r / lam) ** 2
    G = _g1_sum(bm, c)
    G0 = _g1_sum(bm, np.zeros(1))[0]
    out = G / G0
    return float(out) if out.ndim == 0 else out


_G1_EXACT = 4000


def _g1_sum(bm, c):
    """``sum_l exp(l bm - c/l) l^-3/2`` for an array of ``c >= 0``."""
    c = np.asarray(c, dtype=float)
    flat = c.ravel()
    l = np.arange(1, _G1_EXACT + 1, dtype=float)
    head = np.empty_like(flat)
    for i in range(0, flat.size, 256):
        chunk = flat[i:i + 256]
        head[i:i + 256] = (np.exp(l[None, :] * bm - chunk[:, None] / l[None, :])
                           * l[None, :] ** -1.5).sum(axis=1)
    tail = _g1_tail(bm, flat, _G1_EXACT + 0.5)
    return (head + tail).reshape(c.shape)


def _g1_tail(bm, c, L):
    """``int_L^inf l^-3/2 exp(bm l - c/l) dl`` for ``bm <= 0``, ``c >= 0``."""
    b = -bm
    out = np.empty_like(c)
    zero = c == 0
    if np.any(zero):
        # int_L^inf l^-3/2 e^{-b l} dl
        if b == 0:
            out[zero] = 2 / math.sqrt(L)
        else:
            out[zero] = (2 * math.exp(-b * L) / math.sqrt(L)
                         - 2 * math.sqrt(math.pi * b) * sp.erfc(math.sqrt(b * L)))
    cc = c[~zero]
    if cc.size:
        sc = np.sqrt(cc)
        sb = math.sqrt(b)
        sL = math.sqrt(L)
        # substituting u = 1/sqrt(l) reduces it to Gaussian integrals over [0, 1/sqrt(L)]
        u0 = 1 / sL
        # 2 int_0^{u0} exp(-b/u^2 - c u^2) du, written with erfcx against overflow
        a1 = sc * u0 + sb / u0
        a2 = sc * u0 - sb / u0
        damp = np.exp(-cc * u0 * u0 - b * L)
        with np.errstate(over="ignore", invalid="ignore"):
            lower = np.where(a2 < 0, sp.erfcx(-a2) * damp,
                             np.exp(-2 * sb * sc) * sp.erfc(-a2))
        val = (math.sqrt(math.pi) / (2 * sc)) * (lower - sp.erfcx(a1) * damp)
        # both pieces underflow together far out; the tail is then zero
        out[~zero] = np.nan_to_num(val, nan=0.0)
    return out


def correlation_length(T, mu, m=C.mass_na23):
    """``xi = lambda / sqrt(-4 pi beta mu)``."""
    from .errors import DivergentValue

    if mu > 0:
        raise DomainError("correlation length needs mu <= 0")
    if mu == 0:
        raise DivergentValue("correlation length diverges at mu = 0")
    return thermal_wavelength(T, m) / math.sqrt(-4 * math.pi * mu / (C.kB * T))


# coefficients c_m = sum_{l=1}^{m-1} (l (m - l))^-1/2 of the interaction integral
_CM_EXACT = 4096


def _cm_table():
    m = np.arange(2, _CM_EXACT + 1)
    out = np.empty(m.size)
    for i, mm in enumerate(m):
        l = np.arange(1, mm)
        out[i] = np.sum(1.0 / np.sqrt(l * (mm - l)))
    return m.astype(float), out


_CM = None


def _interaction_series(bm):
    """``sum_{m>=2} exp(m bm) c_m / m``.

    Past the tabulated range ``c_m = pi + 2 zeta(1/2) m^-1/2 + d m^-3/2``
    with ``d`` matched to the last tabulated value; the remainder is then
    summed through polylogarithms.
    """
    global _CM
    if _CM is None:
        _CM = _cm_table()
    m, cm = _CM
    z_m = np.exp(m * bm)
    head = float(np.sum(z_m * cm / m))
    M = m[-1]
    if M * bm < -40:
        return head
    z12 = 2 * float(sp.zeta(0.5))
    d = (cm[-1] - math.pi - z12 / math.sqrt(M)) * M ** 1.5
    # sum_{k > M} e^{k bm} k^-s = Li_s(e^bm) - partial sum
    def rest(s):
        full = -math.log(-math.expm1(bm)) if s == 1 and bm < 0 else (
            math.inf if s == 1 else float(li_exp(s, bm)))
        return full - float(np.sum(z_m * m ** -s)) - math.exp(bm)

    return head + math.pi * rest(1) + z12 * rest(1.5) + d * rest(2.5)


def _half_minus_three_halves(bm):
    """``g_1/2(e^bm) - g_3/2(e^bm)``, summed term by term when the difference cancels."""
    if bm > -1.0:
        return float(li_exp(0.5, bm) - li_exp(1.5, bm))
    n = int(40.0 / -bm) + 2
    m = np.arange(2, n + 1, dtype=float)
    return float(np.sum(np.exp(m * bm) * (m - 1) * m ** -1.5))


def structure_suppression(T, mu, a, regime=Regime.AUTO, m=C.mass_na23):
    """Multiplicative suppression of ``S - 1`` by interactions in a uniform gas.

    ``HIGH_T``: ``1 - 8 sqrt(2) a / lambda``.
    ``NEAR_CRITICAL``: ``1 - (8 a / xi) Gamma(0, 2 lambda / xi)``.
    ``AUTO``: ``1 - int |G1|^2 (4a/r) d^3r / int |G1|^2 d^3r`` with the exact
    ``G1`` series; both integrals have closed forms term by term.
    """
    regime = Regime(regime)
    if not a >= 0:
        raise DomainError("scattering length must be >= 0")
    lam = thermal_wavelength(T, m)
    if a == 0:
        return 1.0
    if regime is Regime.HIGH_T:
        val = 1 - 8 * math.sqrt(2) * a / lam
    elif regime is Regime.NEAR_CRITICAL:
        xi = correlation_length(T, mu, m)
        val = 1 - 8 * a / xi * float(sp.exp1(2 * lam / xi))
    else:
        bm = mu / (C.kB * T)
        if bm >= 0:
            return 1.0
        # int |G1|^2 d^3r = (g_1/2 - g_3/2) / lambda^3
        sq = _half_minus_three_halves(bm)
        # int |G1|^2 (4a/r) d^3r = (8 a / lambda^4) sum_m z^m c_m / m
        val = 1 - 8 * a / lam * _interaction_series(bm) / sq
    if not val > 0:
        raise DomainError(f"interaction correction {val:.3g} <= 0: perturbative model breaks down")
    return val


def correlations(T, mu, a, m=C.mass_na23):
    return CorrelationResult(
        correlation_length(T, mu, m),
        structure_suppression(T, mu, a, Regime.HIGH_T, m),
        structure_suppression(T, mu, a, Regime.AUTO, m),
    )


# ---------------------------------------------------------------------------
# interacting structure factors

def _lda_thermal_pair(prof, shift, factor=None):
    """``int d^3r P(r) / N`` with the local pair density ``P`` (optionally weighted)."""
    lam = thermal_wavelength(prof.T, prof.spec.m)
    P = local_pair_table(shift)(prof.beta_mu_local) / lam ** 3
    if factor is not None:
        P = P * factor
    return float(prof.weights @ P) / prof.N


def _local_suppression(prof):
    bm = prof.beta_mu_local
    kT = C.kB * prof.T
    # suppression depends only on beta mu; evaluate on the distinct values
    uniq, inv = np.unique(np.round(bm, 12), return_inverse=True)
    vals = np.array([structure_suppression(prof.T, b * kT, prof.spec.a, Regime.AUTO,
                                           prof.spec.m) for b in uniq])
    return vals[inv]


def structure_factor_interacting(T, spec, recoil, model):
    """Structure factor of the trapped interacting gas at temperature ``T``.

    Above T_c: ``MF_ONLY`` averages the uniform-gas pair function over the
    Hartree-Fock cloud, ``MF_PLUS_OVERALL_SUPPRESSION`` multiplies that by
    ``1 - 8 sqrt(2) a / lambda`` and ``FULL_INTERACTING`` applies the local
    suppression at each radius, weighted by the local pair density.
    Below T_c ``SEMI_IDEAL_BELOW_TC`` uses the semi-ideal profile with the
    condensate-thermal overlap integral and the overall suppression factor.
    """
    model = SFModel(model)
    t = T / spec.T_c
    if model is SFModel.IDEAL:
        return structure_factor_at(t, recoil.kappa, 2.0)
    if recoil.kappa <= 0:
        raise DomainError("interacting structure factors need kappa > 0")
    shift = recoil.kappa / math.sqrt(t)
    high_t = structure_suppression(T, 0.0, spec.a, Regime.HIGH_T, spec.m)

    if model is SFModel.SEMI_IDEAL_BELOW_TC:
        if spec.a == 0 and t < 1:
            # a -> 0+ shrinks the Thomas-Fermi condensate to a point at the trap centre
            return structure_factor_at(t, recoil.kappa, 2.0)
        prof = profile(Model.SEMI_IDEAL, T, spec)
        if not prof.N0 > 0:
            raise ModelMismatch("semi-ideal model requested above T_c")
        e_rec = shift ** 2
        occ = 1.0 / np.expm1(e_rec - prof.beta_mu_local)
        bt = 2 * float(prof.weights @ (prof.n_bec * occ)) / prof.N
        tt = _lda_thermal_pair(prof, shift)
        return EnhancementResult.from_terms(bt, tt, ()).scaled(high_t, "pair_correlation")

    prof = profile(Model.HARTREE_FOCK, T, spec)
    if prof.N0 > 0:
        raise ModelMismatch("Hartree-Fock cloud is condensed; above-T_c models do not apply")
    if model is SFModel.MF_ONLY:
        return EnhancementResult.from_terms(0.0, _lda_thermal_pair(prof, shift), ())
    if model is SFModel.MF_PLUS_OVERALL_SUPPRESSION:
        base = EnhancementResult.from_terms(0.0, _lda_thermal_pair(prof, shift), ())
        return base.scaled(high_t, "pair_correlation")
    eta = _local_suppression(prof)
    tt_plain = _lda_thermal_pair(prof, shift)
    tt = _lda_thermal_pair(prof, shift, eta)
    res = EnhancementResult.from_terms(0.0, tt, ())
    return EnhancementResult(res.S, res.term_single, res.term_bec_thermal,
                             res.term_thermal_thermal,
                             (("pair_correlation_local", tt / tt_plain),))
