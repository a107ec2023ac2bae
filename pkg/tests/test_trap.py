import math

import pytest

from bosenhance import constants as C
from bosenhance.errors import DomainError
from bosenhance.trap import (
    EnhancementClass,
    RecoilSpec,
    Statistics,
    TrapSpec,
    classify_regime,
    critical_temperature_harmonic,
    dos_exponent,
    kappa_from_momentum_transfer,
    kappa_from_physical,
    mean_frequency,
    momentum_transfer,
)


@pytest.mark.parametrize("d, alpha, x", [
    (3, 2.0, 2.0),
    (3, math.inf, 0.5),
    (2, 2.0, 1.0),
    (1, 2.0, 0.0),
    (1, math.inf, -0.5),
    (3, 1.0, 3.5),
])
def test_dos_exponent(d, alpha, x):
    assert dos_exponent(d, alpha) == pytest.approx(x)


def test_dos_exponent_domain():
    for d, alpha in [(0, 2.0), (2.5, 2.0), (3, 0.0), (3, -1.0)]:
        with pytest.raises(DomainError):
            dos_exponent(d, alpha)


def test_trap_spec_shapes():
    assert TrapSpec.harmonic().is_harmonic
    assert TrapSpec.box().is_box
    assert TrapSpec.box().x == 0.5
    with pytest.raises(DomainError):
        TrapSpec.harmonic(omega=-1.0)


def test_recoil_spec_validation():
    assert RecoilSpec(0.0).statistics is Statistics.BOSE
    with pytest.raises(DomainError):
        RecoilSpec(-0.1)
    with pytest.raises(DomainError):
        RecoilSpec(float("nan"))


def test_classifier_rows():
    low = classify_regime(-0.5)
    assert (low.has_bec, low.enhancement_class) == (False, EnhancementClass.BOUNDED)
    mid = classify_regime(0.75)
    assert mid.has_bec and mid.enhancement_class is EnhancementClass.DIVERGES_AT_TC
    assert mid.value == pytest.approx(-0.5)
    high = classify_regime(2.0)
    assert high.enhancement_class is EnhancementClass.BOUNDED_ABOVE_TC
    assert high.value == pytest.approx(1.3684327776, abs=1e-9)
    assert "bounded by" in high.describe()


def test_classifier_boundaries():
    assert classify_regime(0.0).enhancement_class is EnhancementClass.BOUNDED
    assert classify_regime(1.0).enhancement_class is EnhancementClass.DIVERGES_AT_TC
    assert classify_regime(1.0 + 1e-9).enhancement_class is EnhancementClass.BOUNDED_ABOVE_TC


def test_critical_temperature_sodium():
    tc = critical_temperature_harmonic(C.REFERENCE_ATOM_NUMBER, C.REFERENCE_OMEGA)
    # hbar omega / kB = 129.6 nK, (4e5 / zeta(3))^(1/3) = 69.3
    assert tc == pytest.approx(8.98e-6, rel=2e-3)


def test_critical_temperature_scaling():
    omega = 2 * math.pi * 100.0
    base = critical_temperature_harmonic(1000 * 1.2020569031595942, omega)
    assert base == pytest.approx(10 * C.hbar * omega / C.kB, rel=1e-12)
    assert critical_temperature_harmonic(8 * 1000.0, omega) == pytest.approx(
        2 * critical_temperature_harmonic(1000.0, omega), rel=1e-12)
    with pytest.raises(DomainError):
        critical_temperature_harmonic(0.5, omega)


def test_mean_frequency():
    assert mean_frequency(1.0, 8.0, 27.0) == pytest.approx(6.0)


def test_momentum_transfer():
    k = 2 * math.pi / C.lambda_na_d2
    assert momentum_transfer(C.lambda_na_d2) == pytest.approx(math.sqrt(2) * k, rel=1e-14)
    assert momentum_transfer(C.lambda_na_d2, math.pi) == pytest.approx(2 * k, rel=1e-14)
    with pytest.raises(DomainError):
        momentum_transfer(C.lambda_na_d2, 0.0)


def test_kappa_sodium_reference():
    # 90 degree scattering of 589 nm light off sodium at Tc = 9.2 uK
    kappa = kappa_from_physical(C.lambda_na_d2, C.mass_na23, 9.2e-6)
    assert kappa == pytest.approx(0.511, abs=2e-3)


def test_kappa_unit_and_scaling():
    T = 1e-6
    q = math.sqrt(2 * C.mass_na23 * C.kB * T) / C.hbar
    assert kappa_from_momentum_transfer(q, C.mass_na23, T) == pytest.approx(1.0, rel=1e-14)
    assert kappa_from_momentum_transfer(q, C.mass_na23, 4 * T) == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(DomainError):
        kappa_from_momentum_transfer(0.0, C.mass_na23, T)
