"""Physical constants (CODATA 2018 via scipy) and the sodium-23 reference values."""

from scipy import constants as _c

hbar = _c.hbar
h = _c.h
kB = _c.k
a0 = _c.physical_constants["Bohr radius"][0]
amu = _c.physical_constants["atomic mass constant"][0]

mass_na23 = 22.9897692820 * amu
lambda_na_d2 = 589.158e-9

# |F=2, m_F=2> sodium in a tight dipole trap, the default scenario everywhere
NA23_SCATTERING_LENGTH = 85 * a0
REFERENCE_ATOM_NUMBER = 4e5
REFERENCE_OMEGA = 2 * _c.pi * 2.7e3
REFERENCE_KAPPA = 0.51
REFERENCE_CONDENSATE_FRACTION = 0.3
