"""Unit system and physical constants.

Energies are in ueV, lengths in nm, times in ns, magnetic fields in mT
(converted at the boundary). Every module in the package works in these
units; nothing downstream converts.
"""
from __future__ import annotations

# Reduced Planck constant, ueV*ns.
HBAR_UEV_NS = 0.6582119569

# Bohr magneton, ueV/T.
MU_B_UEV_PER_T = 57.8838

# e^2 / (4*pi*eps0), ueV*nm. Divide by the relative permittivity for the
# screened Coulomb prefactor.
COULOMB_UEV_NM = 1.43996e6

# GaAs relative permittivity, the default host material.
GAAS_RELATIVE_PERMITTIVITY = 12.9
