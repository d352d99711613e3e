"""Physical constants in the unit system used throughout the package.

Energies are in micro-electronvolts, times in nanoseconds and wavelengths in
nanometres. Angular frequencies therefore come out in rad/ns.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysConstants:
    hbar: float = 0.6582119569  # ueV * ns
    hc: float = 1.23984198e9  # ueV * nm


CONSTANTS = PhysConstants()
HBAR = CONSTANTS.hbar
HC = CONSTANTS.hc


def energy_from_wavelength_shift(delta_nm, wavelength_nm):
    """Energy difference (ueV) for a small wavelength difference around ``wavelength_nm``."""
    return HC * delta_nm / wavelength_nm**2
