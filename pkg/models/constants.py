#!/usr/bin/env python3
""" holds class PhysicalConstants and unit conversions"""

import math
from dataclasses import dataclass, asdict

from scipy import constants as sc

from base import ConfigurationError

CESIUM_D2_WAVELENGTH = 852.347e-9
CESIUM_MASS = 132.905451961 * sc.atomic_mass
EARTH_RATE = math.radians(15.0) / 3600.0
STANDARD_GRAVITY = sc.g

"""Unit conversions; everything is SI internally."""
RADPS_PER_DEGHR = math.pi / 180.0 / 3600.0
SQRT_SECONDS_PER_SQRT_HOUR = 60.0


def deghr_to_radps(rate):
    """Convert deg/hr to rad/s."""
    return rate * RADPS_PER_DEGHR


def radps_to_deghr(rate):
    """Convert rad/s to deg/hr."""
    return rate / RADPS_PER_DEGHR


def arw_to_si(arw_deg_per_rthr):
    """Convert an angle random walk from deg/√hr to rad/√s."""
    return math.radians(arw_deg_per_rthr) / SQRT_SECONDS_PER_SQRT_HOUR


def arw_from_si(arw_rad_per_rts):
    """Convert an angle random walk from rad/√s to deg/√hr."""
    return math.degrees(arw_rad_per_rts) * SQRT_SECONDS_PER_SQRT_HOUR


def rrw_to_si(rrw_deghr_per_rthr):
    """Convert a rate random walk from (deg/hr)/√hr to (rad/s)/√s."""
    return deghr_to_radps(rrw_deghr_per_rthr) / SQRT_SECONDS_PER_SQRT_HOUR


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants entering the interferometer phase; cesium defaults."""

    hbar: float = sc.hbar
    atom_mass: float = CESIUM_MASS
    k_eff_magnitude: float = 4.0 * math.pi / CESIUM_D2_WAVELENGTH
    omega_earth: float = EARTH_RATE
    g_magnitude: float = STANDARD_GRAVITY

    def validate(self):
        """Ensures every constant is finite and strictly positive."""
        for name, value in asdict(self).items():
            if not math.isfinite(value) or value <= 0.0:
                raise ConfigurationError(
                    f"constants.{name} must be finite and positive, got {value!r}")
        return self

    def to_dict(self):
        """Converts the constants to a dictionary."""
        return asdict(self)
