#!/usr/bin/env python3
""" holds classes ZeemanModel, IntensityCouplingModel and PhaseModels"""

import math
from dataclasses import dataclass, field, asdict

from base import ConfigurationError

CESIUM_CLOCK_KZ = 4.2745e10


@dataclass(frozen=True)
class ZeemanModel:
    """
    Quadratic Zeeman shift of the clock transition with piecewise-constant
    fields in the two interferometer halves.

    reversal_imperfection scales the reversed-area value by (1 + imperfection).
    """

    quadratic_coefficient_Kz: float = CESIUM_CLOCK_KZ
    half_transit_time: float = 0.968 / 220.0
    reversal_imperfection: float = 0.0

    def validate(self):
        if not math.isfinite(self.quadratic_coefficient_Kz) or self.quadratic_coefficient_Kz <= 0.0:
            raise ConfigurationError("zeeman.quadratic_coefficient_Kz must be positive")
        if not math.isfinite(self.half_transit_time) or self.half_transit_time <= 0.0:
            raise ConfigurationError("zeeman.half_transit_time must be positive")
        if not math.isfinite(self.reversal_imperfection):
            raise ConfigurationError("zeeman.reversal_imperfection must be finite")
        return self

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class IntensityCouplingModel:
    """
    Empirical affine coupling of Raman laser intensity drift into phase.

    coefficients[0] holds the (laser 1, laser 2) couplings measured with
    area_sign +1, coefficients[1] those measured with area_sign -1, in rad per
    unit fractional intensity deviation. Each laser couples with the mean of
    its two entries; reversal_imbalance is the only asymmetry between areas,
    the fraction of that coupling that does not flip with the area sign.
    """

    coefficients: tuple = field(default=((1.0, 1.0), (1.0, 1.0)))
    reversal_imbalance: float = 0.1

    def validate(self):
        if len(self.coefficients) != 2 or any(len(row) != 2 for row in self.coefficients):
            raise ConfigurationError("intensity.coefficients must be a 2x2 table")
        if not all(math.isfinite(c) for row in self.coefficients for c in row):
            raise ConfigurationError("intensity.coefficients must be finite")
        if not 0.0 <= self.reversal_imbalance <= 1.0:
            raise ConfigurationError("intensity.reversal_imbalance must lie in [0, 1]")
        return self

    def laser_couplings(self):
        """Area-averaged (laser 1, laser 2) couplings."""
        forward, reversed_ = self.coefficients
        return tuple(0.5 * (f + r) for f, r in zip(forward, reversed_))

    def to_dict(self):
        return {
            'coefficients': [list(row) for row in self.coefficients],
            'reversal_imbalance': self.reversal_imbalance,
        }


@dataclass(frozen=True)
class PhaseModels:
    """Sub-models consumed by total_phase."""

    zeeman: ZeemanModel = field(default_factory=ZeemanModel)
    intensity: IntensityCouplingModel = field(default_factory=IntensityCouplingModel)

    def validate(self):
        self.zeeman.validate()
        self.intensity.validate()
        return self

    def to_dict(self):
        return {'zeeman': self.zeeman.to_dict(), 'intensity': self.intensity.to_dict()}
