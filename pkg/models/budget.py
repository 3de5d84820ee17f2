#!/usr/bin/env python3
""" holds class PhaseBudget"""

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class PhaseBudget:
    """Per-mechanism phase contributions in radians."""

    sagnac: float = 0.0
    center_pulse_terms: tuple = field(default=(0.0, 0.0, 0.0, 0.0))
    zeeman: float = 0.0
    intensity: float = 0.0
    misalignment_gravity: float = 0.0
    applied_bias: float = 0.0
    total: float = 0.0

    def field_sum(self):
        """Recomputes the sum of every mechanism, with compensated summation."""
        return math.fsum((self.sagnac, *self.center_pulse_terms, self.zeeman,
                          self.intensity, self.misalignment_gravity, self.applied_bias))

    def to_dict(self):
        """Converts the PhaseBudget instance to a dictionary with unit-suffixed keys."""
        return {
            'sagnac_rad': self.sagnac,
            'center_pulse_terms_rad': list(self.center_pulse_terms),
            'zeeman_rad': self.zeeman,
            'intensity_rad': self.intensity,
            'misalignment_gravity_rad': self.misalignment_gravity,
            'applied_bias_rad': self.applied_bias,
            'total_rad': self.total,
        }
