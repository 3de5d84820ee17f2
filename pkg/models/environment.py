#!/usr/bin/env python3
""" holds class EnvironmentState"""

import math
from dataclasses import dataclass, field, asdict

from base import ConfigurationError
from models.constants import STANDARD_GRAVITY


@dataclass(frozen=True)
class EnvironmentState:
    """Rotation, acceleration, fields and laser state seen by the instrument."""

    rotation_rate: tuple = field(default=(0.0, 0.0, 0.0))
    acceleration: tuple = field(default=(0.0, 0.0, -STANDARD_GRAVITY))
    bias_field_half1: float = 0.0
    bias_field_half2: float = 0.0
    stray_field: float = 0.0
    intensity_deviation: tuple = field(default=(0.0, 0.0))
    applied_rotation_bias_phase: float = 0.0

    def validate(self):
        """Ensures all fields are finite and correctly shaped."""
        vectors = {
            'rotation_rate': (self.rotation_rate, 3),
            'acceleration': (self.acceleration, 3),
            'intensity_deviation': (self.intensity_deviation, 2),
        }
        for name, (vector, size) in vectors.items():
            if len(vector) != size:
                raise ConfigurationError(f"environment.{name} must have {size} components")
            if not all(math.isfinite(v) for v in vector):
                raise ConfigurationError(f"environment.{name} must be finite")
        for name in ('bias_field_half1', 'bias_field_half2', 'stray_field',
                     'applied_rotation_bias_phase'):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"environment.{name} must be finite")
        return self

    @property
    def normal_rotation(self):
        """Rotation component normal to the interferometer plane."""
        return self.rotation_rate[2]

    def to_dict(self):
        """Converts the EnvironmentState instance to a dictionary."""
        data = asdict(self)
        for name in ('rotation_rate', 'acceleration', 'intensity_deviation'):
            data[name] = list(data[name])
        return data
