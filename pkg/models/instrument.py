#!/usr/bin/env python3
""" holds class InstrumentConfig"""

import math
from dataclasses import dataclass, field, asdict, replace

from base import ConfigurationError


@dataclass(frozen=True)
class InstrumentConfig:
    """
    Geometry of one interferometer configuration.

    The beam axis is x, the nominal Raman wave vector axis is y and z is
    vertical (normal to the interferometer plane). transverse_velocity holds
    the (horizontal, vertical) atom velocity components perpendicular to the
    beam axis.
    """

    pulse_spacing_L: float = 0.968
    atom_speed_v: float = 220.0
    transverse_velocity: tuple = field(default=(0.0, 0.0))
    center_pulse_offset_delta: float = 0.0
    area_sign: int = 1
    beam_direction: int = 1
    vertical_misalignment_angle: float = 0.0
    reversal_scale_mismatch: float = 0.0

    def validate(self):
        """Ensures the geometry satisfies its invariants."""
        values = {
            'pulse_spacing_L': self.pulse_spacing_L,
            'atom_speed_v': self.atom_speed_v,
            'center_pulse_offset_delta': self.center_pulse_offset_delta,
            'vertical_misalignment_angle': self.vertical_misalignment_angle,
            'reversal_scale_mismatch': self.reversal_scale_mismatch,
        }
        for name, value in values.items():
            if not math.isfinite(value):
                raise ConfigurationError(f"instrument.{name} must be finite, got {value!r}")
        if len(self.transverse_velocity) != 2 or not all(
                math.isfinite(v) for v in self.transverse_velocity):
            raise ConfigurationError("instrument.transverse_velocity must be two finite values")
        if self.pulse_spacing_L <= 0.0:
            raise ConfigurationError("instrument.pulse_spacing_L must be positive")
        if self.atom_speed_v <= 0.0:
            raise ConfigurationError("instrument.atom_speed_v must be positive")
        if self.area_sign not in (1, -1):
            raise ConfigurationError("instrument.area_sign must be +1 or -1")
        if self.beam_direction not in (1, -1):
            raise ConfigurationError("instrument.beam_direction must be +1 or -1")
        if abs(self.center_pulse_offset_delta) >= self.pulse_spacing_L:
            raise ConfigurationError(
                "instrument.center_pulse_offset_delta must be smaller than pulse_spacing_L")
        return self

    @property
    def half_transit_time(self):
        """Time of flight between adjacent pulses, L/v."""
        return self.pulse_spacing_L / self.atom_speed_v

    def oriented(self, area_sign, beam_direction):
        """Returns a copy for the given area sign and atomic beam."""
        return replace(self, area_sign=int(area_sign), beam_direction=int(beam_direction))

    def to_dict(self):
        """Converts the InstrumentConfig instance to a dictionary."""
        data = asdict(self)
        data['transverse_velocity'] = list(self.transverse_velocity)
        return data
