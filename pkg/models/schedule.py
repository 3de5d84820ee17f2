#!/usr/bin/env python3
""" holds classes AuxChannelSpec, NoiseSpec and Schedule"""

import math
from dataclasses import dataclass, field, asdict

from base import ConfigurationError

"""Parameters accepted by each auxiliary process; all but 'phase' and 'value' must be positive."""
PROCESS_PARAMETERS = {
    'random_walk': ('step_sigma',),
    'sinusoid': ('amplitude', 'period', 'phase'),
    'ornstein_uhlenbeck': ('sigma', 'correlation_time'),
    'constant': ('value',),
}
OPTIONAL_PARAMETERS = {'phase'}
SIGNED_PARAMETERS = {'phase', 'value'}
COUPLING_SYMMETRIES = ('both_areas_even', 'both_areas_odd')
RATIO_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AuxChannelSpec:
    """
    One auxiliary environmental channel and how it leaks into the phase.

    The channel value is offset + process(t); the phase contribution is
    coupling × value. With couples_to 'both_areas_odd' the contribution
    follows the rotation sign (area sign times beam direction), so it survives
    both area reversal and beam subtraction the way a real drift does.
    """

    name: str
    process: str = 'constant'
    params: dict = field(default_factory=dict)
    coupling: float = 0.0
    couples_to: str = 'both_areas_even'
    offset: float = 0.0

    def validate(self):
        """Ensures the process, its parameters and the coupling are valid."""
        where = f"aux_channels.{self.name}"
        if not self.name or not isinstance(self.name, str):
            raise ConfigurationError("aux channel names must be non-empty strings")
        if not self.name.replace('_', '').isalnum() or not self.name[0].isalpha():
            raise ConfigurationError(f"{where}: name must start with a letter and hold only letters, digits and '_'")
        if self.process not in PROCESS_PARAMETERS:
            raise ConfigurationError(
                f"{where}.process must be one of {sorted(PROCESS_PARAMETERS)}, got {self.process!r}")
        allowed = PROCESS_PARAMETERS[self.process]
        for key in self.params:
            if key not in allowed:
                raise ConfigurationError(f"{where}.params.{key} is not a {self.process} parameter")
        for key in allowed:
            if key not in self.params:
                if key in OPTIONAL_PARAMETERS:
                    continue
                raise ConfigurationError(f"{where}.params.{key} is required")
            value = self.params[key]
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigurationError(f"{where}.params.{key} must be a finite number")
            if key not in SIGNED_PARAMETERS and value <= 0.0:
                raise ConfigurationError(f"{where}.params.{key} must be positive")
        if not math.isfinite(self.coupling) or not math.isfinite(self.offset):
            raise ConfigurationError(f"{where}: coupling and offset must be finite")
        if self.couples_to not in COUPLING_SYMMETRIES:
            raise ConfigurationError(f"{where}.couples_to must be one of {COUPLING_SYMMETRIES}")
        return self

    def area_gain(self, area_sign, beam_direction=1):
        """Sign applied to the coupled phase in the given configuration."""
        if self.couples_to == 'both_areas_odd':
            return area_sign * beam_direction
        return 1

    def to_dict(self):
        data = asdict(self)
        data['params'] = dict(sorted(self.params.items()))
        return data


@dataclass(frozen=True)
class NoiseSpec:
    """
    Noise injected by the simulator.

    - white_phase_noise_sigma: rad per dataset point (per half-cycle mean).
    - rotation_noise_arw: white rotation-rate noise, deg/√hr.
    - rate_random_walk: (deg/hr)/√hr.
    - startup_transient_amplitude / startup_transient_decay: rad and s of the
      decaying area-even drift at the start of a run.
    """

    white_phase_noise_sigma: float = 0.0
    rotation_noise_arw: float = 0.0
    rate_random_walk: float = 0.0
    startup_transient_amplitude: float = 0.0
    startup_transient_decay: float = 1.0

    def validate(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value) or value < 0.0:
                raise ConfigurationError(f"noise.{name} must be finite and non-negative")
        if self.startup_transient_amplitude > 0.0 and self.startup_transient_decay <= 0.0:
            raise ConfigurationError("noise.startup_transient_decay must be positive")
        return self

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Schedule:
    """Area-reversal chopping schedule; each chop cycle is half forward, half reversed."""

    sample_period: float = 1.0
    chop_period: float = 20.0
    duration: float = 4.0 * 3600.0
    beams: str = 'dual'

    def validate(self):
        for name in ('sample_period', 'chop_period', 'duration'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ConfigurationError(f"schedule.{name} must be finite and positive")
        if self.chop_period < 2.0 * self.sample_period:
            raise ConfigurationError("schedule.chop_period must be at least 2 * sample_period")
        ratio = self.chop_period / (2.0 * self.sample_period)
        if not math.isclose(ratio, round(ratio), rel_tol=RATIO_TOLERANCE):
            raise ConfigurationError("schedule.chop_period must be an even multiple of sample_period")
        if self.duration < self.chop_period:
            raise ConfigurationError("schedule.duration must be at least chop_period")
        if self.beams not in ('single', 'dual'):
            raise ConfigurationError("schedule.beams must be 'single' or 'dual'")
        return self

    @property
    def cycle_count(self):
        """Number of complete chop cycles, floor(duration / chop_period).

        A ratio within RATIO_TOLERANCE of an integer counts as that integer.
        """
        ratio = self.duration / self.chop_period
        nearest = round(ratio)
        if math.isclose(ratio, nearest, rel_tol=RATIO_TOLERANCE):
            return int(nearest)
        return int(math.floor(ratio))

    @property
    def samples_per_half(self):
        """Raw samples in each half-cycle; exact once validate() has passed."""
        return int(round(0.5 * self.chop_period / self.sample_period))

    @property
    def beam_directions(self):
        return (1,) if self.beams == 'single' else (1, -1)

    def to_dict(self):
        return asdict(self)
