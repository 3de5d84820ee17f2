#!/usr/bin/env python3
""" holds class Dataset"""

import re
from dataclasses import dataclass, field

import numpy as np

from base import ConfigurationError

BEAM_LABELS = {1: 'b0', -1: 'b1'}
AREA_LABELS = {1: 'fwd', -1: 'rev'}
TIME_COLUMN = 'time_s'
AUX_PREFIX = 'aux_'
_PHASE_COLUMN = re.compile(r'^phase_(b[01])_(fwd|rev)_rad$')


def phase_column(beam_direction, area_sign):
    """Column name for one (beam, area) phase channel."""
    return f"phase_{BEAM_LABELS[beam_direction]}_{AREA_LABELS[area_sign]}_rad"


def parse_phase_column(name):
    """Returns the (beam_direction, area_sign) key of a phase column, or None."""
    match = _PHASE_COLUMN.match(name)
    if not match:
        return None
    beam = 1 if match.group(1) == 'b0' else -1
    area = 1 if match.group(2) == 'fwd' else -1
    return beam, area


@dataclass
class Dataset:
    """
    Cycle-resolved interferometer record.

    Attributes:
    - time (ndarray): Cycle mid-times in seconds, uniform and increasing.
    - phases (dict): (beam_direction, area_sign) -> half-cycle mean phase, rad.
    - aux (dict): channel name -> cycle-averaged auxiliary value.
    - truth (dict): Flat record of every parameter used to generate the data.
    - seed (int): RNG seed, or None for data of unknown origin.
    """

    time: np.ndarray
    phases: dict
    aux: dict = field(default_factory=dict)
    truth: dict = field(default_factory=dict)
    seed: int = None

    def __len__(self):
        return len(self.time)

    @property
    def beam_directions(self):
        return tuple(sorted({beam for beam, _ in self.phases}, reverse=True))

    @property
    def sample_period(self):
        """Spacing of the cycle times."""
        if len(self.time) < 2:
            return float(self.truth.get('schedule.chop_period', 0.0))
        return float(self.time[1] - self.time[0])

    def phase(self, beam_direction, area_sign):
        return self.phases[(beam_direction, area_sign)]

    def columns(self):
        """Column names in canonical order."""
        names = [TIME_COLUMN]
        for beam in self.beam_directions:
            for area in (1, -1):
                names.append(phase_column(beam, area))
        names.extend(AUX_PREFIX + name for name in sorted(self.aux))
        return names

    def column_values(self, name):
        if name == TIME_COLUMN:
            return self.time
        key = parse_phase_column(name)
        if key is not None:
            return self.phases[key]
        return self.aux[name[len(AUX_PREFIX):]]

    def validate(self):
        """Ensures equal lengths, a uniform time axis and complete channels."""
        n = len(self.time)
        if n == 0:
            raise ConfigurationError("dataset has no rows")
        beams = {beam for beam, _ in self.phases}
        if beams not in ({1}, {1, -1}):
            raise ConfigurationError("dataset must hold beam b0, or beams b0 and b1")
        for beam in beams:
            for area in (1, -1):
                if (beam, area) not in self.phases:
                    raise ConfigurationError(f"dataset is missing {phase_column(beam, area)}")
        for name in self.columns():
            values = np.asarray(self.column_values(name))
            if values.shape != (n,):
                raise ConfigurationError(f"column {name} has shape {values.shape}, expected ({n},)")
            if not np.all(np.isfinite(values)):
                raise ConfigurationError(f"column {name} holds non-finite values")
        if n > 1:
            steps = np.diff(self.time)
            if np.any(steps <= 0.0):
                raise ConfigurationError("dataset time must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise ConfigurationError("dataset time must be uniform")
        return self

    def equals(self, other):
        """Bit-for-bit equality of every column, the truth record and the seed."""
        if self.columns() != other.columns() or self.seed != other.seed:
            return False
        if self.truth != other.truth:
            return False
        return all(np.array_equal(self.column_values(c), other.column_values(c))
                   for c in self.columns())

    def to_dict(self):
        """Converts the Dataset to a column dictionary."""
        return {name: np.asarray(self.column_values(name)).tolist() for name in self.columns()}
