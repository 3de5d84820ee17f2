#!/usr/bin/env python3
""" holds class RunConfig and its JSON loader"""

import json
import math
from dataclasses import dataclass, field, fields, replace, MISSING

from base import ConfigurationError
from models.constants import PhysicalConstants
from models.environment import EnvironmentState
from models.instrument import InstrumentConfig
from models.phase_models import IntensityCouplingModel, PhaseModels, ZeemanModel
from models.schedule import AuxChannelSpec, NoiseSpec, Schedule

SECTIONS = ('seed', 'instrument', 'constants', 'environment', 'schedule', 'noise',
            'zeeman', 'intensity', 'aux_channels', 'rotation_bias_rad', 'sweep')


@dataclass(frozen=True)
class SweepSettings:
    """
    Settings used by parameter sweeps.

    bias_field_mismatch is the fractional half-to-half difference of the total
    magnetic field, (B₂ + B_s) = (1 + mismatch)(B₁ + B_s).
    """

    bias_field_mismatch: float = 0.005

    def validate(self):
        if not math.isfinite(self.bias_field_mismatch) or self.bias_field_mismatch <= -1.0:
            raise ConfigurationError("sweep.bias_field_mismatch must be finite and above -1")
        return self

    def to_dict(self):
        return {'bias_field_mismatch': self.bias_field_mismatch}


@dataclass(frozen=True)
class RunConfig:
    """Everything a simulation or sweep run needs, validated as a whole."""

    seed: int = 0
    instrument: InstrumentConfig = field(default_factory=InstrumentConfig)
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    environment: EnvironmentState = field(default_factory=EnvironmentState)
    schedule: Schedule = field(default_factory=Schedule)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    models: PhaseModels = field(default_factory=PhaseModels)
    aux_channels: tuple = ()
    rotation_bias_rad: float = 0.0
    sweep: SweepSettings = field(default_factory=SweepSettings)

    def validate(self):
        """
        Validates every section against its invariants.

        Raises:
        - ConfigurationError: Naming the offending key.
        """
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigurationError("seed must be an integer")
        for section in (self.instrument, self.constants, self.environment, self.schedule,
                        self.noise, self.models, self.sweep):
            section.validate()
        names = set()
        for spec in self.aux_channels:
            spec.validate()
            if spec.name in names:
                raise ConfigurationError(f"aux_channels: name {spec.name!r} is used twice")
            names.add(spec.name)
        if not math.isfinite(self.rotation_bias_rad):
            raise ConfigurationError("rotation_bias_rad must be finite")
        return self

    def with_seed(self, seed):
        """Returns a copy with the seed replaced."""
        return replace(self, seed=int(seed))


def _as_number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{where} must be a number, got {value!r}")
    return value


def _convert(value, default, where):
    """Coerces a JSON value to the shape of a dataclass default; required fields are strings."""
    if default is None:
        default = ""
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ConfigurationError(f"{where} must be a list")
        if len(value) != len(default):
            raise ConfigurationError(f"{where} must have {len(default)} entries")
        return tuple(_convert(item, inner, f"{where}.{index}")
                     for index, (item, inner) in enumerate(zip(value, default)))
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigurationError(f"{where} must be a string")
        return value
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigurationError(f"{where} must be an object")
        return {key: _as_number(item, f"{where}.{key}") for key, item in value.items()}
    if isinstance(default, int) and not isinstance(default, bool):
        number = _as_number(value, where)
        if number != int(number):
            raise ConfigurationError(f"{where} must be an integer")
        return int(number)
    return float(_as_number(value, where))


def _default_of(spec):
    if spec.default is not MISSING:
        return spec.default
    if spec.default_factory is not MISSING:
        return spec.default_factory()
    return None


def _build(cls, data, where, **fixed):
    """Builds a dataclass from a JSON object, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigurationError(f"{where} must be an object")
    known = {spec.name: spec for spec in fields(cls)}
    kwargs = dict(fixed)
    for key, value in data.items():
        if key not in known:
            raise ConfigurationError(f"unknown key '{where}.{key}'")
        kwargs[key] = _convert(value, _default_of(known[key]), f"{where}.{key}")
    return cls(**kwargs)


def _aux_spec(data, where):
    if not isinstance(data, dict) or not isinstance(data.get('name'), str):
        raise ConfigurationError(f"{where} must be an object with a string 'name'")
    return _build(AuxChannelSpec, data, where)


def run_config_from_dict(data):
    """
    Builds and validates a RunConfig from a parsed JSON document.

    Args:
    - data (dict): Document with any of the sections seed, instrument,
      constants, environment, schedule, noise, zeeman, intensity, aux_channels,
      rotation_bias_rad and sweep.

    Returns:
    - RunConfig: The validated configuration.

    Raises:
    - ConfigurationError: On unknown keys or invariant violations, naming the key.
    """
    if not isinstance(data, dict):
        raise ConfigurationError("configuration must be a JSON object")
    for key in data:
        if key not in SECTIONS:
            raise ConfigurationError(f"unknown key '{key}'")
    instrument = _build(InstrumentConfig, data.get('instrument', {}), 'instrument')
    zeeman_data = data.get('zeeman', {})
    zeeman_defaults = {}
    if isinstance(zeeman_data, dict) and 'half_transit_time' not in zeeman_data:
        zeeman_defaults['half_transit_time'] = instrument.half_transit_time
    aux = data.get('aux_channels', [])
    if not isinstance(aux, list):
        raise ConfigurationError("aux_channels must be a list")
    seed = data.get('seed', 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigurationError(f"seed must be an integer, got {seed!r}")
    config = RunConfig(
        seed=seed,
        instrument=instrument,
        constants=_build(PhysicalConstants, data.get('constants', {}), 'constants'),
        environment=_build(EnvironmentState, data.get('environment', {}), 'environment'),
        schedule=_build(Schedule, data.get('schedule', {}), 'schedule'),
        noise=_build(NoiseSpec, data.get('noise', {}), 'noise'),
        models=PhaseModels(
            zeeman=_build(ZeemanModel, zeeman_data, 'zeeman', **zeeman_defaults),
            intensity=_build(IntensityCouplingModel, data.get('intensity', {}), 'intensity'),
        ),
        aux_channels=tuple(_aux_spec(item, f"aux_channels.{index}")
                           for index, item in enumerate(aux)),
        rotation_bias_rad=_convert(data.get('rotation_bias_rad', 0.0), 0.0, 'rotation_bias_rad'),
        sweep=_build(SweepSettings, data.get('sweep', {}), 'sweep'),
    )
    return config.validate()


def load_run_config(path):
    """
    Reads a RunConfig from a JSON file.

    Raises:
    - ConfigurationError: If the file is not valid JSON or fails validation.
    - OSError: If the file cannot be read.
    """
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise type(exc)(exc.errno, f"cannot read {path}: {exc.strerror}") from exc
    return run_config_from_dict(data)
