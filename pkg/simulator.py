#!/usr/bin/env python3
"""
Synthetic dataset generation for the area-reversible gyroscope.

A run chops the interferometer between the forward and reversed area
configurations every half chop cycle, on one or two counter-propagating
atomic beams. Auxiliary channels evolve at the raw sample rate and leak into
the phase through configured couplings; rotation noise, a startup transient
and white detection noise are added. One output row is produced per chop
cycle, holding the half-cycle mean phase of every (beam, area) configuration.

Functions:
- simulate(config, schedule, aux_specs, noise, models, seed, env, consts):
  Generate a Dataset.
- apply_rotation_bias(dataset, bias): Subtract an electro-optic rotation bias.
- build_truth(...): Flat record of every generating parameter.
- simulate_run(run): Simulate a RunConfig, bias included.
- sweep(run, parameter, values): Noiseless phases across a swept parameter.
"""

import math
from dataclasses import replace

import numpy as np
from scipy.signal import lfilter

from base import ConfigurationError, get_logger
from models.constants import PhysicalConstants, arw_to_si, rrw_to_si
from models.dataset import Dataset
from models.environment import EnvironmentState
from models.phase_models import PhaseModels
from models.results import SweepResult
from models.schedule import NoiseSpec
from phase_model import center_pulse_phase, sagnac_phase, total_phase
from stability import combine_area

logger = get_logger(__name__)

UNIT_ROTATION = EnvironmentState(rotation_rate=(0.0, 0.0, 1.0), acceleration=(0.0, 0.0, 0.0))


def flatten(prefix, value, into):
    """Flattens nested dicts and lists into dotted keys."""
    if isinstance(value, dict):
        for key in sorted(value):
            flatten(f"{prefix}.{key}", value[key], into)
    elif isinstance(value, (list, tuple)):
        for index, item in enumerate(value):
            flatten(f"{prefix}.{index}", item, into)
    elif isinstance(value, bool):
        into[prefix] = int(value)
    elif isinstance(value, (int, float, str)):
        into[prefix] = value
    else:
        into[prefix] = float(value)
    return into


def build_truth(config, schedule, aux_specs, noise, models, env, consts, seed):
    """
    Record every generating parameter as flat key-value pairs.

    Returns:
    - dict: Keys such as 'aux.<name>.coupling' or 'schedule.chop_period'.
    """
    truth = {}
    flatten('instrument', config.to_dict(), truth)
    flatten('environment', env.to_dict(), truth)
    flatten('constants', consts.to_dict(), truth)
    flatten('schedule', schedule.to_dict(), truth)
    flatten('noise', noise.to_dict(), truth)
    flatten('models', models.to_dict(), truth)
    for spec in aux_specs:
        flatten(f"aux.{spec.name}", spec.to_dict(), truth)
    truth['seed'] = int(seed)
    truth['applied_rotation_bias_rad'] = 0.0
    return truth


def _validate_inputs(config, schedule, aux_specs, noise, models, env, consts):
    config.validate()
    schedule.validate()
    noise.validate()
    models.validate()
    env.validate()
    consts.validate()
    seen = set()
    for spec in aux_specs:
        spec.validate()
        if spec.name in seen:
            raise ConfigurationError(f"aux channel name {spec.name!r} is used twice")
        seen.add(spec.name)


def _aux_process(spec, t, dt, rng):
    """Evaluates one auxiliary process on the raw sample grid."""
    p = spec.params
    if spec.process == 'random_walk':
        steps = rng.normal(0.0, p['step_sigma'] * math.sqrt(dt), size=t.shape)
        steps.flat[0] = 0.0
        values = np.cumsum(steps.ravel()).reshape(t.shape)
    elif spec.process == 'sinusoid':
        values = p['amplitude'] * np.sin(2.0 * math.pi * t / p['period'] + p.get('phase', 0.0))
    elif spec.process == 'ornstein_uhlenbeck':
        decay = math.exp(-dt / p['correlation_time'])
        kicks = rng.normal(0.0, p['sigma'] * math.sqrt(1.0 - decay * decay), size=t.size)
        kicks[0] = rng.normal(0.0, p['sigma'])
        values = lfilter([1.0], [1.0, -decay], kicks).reshape(t.shape)
    else:
        values = np.full(t.shape, float(p['value']))
    return spec.offset + values


def rotation_gain(config, consts):
    """Phase per unit normal rotation rate for one orientation, rad per (rad/s)."""
    sagnac = sagnac_phase(config, UNIT_ROTATION, consts)
    rotation_term = center_pulse_phase(config, UNIT_ROTATION, consts)[2]
    return sagnac + float(rotation_term)


def simulate(config, schedule, aux_specs=(), noise=None, models=None, seed=0,
             env=None, consts=None):
    """
    Generate a chopped, cycle-resolved dataset.

    Args:
    - config (InstrumentConfig): Instrument geometry; orientation is set per configuration.
    - schedule (Schedule): Sampling, chopping and duration.
    - aux_specs (list[AuxChannelSpec]): Auxiliary channels and their couplings.
    - noise (NoiseSpec): Noise levels.
    - models (PhaseModels): Zeeman and intensity sub-models.
    - seed (int): Any 64-bit value; identical inputs and seed give identical output.
    - env (EnvironmentState): Static environment; zero rotation by default.
    - consts (PhysicalConstants): Constants, cesium defaults when None.

    Returns:
    - Dataset: One row per chop cycle with phase and aux columns and the truth record.

    Raises:
    - ConfigurationError: If any spec violates its invariants; raised before sampling.
    """
    noise = noise or NoiseSpec()
    models = models or PhaseModels()
    env = env or EnvironmentState()
    consts = consts or PhysicalConstants()
    aux_specs = list(aux_specs)
    _validate_inputs(config, schedule, aux_specs, noise, models, env, consts)

    n_cycles = schedule.cycle_count
    n_half = schedule.samples_per_half
    dt = schedule.chop_period / (2 * n_half)
    t = (np.arange(n_cycles)[:, None] * schedule.chop_period
         + np.arange(2 * n_half)[None, :] * dt)
    rng = np.random.default_rng(int(seed) % 2 ** 64)
    logger.info("simulating %d cycles of %d samples (seed %d)", n_cycles, 2 * n_half, seed)

    aux_raw = {spec.name: _aux_process(spec, t, dt, rng) for spec in aux_specs}

    omega_noise = np.zeros(t.shape)
    if noise.rotation_noise_arw > 0.0:
        sigma = arw_to_si(noise.rotation_noise_arw) / math.sqrt(dt)
        omega_noise += rng.normal(0.0, sigma, size=t.shape)
    if noise.rate_random_walk > 0.0:
        steps = rng.normal(0.0, rrw_to_si(noise.rate_random_walk) * math.sqrt(dt), size=t.size)
        omega_noise += np.cumsum(steps).reshape(t.shape)

    transient = np.zeros(t.shape)
    if noise.startup_transient_amplitude > 0.0:
        transient = noise.startup_transient_amplitude * np.exp(-t / noise.startup_transient_decay)

    halves = {1: slice(0, n_half), -1: slice(n_half, 2 * n_half)}
    phases = {}
    for beam in schedule.beam_directions:
        for area in (1, -1):
            oriented = config.oriented(area, beam)
            base = total_phase(oriented, env, models, consts).total
            raw = rotation_gain(oriented, consts) * omega_noise[:, halves[area]]
            raw = raw + transient[:, halves[area]]
            for spec in aux_specs:
                gain = spec.coupling * spec.area_gain(area, beam)
                if gain != 0.0:
                    raw = raw + gain * aux_raw[spec.name][:, halves[area]]
            phases[(beam, area)] = base + raw.mean(axis=1)

    if noise.white_phase_noise_sigma > 0.0:
        for key in sorted(phases, reverse=True):
            phases[key] = phases[key] + rng.normal(
                0.0, noise.white_phase_noise_sigma, size=n_cycles)

    dataset = Dataset(
        time=(np.arange(n_cycles) + 0.5) * schedule.chop_period,
        phases=phases,
        aux={name: values.mean(axis=1) for name, values in aux_raw.items()},
        truth=build_truth(config, schedule, aux_specs, noise, models, env, consts, seed),
        seed=int(seed),
    )
    return dataset.validate()


def apply_rotation_bias(dataset, bias):
    """
    Subtract an electro-optically applied rotation bias.

    Args:
    - dataset (Dataset): Input record; left unchanged.
    - bias (float): Bias phase in rad, as seen by the forward configuration of beam b0.

    Returns:
    - Dataset: Copy whose (beam b, area a) channel is shifted by -a·b·bias, with
      the cumulative bias recorded in truth['applied_rotation_bias_rad'].
    """
    phases = {(beam, area): values - area * beam * bias
              for (beam, area), values in dataset.phases.items()}
    truth = dict(dataset.truth)
    truth['applied_rotation_bias_rad'] = float(truth.get('applied_rotation_bias_rad', 0.0)) + bias
    return replace(dataset, phases=phases, aux=dict(dataset.aux), truth=truth)


def simulate_run(run):
    """
    Simulate a RunConfig and apply its electro-optic rotation bias.

    Args:
    - run (RunConfig): Validated run configuration.

    Returns:
    - Dataset: The simulated record.
    """
    dataset = simulate(run.instrument, run.schedule, run.aux_channels, run.noise, run.models,
                       run.seed, run.environment, run.constants)
    if run.rotation_bias_rad != 0.0:
        dataset = apply_rotation_bias(dataset, run.rotation_bias_rad)
    return dataset


"""Noiseless parameter sweeps."""

SWEEP_PARAMETERS = {'bias_field': 'bias_field_t', 'delta': 'delta_m', 'pulse_offset_delta': 'delta_m'}


def _polynomial_fit(x, y, degree):
    """Least-squares polynomial on a rescaled abscissa; returns coefficients in x and residual rms."""
    scale = float(np.max(np.abs(x))) or 1.0
    coefficients = np.polyfit(x / scale, y, degree)
    residual = y - np.polyval(coefficients, x / scale)
    unscaled = coefficients / scale ** np.arange(degree, -1, -1)
    return unscaled, float(np.sqrt(np.mean(residual * residual)))


def _quadratic_summary(x, y):
    (a, b, c), rms = _polynomial_fit(x, y, 2)
    apex = -b / (2.0 * a) if a != 0.0 else None
    return {'curvature_rad_per_t2': float(a), 'apex_t': apex, 'residual_rms_rad': rms}


def _linear_summary(x, y, unit):
    (slope, intercept), rms = _polynomial_fit(x, y, 1)
    return {f'slope_rad_per_{unit}': float(slope), 'intercept_rad': float(intercept),
            'residual_rms_rad': rms}


def _sweep_point(run, parameter, value):
    instrument, env = run.instrument, run.environment
    if parameter == 'bias_field':
        stray = env.stray_field
        mismatch = run.sweep.bias_field_mismatch
        env = replace(env, bias_field_half1=float(value),
                      bias_field_half2=(1.0 + mismatch) * (value + stray) - stray)
    else:
        instrument = replace(instrument, center_pulse_offset_delta=float(value))
    return instrument, env


def sweep(run, parameter, values):
    """
    Noiseless phases of both area configurations (beam b0) across a parameter.

    Args:
    - run (RunConfig): Instrument, environment and sub-models held fixed.
    - parameter (str): 'bias_field' (applied field in the first half, T) or
      'delta' or 'pulse_offset_delta' (center pulse offset, m).
    - values (array): Parameter values; the output is sorted by value.

    Returns:
    - SweepResult: Phases, their area combinations and least-squares fits.

    Raises:
    - ConfigurationError: If the parameter is unknown, fewer than three values
      are given, or any value violates the instrument invariants; raised before
      any phase is computed.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigurationError(
            f"sweep parameter must be one of {sorted(SWEEP_PARAMETERS)}, got {parameter!r}")
    values = np.sort(np.asarray(values, dtype=float))
    if len(values) < 3:
        raise ConfigurationError("a sweep needs at least 3 steps")
    if not np.all(np.isfinite(values)):
        raise ConfigurationError("sweep values must be finite")
    points = [_sweep_point(run, parameter, value) for value in values]
    for instrument, env in points:
        instrument.validate()
        env.validate()

    phases = {1: [], -1: []}
    for instrument, env in points:
        for area in (1, -1):
            budget = total_phase(instrument.oriented(area, 1), env, run.models, run.constants)
            phases[area].append(budget.total)
    phase_fwd = np.asarray(phases[1])
    phase_rev = np.asarray(phases[-1])
    rotation_like, bias_like = combine_area(phase_fwd, phase_rev)

    if parameter == 'bias_field':
        fits = {
            'fwd': _quadratic_summary(values, phase_fwd),
            'rev': _quadratic_summary(values, phase_rev),
            'rotation_like': _linear_summary(values, rotation_like, 't'),
        }
    else:
        fits = {name: _linear_summary(values, series, 'm') for name, series in (
            ('fwd', phase_fwd), ('rev', phase_rev),
            ('rotation_like', rotation_like), ('bias_like', bias_like))}
    logger.info("swept %s over %d points", parameter, len(values))
    return SweepResult(parameter=parameter, values=values, phase_fwd=phase_fwd,
                       phase_rev=phase_rev, rotation_like=rotation_like,
                       bias_like=bias_like, fits=fits)
