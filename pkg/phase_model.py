#!/usr/bin/env python3
"""
Closed-form interferometer phase model.

This module evaluates the phase of the three-pulse atom-beam interferometer,
decomposed per physical mechanism. Area reversal is modelled by flipping the
effective wave vector and beam reversal by flipping the longitudinal atom
velocity, so the sign behaviour of each term follows from the vectors rather
than being coded per term.

Functions:
- scale_factor(config, consts): Sagnac phase per unit normal rotation rate.
- sagnac_phase(config, env, consts): Rotation-induced phase.
- center_pulse_phase(config, env, consts): The four displaced-π-pulse terms.
- zeeman_phase(model, env, area_sign): Quadratic Zeeman phase.
- intensity_phase(model, env, area_sign): Raman intensity drift phase.
- misalignment_phase(config, env, consts): Vertical misalignment gravity shift.
- misalignment_bound_angle(config, env, consts, fraction): Angle at which the
  misalignment shift reaches a fraction of the Earth-rate Sagnac phase.
- total_phase(config, env, models, consts): Full PhaseBudget.
- detection_signal(phase, contrast, offset): Fringe population.
- phase_from_signal(population, contrast, offset, branch_hint): Mid-fringe inversion.
"""

import math
from dataclasses import replace

import numpy as np
from scipy.optimize import brentq

from base import ConfigurationError, DomainError, SaturationError, get_logger
from models.budget import PhaseBudget
from models.constants import PhysicalConstants
from models.phase_models import PhaseModels

logger = get_logger(__name__)

MAX_MISALIGNMENT_ANGLE = 0.1
NOMINAL_K_AXIS = np.array([0.0, 1.0, 0.0])


def _validated(config, env, consts):
    """Re-raises invariant violations of the phase inputs as domain errors."""
    try:
        config.validate()
        env.validate()
        consts.validate()
    except ConfigurationError as exc:
        raise DomainError(str(exc)) from exc


def _k_vector(config, consts):
    """Effective wave vector; area reversal flips its direction."""
    return config.area_sign * consts.k_eff_magnitude * NOMINAL_K_AXIS


def _velocity_vector(config):
    """Atom velocity; beam reversal flips the longitudinal component."""
    v_h, v_v = config.transverse_velocity
    return np.array([config.beam_direction * config.atom_speed_v, v_h, v_v])


def scale_factor(config, consts=None):
    """
    Sagnac scale factor 2 k_eff L² / v.

    Args:
    - config (InstrumentConfig): Instrument geometry.
    - consts (PhysicalConstants): Constants, cesium defaults when None.

    Returns:
    - float: Phase per unit rotation rate, rad per (rad/s).
    """
    consts = consts or PhysicalConstants()
    return 2.0 * consts.k_eff_magnitude * config.pulse_spacing_L ** 2 / config.atom_speed_v


def sagnac_phase(config, env, consts=None):
    """
    Rotation-induced interferometer phase.

    Args:
    - config (InstrumentConfig): Geometry, area sign and beam direction.
    - env (EnvironmentState): Rotation rate; only the normal component enters.
    - consts (PhysicalConstants): Constants, cesium defaults when None.

    Returns:
    - float: s_area · s_beam · 2 k_eff L² Ω_⊥ / v in radians.

    Raises:
    - DomainError: If any input is non-finite or violates its invariants.

    The reversed configuration is scaled by (1 + reversal_scale_mismatch),
    which is zero for a perfect reversal.
    """
    consts = consts or PhysicalConstants()
    _validated(config, env, consts)
    phase = config.area_sign * config.beam_direction * scale_factor(config, consts) * env.normal_rotation
    if config.area_sign < 0:
        phase *= 1.0 + config.reversal_scale_mismatch
    return phase


def center_pulse_phase(config, env, consts=None):
    """
    Phase terms from a π pulse displaced by Δ from the interferometer center.

    Args:
    - config (InstrumentConfig): Geometry including center_pulse_offset_delta.
    - env (EnvironmentState): Rotation rate and acceleration.
    - consts (PhysicalConstants): Constants, cesium defaults when None.

    Returns:
    - numpy.ndarray: The four terms (recoil, transverse velocity, rotation,
      acceleration) in radians, each linear in Δ.

    Raises:
    - DomainError: If inputs are non-finite or the atom speed is not positive.
    """
    consts = consts or PhysicalConstants()
    if config.atom_speed_v == 0.0:
        raise DomainError("center_pulse_phase is singular for zero atom speed")
    _validated(config, env, consts)

    delta = config.center_pulse_offset_delta
    L = config.pulse_spacing_L
    v = config.atom_speed_v
    k = _k_vector(config, consts)
    v_vec = _velocity_vector(config)
    omega = np.asarray(env.rotation_rate, dtype=float)
    accel = np.asarray(env.acceleration, dtype=float)

    recoil = consts.hbar * consts.k_eff_magnitude ** 2 / (consts.atom_mass * v) * delta
    transverse = 2.0 * float(np.dot(k, v_vec)) / v * delta
    rotation = 4.0 * L * float(np.dot(k, np.cross(omega, v_vec))) / v ** 2 * delta
    acceleration = 2.0 * L * float(np.dot(k, accel)) / v ** 2 * delta
    return np.array([recoil, transverse, rotation, acceleration])


def zeeman_phase(model, env, area_sign=1):
    """
    Quadratic Zeeman phase 2π K_z [(B₂ + B_s)² − (B₁ + B_s)²] T_half.

    Even in the area sign apart from the configured reversal imperfection.
    """
    model.validate()
    fields = (env.bias_field_half1, env.bias_field_half2, env.stray_field)
    if not all(math.isfinite(b) for b in fields):
        raise DomainError("magnetic fields must be finite")
    b1 = env.bias_field_half1 + env.stray_field
    b2 = env.bias_field_half2 + env.stray_field
    phase = 2.0 * math.pi * model.quadratic_coefficient_Kz * (b2 * b2 - b1 * b1) * model.half_transit_time
    if area_sign < 0:
        phase *= 1.0 + model.reversal_imperfection
    return phase


def intensity_phase(model, env, area_sign):
    """
    Phase from Raman intensity drift.

    Args:
    - model (IntensityCouplingModel): Per-laser couplings (area-averaged) and
      the non-reversing fraction.
    - env (EnvironmentState): intensity_deviation of both lasers.
    - area_sign (int): +1 or -1.

    Returns:
    - float: Σ_j c̄_j δ_j (s (1 − r) + r) in radians, c̄_j the mean of the two
      area entries for laser j.
    """
    model.validate()
    if area_sign not in (1, -1):
        raise DomainError("area_sign must be +1 or -1")
    c1, c2 = model.laser_couplings()
    d1, d2 = env.intensity_deviation
    r = model.reversal_imbalance
    return (c1 * d1 + c2 * d2) * (area_sign * (1.0 - r) + r)


def _misalignment(config, env, consts, theta):
    g_normal = -env.acceleration[2]
    v = config.atom_speed_v
    L = config.pulse_spacing_L
    v_vertical = config.transverse_velocity[1]
    prefactor = 2.0 * L * consts.k_eff_magnitude / v ** 2
    shift = prefactor * (g_normal * math.sin(theta) + v_vertical * v * theta / L)
    return config.area_sign * config.beam_direction * shift


def misalignment_phase(config, env, consts=None):
    """
    Gravity shift from tilting the Raman beams out of the interferometer plane.

    Small-angle model: s_area s_beam (2 L k_eff / v²)(g_⊥ sin θ + v_vert v θ / L).
    The shift follows the Sagnac sign under both reversals, so neither
    area reversal nor beam subtraction removes it.

    Raises:
    - DomainError: If |θ| ≥ 0.1 rad, outside the small-angle model.
    """
    consts = consts or PhysicalConstants()
    _validated(config, env, consts)
    theta = config.vertical_misalignment_angle
    if abs(theta) >= MAX_MISALIGNMENT_ANGLE:
        raise DomainError(
            f"vertical misalignment {theta!r} rad is outside the small-angle model "
            f"(|theta| < {MAX_MISALIGNMENT_ANGLE})")
    return _misalignment(config, env, consts, theta)


def misalignment_bound_angle(config, env, consts=None, fraction=0.02):
    """
    Angle at which the misalignment shift equals a fraction of the Sagnac
    phase at Earth rate.

    Args:
    - config (InstrumentConfig): Geometry (orientation is ignored).
    - env (EnvironmentState): Acceleration; rotation is ignored.
    - consts (PhysicalConstants): Constants, cesium defaults when None.
    - fraction (float): Target fraction of the Earth-rate Sagnac phase.

    Returns:
    - float: The positive angle in radians.

    Raises:
    - DomainError: If the target is not reached inside the small-angle range.
    """
    consts = consts or PhysicalConstants()
    forward = config.oriented(1, 1)
    _validated(forward, env, consts)
    target = fraction * scale_factor(forward, consts) * consts.omega_earth

    def residual(theta):
        return _misalignment(forward, env, consts, theta) - target

    upper = MAX_MISALIGNMENT_ANGLE * (1.0 - 1e-9)
    if residual(0.0) * residual(upper) > 0.0:
        raise DomainError(
            f"misalignment shift does not reach {fraction} of the Earth-rate phase below "
            f"{MAX_MISALIGNMENT_ANGLE} rad")
    theta = brentq(residual, 0.0, upper, xtol=1e-16, rtol=1e-14)
    logger.debug("misalignment bound for fraction %g: %g rad", fraction, theta)
    return theta


def total_phase(config, env, models=None, consts=None):
    """
    Sum every mechanism into a PhaseBudget.

    Args:
    - config (InstrumentConfig): Geometry and orientation.
    - env (EnvironmentState): Environment at the sample instant.
    - models (PhaseModels): Zeeman and intensity sub-models.
    - consts (PhysicalConstants): Constants, cesium defaults when None.

    Returns:
    - PhaseBudget: Per-mechanism phases and their total.
    """
    consts = consts or PhysicalConstants()
    models = models or PhaseModels()
    budget = PhaseBudget(
        sagnac=sagnac_phase(config, env, consts),
        center_pulse_terms=tuple(float(t) for t in center_pulse_phase(config, env, consts)),
        zeeman=zeeman_phase(models.zeeman, env, config.area_sign),
        intensity=intensity_phase(models.intensity, env, config.area_sign),
        misalignment_gravity=misalignment_phase(config, env, consts),
        applied_bias=env.applied_rotation_bias_phase,
    )
    return replace(budget, total=budget.field_sum())


def _check_fringe(contrast, offset):
    if not (math.isfinite(contrast) and 0.0 < contrast <= 1.0):
        raise DomainError(f"contrast must lie in (0, 1], got {contrast!r}")
    half = contrast / 2.0
    if not (math.isfinite(offset) and half - 1e-15 <= offset <= 1.0 - half + 1e-15):
        raise DomainError(f"offset must lie in [{half}, {1.0 - half}], got {offset!r}")


def detection_signal(phase, contrast=1.0, offset=0.5):
    """
    Population fraction in the upper state, P = offset − (contrast/2) cos(phase).

    Raises:
    - DomainError: If contrast or offset violate the fringe contract.
    """
    _check_fringe(contrast, offset)
    if not np.all(np.isfinite(phase)):
        raise DomainError("phase must be finite")
    return offset - 0.5 * contrast * np.cos(phase)


def phase_from_signal(population, contrast=1.0, offset=0.5, branch_hint=math.pi / 2):
    """
    Invert detection_signal on the branch closest to branch_hint.

    Args:
    - population (float): Measured population fraction.
    - contrast (float): Fringe contrast.
    - offset (float): Fringe offset.
    - branch_hint (float): Expected operating phase, π/2 for mid-fringe.

    Returns:
    - float: Phase in radians.

    Raises:
    - SaturationError: If the population is outside the fringe range.
    """
    _check_fringe(contrast, offset)
    argument = 2.0 * (offset - population) / contrast
    if not math.isfinite(argument) or abs(argument) > 1.0:
        raise SaturationError(
            f"population {population!r} is outside the fringe range; fringe lock lost")
    principal = math.acos(argument)
    best = None
    for candidate in (principal, -principal):
        turns = round((branch_hint - candidate) / (2.0 * math.pi))
        value = candidate + 2.0 * math.pi * turns
        if best is None or abs(value - branch_hint) < abs(best - branch_hint):
            best = value
    return best
