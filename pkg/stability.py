#!/usr/bin/env python3
"""
Stability analysis pipeline.

Area and beam combination, Allan deviation with cluster statistics, bias
stability, Welch PSD and angle random walk, correlation ranking and
fixed-constant linear drift removal.

Functions:
- combine_area(phi_forward, phi_reversed): Rotation-like and bias-like series.
- combine_beams(rotation_like_beam1, rotation_like_beam2): Beam half-difference.
- tau_grid(sample_period, length, points, start, stop): Log-spaced τ multiples.
- allan_deviation(series, sample_period, taus, overlapping): AllanResult.
- loglog_slope(result, window): Fitted log-log slope.
- bias_stability(result, method, fit_window, target_tau): Floor estimate.
- scale_factor_stability(deviation, reference_phase): Fractional bound.
- psd_welch(series, sample_period, segment_length, window): PsdResult.
- arw_from_psd(psd, band): Angle random walk in deg/√hr.
- rank_channels(target, aux): Correlation ranking.
- detrend_regression(target, aux): OLS correction and residual.
- phase_to_rate(phase, scale_factor): Phase to deg/hr.
- rotation_rate(rotation_like, applied_bias, scale_factor): Rate with the bias added back.
"""

import math

import allantools
import numpy as np
from scipy import signal

from base import ConfigurationError, DomainError, RankDeficientError, ShapeError, get_logger
from config import DEFAULT_FIT_WINDOW_END_FRACTION, DEFAULT_FIT_WINDOW_START_SAMPLES
from models.constants import arw_from_si, radps_to_deghr
from models.results import AllanResult, ChannelCorrelation, PsdResult, RegressionModel

logger = get_logger(__name__)


def _aligned(*series):
    arrays = [np.asarray(s, dtype=float) for s in series]
    lengths = {a.shape for a in arrays}
    if len(lengths) != 1 or arrays[0].ndim != 1:
        raise ShapeError(f"series must be one-dimensional with equal lengths, got {sorted(lengths)}")
    return arrays


"""Reversal and beam combination."""

def combine_area(phi_forward, phi_reversed):
    """
    Separate area-odd from area-even phase content.

    Args:
    - phi_forward (array): Phase of the non-reversed configuration, rad.
    - phi_reversed (array): Phase of the reversed configuration, time aligned.

    Returns:
    - tuple: (rotation_like, bias_like) = ((fwd - rev)/2, (fwd + rev)/2).

    Raises:
    - ShapeError: If the lengths differ.
    """
    forward, reversed_ = _aligned(phi_forward, phi_reversed)
    return 0.5 * (forward - reversed_), 0.5 * (forward + reversed_)


def combine_beams(rotation_like_beam1, rotation_like_beam2):
    """Half-difference of the two beams; beam-even (acceleration) content cancels."""
    first, second = _aligned(rotation_like_beam1, rotation_like_beam2)
    return 0.5 * (first - second)


"""Allan deviation."""

def tau_grid(sample_period, length, points, start=None, stop=None):
    """
    Log-spaced cluster durations snapped to whole multiples of the sample period.

    Args:
    - sample_period (float): Spacing of the series, s.
    - length (int): Series length; the grid stops at length/2 samples by default.
    - points (int): Requested number of grid points before de-duplication.
    - start (float): First τ in s, one sample period by default.
    - stop (float): Last τ in s.

    Returns:
    - numpy.ndarray: Strictly increasing τ values.
    """
    start = sample_period if start is None else start
    stop = sample_period * (length // 2) if stop is None else stop
    if start <= 0.0 or stop < start or points < 1:
        raise ConfigurationError(f"invalid τ grid {start}:{stop}:{points}")
    multiples = np.unique(np.maximum(1, np.round(
        np.logspace(math.log10(start / sample_period), math.log10(stop / sample_period), points))))
    return multiples * sample_period


def _cluster_size(tau, sample_period):
    m = int(round(tau / sample_period))
    if m < 1 or abs(m * sample_period - tau) > 1e-9 * max(tau, sample_period):
        raise ConfigurationError(f"τ = {tau} s is not a multiple of the sample period {sample_period} s")
    return m


def _omit(tau, reason, omitted, warnings):
    message = f"τ = {tau:g} s omitted: {reason}"
    logger.warning(message)
    omitted.append(tau)
    warnings.append(message)


def allan_deviation(series, sample_period, taus, overlapping=True):
    """
    Allan deviation of cluster averages.

    Args:
    - series (array): Rate-like samples (e.g. rotation phase), uniform spacing.
    - sample_period (float): Spacing in s.
    - taus (array): Cluster durations, multiples of sample_period.
    - overlapping (bool): Overlapping estimator (default) or non-overlapping.

    Returns:
    - AllanResult: Deviations for every feasible τ; τ values with fewer than two
      clusters, or too few differences for the estimator, are listed in
      omitted_taus with a warning. cluster_counts holds floor(N/m).

    Raises:
    - ConfigurationError: If a τ is not a multiple of the sample period.
    """
    data = np.asarray(series, dtype=float)
    if data.ndim != 1:
        raise ShapeError("series must be one-dimensional")
    if sample_period <= 0.0:
        raise ConfigurationError("sample_period must be positive")
    omitted, warnings = [], []
    feasible = []
    for tau in sorted(set(float(t) for t in taus)):
        m = _cluster_size(tau, sample_period)
        clusters = len(data) // m
        if clusters < 2:
            _omit(tau, f"{clusters} cluster(s) in {len(data)} samples", omitted, warnings)
        else:
            feasible.append((tau, m))

    by_size = {}
    if feasible:
        estimator = allantools.oadev if overlapping else allantools.adev
        rate = 1.0 / sample_period
        used, devs, _, _ = estimator(data - data.mean(), rate=rate, data_type='freq',
                                     taus=np.array([tau for tau, _ in feasible]))
        by_size = {int(round(t * rate)): float(d) for t, d in zip(used, devs)}

    kept_taus, deviations, counts = [], [], []
    for tau, m in feasible:
        if m not in by_size:
            _omit(tau, f"too few differences in {len(data)} samples", omitted, warnings)
            continue
        kept_taus.append(tau)
        deviations.append(by_size[m])
        counts.append(len(data) // m)
    counts = np.asarray(counts, dtype=int)
    return AllanResult(
        taus=np.asarray(kept_taus, dtype=float),
        deviations=np.asarray(deviations, dtype=float),
        cluster_counts=counts,
        confidence=1.0 / np.sqrt(counts) if len(counts) else np.zeros(0),
        overlapping=overlapping,
        sample_period=sample_period,
        sample_count=len(data),
        omitted_taus=sorted(omitted),
        warnings=warnings,
    )


def _window(result, window):
    lo, hi = window
    mask = (result.taus >= lo * (1 - 1e-12)) & (result.taus <= hi * (1 + 1e-12)) & (result.deviations > 0.0)
    if not np.any(mask):
        raise ConfigurationError(f"no positive Allan points in the window [{lo}, {hi}] s")
    return result.taus[mask], result.deviations[mask]


def default_fit_window(result):
    """
    Four sample periods up to a tenth of the record length, clamped to the curve.

    When the record is too short for that window the whole curve is used, with a warning.

    Raises:
    - ConfigurationError: If the curve is empty.
    """
    if len(result) == 0:
        raise ConfigurationError("fit window needs a non-empty Allan curve")
    first, last = float(result.taus[0]), float(result.taus[-1])
    if not result.sample_period or not result.sample_count:
        return (first, last)
    lo = max(first, DEFAULT_FIT_WINDOW_START_SAMPLES * result.sample_period)
    hi = min(last, DEFAULT_FIT_WINDOW_END_FRACTION * result.sample_count * result.sample_period)
    if lo > hi:
        logger.warning("record too short for the default fit window; fitting τ in [%g, %g] s",
                       first, last)
        return (first, last)
    return (lo, hi)


def loglog_slope(result, window=None):
    """Least-squares slope of log σ against log τ over a window (all points by default)."""
    window = window or (result.taus[0], result.taus[-1])
    taus, deviations = _window(result, window)
    if len(taus) < 2:
        raise ConfigurationError("slope fit needs at least two points")
    slope, _ = np.polyfit(np.log(taus), np.log(deviations), 1)
    return float(slope)


def bias_stability(result, method='minimum', fit_window=None, target_tau=None):
    """
    Bias stability from an Allan curve.

    Args:
    - result (AllanResult): Allan deviation curve.
    - method (str): 'minimum' for the argmin point, or 'extrapolate' to fit
      σ(τ) = a τ^(-1/2) in log-log space over fit_window and evaluate at target_tau.
    - fit_window (tuple): (lo, hi) in s; defaults to four sample periods up to a
      tenth of the record length.
    - target_tau (float): Evaluation point in s; defaults to the largest τ.

    Returns:
    - tuple: (value, tau_at_value).

    Raises:
    - ConfigurationError: If the curve or the fit window is empty.
    """
    if len(result) == 0:
        raise ConfigurationError("bias stability needs a non-empty Allan curve")
    if method in ('minimum', 'min'):
        index = int(np.argmin(result.deviations))
        return float(result.deviations[index]), float(result.taus[index])
    if method not in ('extrapolate', 'sqrt_extrapolation'):
        raise ConfigurationError(f"unknown bias stability method {method!r}")
    fit_window = fit_window or default_fit_window(result)
    taus, deviations = _window(result, fit_window)
    target_tau = float(result.taus[-1]) if target_tau is None else float(target_tau)
    log_a = float(np.mean(np.log(deviations) + 0.5 * np.log(taus)))
    return math.exp(log_a) / math.sqrt(target_tau), target_tau


def scale_factor_stability(deviation, reference_phase):
    """Fractional scale-factor drift bound: phase stability over the phase of a reference rate."""
    if reference_phase == 0.0:
        raise DomainError("reference phase must be non-zero")
    return abs(deviation / reference_phase)


"""Spectral analysis."""

def psd_welch(series, sample_period, segment_length, window='hann'):
    """
    One-sided Welch PSD with 50% overlapping Hann segments.

    Raises:
    - ConfigurationError: If the segment is longer than the series.
    """
    data = np.asarray(series, dtype=float)
    if window != 'hann':
        raise ConfigurationError(f"unsupported window {window!r}")
    if segment_length < 2 or segment_length > len(data):
        raise ConfigurationError(
            f"segment length {segment_length} must lie in [2, {len(data)}]")
    overlap = segment_length // 2
    frequencies, psd = signal.welch(data, fs=1.0 / sample_period, window=window,
                                    nperseg=segment_length, noverlap=overlap,
                                    detrend='constant', scaling='density')
    return PsdResult(frequencies=frequencies, psd=psd, segment_length=segment_length,
                     window=window, overlap=overlap, sample_period=sample_period)


def arw_from_psd(psd, band):
    """
    Angle random walk from the white floor of a rotation-rate PSD.

    Args:
    - psd (PsdResult): One-sided PSD in (rad/s)²/Hz.
    - band (tuple): (lo, hi) frequency band in Hz.

    Returns:
    - float: ARW in deg/√hr, sqrt(median(psd in band) / 2) converted.
    """
    lo, hi = band
    mask = (psd.frequencies >= lo) & (psd.frequencies <= hi)
    if lo > hi or not np.any(mask):
        raise ConfigurationError(f"no PSD bins in the band [{lo}, {hi}] Hz")
    floor = float(np.median(psd.psd[mask]))
    return arw_from_si(math.sqrt(floor / 2.0))


"""Correlation and regression."""

def rank_channels(target, aux):
    """
    Order auxiliary channels by |Pearson r| with the target, descending; ties by name.

    Zero-variance channels get r = 0 and are flagged.
    """
    target = _aligned(target)[0]
    ranked = []
    for name in sorted(aux):
        values, _ = _aligned(aux[name], target)
        if np.std(values) == 0.0 or np.std(target) == 0.0:
            logger.warning("channel %s has zero variance; correlation reported as 0", name)
            ranked.append(ChannelCorrelation(name, 0.0, True))
            continue
        r = float(np.corrcoef(values, target)[0, 1])
        ranked.append(ChannelCorrelation(name, r, False))
    ranked.sort(key=lambda c: (-abs(c.correlation), c.name))
    return ranked


def _collinear_channels(design, names):
    """Channels whose column adds no rank to the intercept plus earlier channels."""
    collinear = []
    rank = np.linalg.matrix_rank(design[:, :1])
    for index, name in enumerate(names, start=1):
        new_rank = np.linalg.matrix_rank(design[:, :index + 1])
        if new_rank == rank:
            collinear.append(name)
        rank = new_rank
    return collinear


def detrend_regression(target, aux):
    """
    Ordinary least squares with intercept against a subset of channels.

    Args:
    - target (array): Phase series, rad.
    - aux (dict): Channel name -> aligned series; regressors in sorted name order.

    Returns:
    - tuple: (RegressionModel, residual array).

    Raises:
    - ConfigurationError: If the subset is empty.
    - RankDeficientError: If a channel is collinear with the intercept or others.
    """
    if not aux:
        raise ConfigurationError("regression needs at least one auxiliary channel")
    names = sorted(aux)
    y = _aligned(target)[0]
    columns = [_aligned(aux[name], y)[0] for name in names]
    design = np.column_stack([np.ones_like(y)] + columns)
    if len(y) <= design.shape[1]:
        raise ConfigurationError(
            f"regression needs more samples ({len(y)}) than parameters ({design.shape[1]})")
    scales = np.max(np.abs(design), axis=0)
    scales[scales == 0.0] = 1.0
    scaled = design / scales
    if np.linalg.matrix_rank(scaled) < scaled.shape[1]:
        raise RankDeficientError(_collinear_channels(scaled, names) or names)
    solution, _, _, _ = np.linalg.lstsq(scaled, y, rcond=None)
    beta = solution / scales
    prediction = design @ beta
    residual = y - prediction
    dof = len(y) - design.shape[1]
    sigma2 = float(residual @ residual) / dof
    covariance = sigma2 * np.linalg.pinv(scaled.T @ scaled) / np.outer(scales, scales)
    model = RegressionModel(
        channels=names,
        coefficients=beta[1:],
        intercept=float(beta[0]),
        residual_rms=float(np.sqrt(np.mean(residual * residual))),
        standard_errors=np.sqrt(np.clip(np.diag(covariance)[1:], 0.0, None)),
        sample_count=len(y),
    )
    logger.info("regression on %s: residual rms %.3g rad", ", ".join(names), model.residual_rms)
    return model, residual


"""Unit conversion."""

def phase_to_rate(phase, scale_factor):
    """
    Convert a rotation phase to a rate in deg/hr.

    Raises:
    - DomainError: If the scale factor is not positive.
    """
    if not scale_factor > 0.0:
        raise DomainError(f"scale factor must be positive, got {scale_factor!r}")
    return radps_to_deghr(np.asarray(phase, dtype=float) / scale_factor)


def rotation_rate(rotation_like, applied_bias, scale_factor):
    """Instrument rate in deg/hr: the measured phase plus the electro-optic bias that was removed."""
    return phase_to_rate(np.asarray(rotation_like, dtype=float) + applied_bias, scale_factor)
