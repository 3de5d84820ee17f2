#!/usr/bin/env python3
"""
Command-line entry point.

Verbs:
- simulate: RunConfig -> dataset file.
- analyze: dataset file -> report plus plot-data tables.
- sweep: RunConfig -> noiseless sweep table with fit summaries.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

import logging
import os
import sys
from contextlib import contextmanager

import click
import numpy as np

from base import (ConfigurationError, DatasetParseError, DomainError, RankDeficientError,
                  ReportError, SaturationError, ShapeError, get_logger)
from config import (DEFAULT_ARW_BAND_FRACTION, DEFAULT_SEGMENT_LENGTH, DEFAULT_TAU_POINTS,
                    DEFAULT_TOP_K, LOG_LEVEL, TOOL_VERSION)
from dataset_io import file_digest, read_dataset, write_dataset, write_report, write_table
from models.constants import PhysicalConstants
from models.instrument import InstrumentConfig
from models.run_config import load_run_config
from phase_model import scale_factor
from simulator import SWEEP_PARAMETERS, simulate_run, sweep
from stability import (allan_deviation, arw_from_psd, bias_stability, combine_area,
                       combine_beams, default_fit_window, detrend_regression, loglog_slope,
                       phase_to_rate, psd_welch, rank_channels, rotation_rate,
                       scale_factor_stability, tau_grid)

logger = get_logger(__name__)

USAGE_EXIT = 1
DATA_EXIT = 2


class ConfigError(click.ClickException):
    """Invalid configuration or option value."""

    exit_code = USAGE_EXIT


class DataError(click.ClickException):
    """Input data that cannot be analyzed."""

    exit_code = DATA_EXIT


class LabGroup(click.Group):
    """Command group that reports usage errors with exit status 1."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.UsageError as exc:
            exc.show()
            code = USAGE_EXIT
        except click.ClickException as exc:
            exc.show()
            code = exc.exit_code
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = USAGE_EXIT
        if standalone_mode:
            sys.exit(code)
        return code


@contextmanager
def errors_mapped():
    """Translates toolkit errors into CLI errors with the documented exit codes."""
    try:
        yield
    except (DatasetParseError, ShapeError, RankDeficientError, ReportError, SaturationError) as exc:
        raise DataError(str(exc)) from exc
    except (ConfigurationError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc
    except OSError as exc:
        raise DataError(str(exc)) from exc


def parse_range(text, option, count=2):
    """Parses 'a:b' (or 'a:b:n') option values."""
    parts = text.split(':')
    if len(parts) != count:
        raise ConfigError(f"{option} expects {':'.join(['x'] * count)}, got {text!r}")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{option} values must be numbers, got {text!r}") from None
    if not all(np.isfinite(values)):
        raise ConfigError(f"{option} values must be finite")
    return values


@click.group(cls=LabGroup)
@click.option('--verbose', is_flag=True, help='Log at DEBUG level.')
def cli(verbose):
    """Area-reversible atom-interferometer gyroscope simulator and stability toolkit."""
    logging.getLogger().setLevel(logging.DEBUG if verbose else LOG_LEVEL)


"""simulate"""

@cli.command()
@click.option('--config', 'config_path', required=True,
              type=click.Path(exists=True, dir_okay=False), help='RunConfig JSON file.')
@click.option('--out', required=True, type=click.Path(dir_okay=False), help='Dataset file to write.')
@click.option('--seed', type=int, default=None, help='Overrides the configured seed.')
def simulate(config_path, out, seed):
    """Simulate a dataset from a run configuration."""
    with errors_mapped():
        run = load_run_config(config_path)
        if seed is not None:
            run = run.with_seed(seed)
        dataset = simulate_run(run)
        write_dataset(dataset, out)
    click.echo(f"duration: {run.schedule.duration:g} s")
    click.echo(f"cycles: {len(dataset)}")
    click.echo(f"channels: {', '.join(dataset.columns()[1:])}")
    click.echo(f"wrote {out}")


"""analyze"""

def instrument_scale_factor(truth):
    """Scale factor from the dataset's truth record, cesium defaults otherwise."""
    instrument = InstrumentConfig()
    consts = PhysicalConstants()
    source = 'default'
    keys = ('instrument.pulse_spacing_L', 'instrument.atom_speed_v', 'constants.k_eff_magnitude')
    if all(key in truth for key in keys):
        instrument = InstrumentConfig(pulse_spacing_L=float(truth[keys[0]]),
                                      atom_speed_v=float(truth[keys[1]]))
        consts = PhysicalConstants(k_eff_magnitude=float(truth[keys[2]]))
        source = 'truth'
    if 'constants.omega_earth' in truth:
        omega_earth = float(truth['constants.omega_earth'])
    else:
        omega_earth = consts.omega_earth
    return scale_factor(instrument, consts), omega_earth, source


def combined_phases(dataset):
    """Rotation-like and bias-like series, beam-subtracted when both beams are present."""
    rotation, bias = {}, {}
    for beam in dataset.beam_directions:
        rotation[beam], bias[beam] = combine_area(dataset.phase(beam, 1), dataset.phase(beam, -1))
    if -1 in rotation:
        return combine_beams(rotation[1], rotation[-1]), 0.5 * (bias[1] + bias[-1])
    return rotation[1], bias[1]


def select_channels(dataset, requested):
    """
    Channels to regress against.

    Requested channels must exist; by default every channel with non-zero variance is used.
    """
    available = sorted(dataset.aux)
    if requested:
        names = [name.strip() for name in requested.split(',') if name.strip()]
        missing = [name for name in names if name not in dataset.aux]
        if missing:
            raise DataError(f"aux channel(s) {', '.join(missing)} not in dataset; "
                            f"available: {', '.join(available) or 'none'}")
        return sorted(set(names))
    chosen = [name for name in available if np.ptp(dataset.aux[name]) > 0.0]
    skipped = sorted(set(available) - set(chosen))
    if skipped:
        logger.info("skipping constant channels: %s", ", ".join(skipped))
    return chosen


def correct(target, aux, names):
    """Regression correction keeping the mean; returns (model or None, corrected series)."""
    target = np.asarray(target, dtype=float)
    if not names:
        return None, target.copy()
    subset = {name: aux[name] for name in names}
    model, _ = detrend_regression(target, subset)
    return model, target - model.predict(subset) + model.intercept


def regression_section(target, model, ranking, top_model, excluded):
    if model is None:
        centered = target - np.mean(target)
        section = {
            'channels': [],
            'coefficients_rad_per_unit': [],
            'standard_errors_rad_per_unit': [],
            'intercept_rad': float(np.mean(target)),
            'residual_rms_rad': float(np.sqrt(np.mean(centered * centered))),
            'sample_count': len(target),
        }
    else:
        section = model.to_dict()
    section['ranking'] = [{'name': c.name, 'correlation_ratio': c.correlation, 'flagged': c.flagged}
                          for c in ranking]
    section['top_k'] = top_model.to_dict() if top_model is not None else {'channels': []}
    section['excluded_channels'] = excluded
    return section


def slope_or_none(result, window):
    try:
        return loglog_slope(result, window)
    except ConfigurationError:
        return None


def plot_path(out, name):
    stem, _ = os.path.splitext(out)
    return f"{stem}_{name}.csv"


@cli.command()
@click.argument('dataset_path', type=click.Path(dir_okay=False))
@click.option('--out', required=True, type=click.Path(dir_okay=False),
              help='Report file; plot tables are written next to it.')
@click.option('--channels', default=None, help='Comma-separated aux channels to regress against.')
@click.option('--taus', default=None, help='start:stop:points, log-spaced τ grid in seconds.')
@click.option('--method', type=click.Choice(['min', 'extrapolate']), default='min',
              show_default=True, help='Bias stability estimator.')
@click.option('--top-k', 'top_k', type=click.IntRange(min=1), default=DEFAULT_TOP_K,
              show_default=True, help='Channels used for the reduced correction.')
@click.option('--band', default=None, help='lo:hi ARW floor band in Hz.')
@click.option('--segment', type=click.IntRange(min=2), default=None, help='Welch segment length.')
def analyze(dataset_path, out, channels, taus, method, top_k, band, segment):
    """Analyze a dataset: Allan deviation, bias stability, ARW and drift regression."""
    with errors_mapped():
        dataset = read_dataset(dataset_path)
        n = len(dataset)
        dt = dataset.sample_period
        if n < 2:
            raise DataError("analysis needs at least two cycles")
        names = select_channels(dataset, channels)
        excluded = sorted(set(dataset.aux) - set(names))

        if taus:
            start, stop, points = parse_range(taus, '--taus', 3)
            if points != int(points) or points < 1:
                raise ConfigError("--taus point count must be a positive integer")
            grid = tau_grid(dt, n, int(points), start, stop)
        else:
            grid = tau_grid(dt, n, DEFAULT_TAU_POINTS)

        scale, omega_earth, scale_source = instrument_scale_factor(dataset.truth)
        applied_bias = float(dataset.truth.get('applied_rotation_bias_rad', 0.0))
        rotation, bias_like = combined_phases(dataset)

        model, corrected = correct(rotation, dataset.aux, names)
        ranking = rank_channels(rotation, {name: dataset.aux[name] for name in names})
        top_names = [c.name for c in ranking if not c.flagged][:top_k]
        top_model, top_corrected = correct(rotation, dataset.aux, top_names)

        raw_allan = allan_deviation(rotation, dt, grid)
        allan = allan_deviation(corrected, dt, grid)
        top_allan = allan_deviation(top_corrected, dt, grid)
        for message in allan.warnings:
            click.echo(f"warning: {message}", err=True)

        stability = {'method': method, 'value_rad': None, 'value_deghr': None, 'tau_s': None,
                     'scale_factor_stability_frac': None, 'warnings': []}
        if len(allan):
            try:
                if method == 'extrapolate':
                    window = default_fit_window(allan)
                    stability['fit_window_s'] = [float(window[0]), float(window[1])]
                    value, tau = bias_stability(allan, 'extrapolate', window)
                else:
                    value, tau = bias_stability(allan, 'minimum')
            except ConfigurationError as exc:
                stability['warnings'].append(f"bias stability not estimated: {exc}")
            else:
                stability.update({
                    'value_rad': value,
                    'value_deghr': float(phase_to_rate(value, scale)),
                    'tau_s': tau,
                    'scale_factor_stability_frac': scale_factor_stability(value, scale * omega_earth),
                })
        else:
            stability['warnings'].append("bias stability not estimated: no feasible τ")

        rate = (rotation + applied_bias) / scale
        segment_length = segment or min(DEFAULT_SEGMENT_LENGTH, n)
        psd = psd_welch(rate, dt, segment_length)
        nyquist = 0.5 / dt
        if band:
            band_hz = parse_range(band, '--band')
            if not band_hz[0] < band_hz[1]:
                raise ConfigError("--band must satisfy lo < hi")
        else:
            band_hz = [fraction * nyquist for fraction in DEFAULT_ARW_BAND_FRACTION]
        arw_warnings = []
        try:
            arw = arw_from_psd(psd, band_hz)
        except ConfigurationError as exc:
            arw = None
            arw_warnings.append(f"ARW not estimated: {exc}")
        for message in stability['warnings'] + arw_warnings:
            click.echo(f"warning: {message}", err=True)

        allan_section = allan.to_dict()
        allan_section['raw_deviation_rad'] = raw_allan.deviations.tolist()
        allan_section['top_k_deviation_rad'] = top_allan.deviations.tolist()
        allan_section['raw_slope_ratio'] = slope_or_none(raw_allan, None) if len(raw_allan) else None
        allan_section['corrected_slope_ratio'] = slope_or_none(allan, None) if len(allan) else None

        report = {
            'scale_factor': {
                'value_rad_per_radps': scale,
                'earth_rate_phase_rad': scale * omega_earth,
                'source': scale_source,
            },
            'allan': allan_section,
            'bias_stability': stability,
            'arw': {
                'value_deg_per_rthr': arw,
                'warnings': arw_warnings,
                'band_hz': [float(b) for b in band_hz],
                'segment_length_count': segment_length,
            },
            'regression': regression_section(rotation, model, ranking, top_model, excluded),
            'rate': {
                'mean_deghr': float(np.mean(rotation_rate(rotation, applied_bias, scale))),
                'applied_bias_rad': applied_bias,
            },
            'provenance': {
                'input_sha256': file_digest(dataset_path),
                'tool_version': TOOL_VERSION,
                'parameters': {
                    'channels': names,
                    'taus': taus or 'default',
                    'method': method,
                    'top_k_count': top_k,
                    'band_hz': [float(b) for b in band_hz],
                    'segment_length_count': segment_length,
                },
            },
        }
        write_report(report, out)

        write_table(plot_path(out, 'phase'), {
            'time_s': dataset.time,
            'rotation_raw_rad': rotation,
            'rotation_corrected_rad': corrected,
            'rotation_top_k_rad': top_corrected,
            'bias_like_rad': bias_like,
        })
        write_table(plot_path(out, 'allan'), {
            'tau_s': allan.taus,
            'raw_rad': raw_allan.deviations,
            'corrected_rad': allan.deviations,
            'top_k_rad': top_allan.deviations,
            'confidence_frac': allan.confidence,
        }, {'top_k_channels': ','.join(top_names) or 'none'})
        write_table(plot_path(out, 'psd'), {
            'frequency_hz': psd.frequencies,
            'psd_radps2_per_hz': psd.psd,
        })
        forward, reversed_ = dataset.phase(1, 1), dataset.phase(1, -1)
        write_table(plot_path(out, 'longrun'), {
            'time_s': dataset.time,
            'forward_rad': forward,
            'reversed_negated_rad': -reversed_,
            'average_rad': 0.5 * (forward - reversed_),
        })
    click.echo(f"cycles: {n}, channels regressed: {', '.join(names) or 'none'}")
    if stability['value_rad'] is not None:
        click.echo(f"bias stability: {stability['value_rad']:.3g} rad "
                   f"({stability['value_deghr']:.3g} deg/hr) at {stability['tau_s']:g} s")
    if arw is not None:
        click.echo(f"ARW: {arw:.3g} deg/rt-hr")
    click.echo(f"wrote {out}")


"""sweep"""

@cli.command('sweep')
@click.option('--config', 'config_path', required=True,
              type=click.Path(exists=True, dir_okay=False), help='RunConfig JSON file.')
@click.option('--param', 'parameter', required=True, type=click.Choice(sorted(SWEEP_PARAMETERS)))
@click.option('--range', 'value_range', required=True, help='lo:hi swept range.')
@click.option('--steps', type=int, default=11, show_default=True, help='Number of points, at least 3.')
@click.option('--out', required=True, type=click.Path(dir_okay=False), help='Table to write.')
def sweep_command(config_path, parameter, value_range, steps, out):
    """Sweep the bias field or the center pulse offset without noise."""
    if steps < 3:
        raise ConfigError("--steps must be at least 3")
    lo, hi = parse_range(value_range, '--range')
    if not lo < hi:
        raise ConfigError("--range must satisfy lo < hi")
    with errors_mapped():
        run = load_run_config(config_path)
        result = sweep(run, parameter, np.linspace(lo, hi, steps))
        header = {}
        for name in sorted(result.fits):
            for key, value in sorted(result.fits[name].items()):
                header[f"fit.{name}.{key}"] = 'none' if value is None else value
        write_table(out, {
            SWEEP_PARAMETERS[parameter]: result.values,
            'phase_fwd_rad': result.phase_fwd,
            'phase_rev_rad': result.phase_rev,
            'rotation_like_rad': result.rotation_like,
            'bias_like_rad': result.bias_like,
        }, header)
    for key, value in header.items():
        click.echo(f"{key} = {value}")
    click.echo(f"wrote {out}")


if __name__ == '__main__':
    cli()
