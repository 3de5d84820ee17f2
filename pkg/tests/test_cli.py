import os
import sys

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import json
import tempfile
import unittest
from unittest.mock import patch

import numpy as np
from click.testing import CliRunner

from base import ShapeError
from cli import cli, correct
from dataset_io import file_digest, read_dataset, read_report
from models.constants import EARTH_RATE, radps_to_deghr

EXAMPLE_CONFIG = os.path.join(os.path.dirname(__file__), '..', 'configs', 'example.json')


def drift_config(seed, duration=14400.0):
    return {
        'seed': seed,
        'schedule': {'sample_period': 1.0, 'chop_period': 10.0, 'duration': duration},
        'noise': {'white_phase_noise_sigma': 0.05},
        'aux_channels': [
            {'name': 'tilt', 'process': 'random_walk', 'params': {'step_sigma': 0.002},
             'coupling': 0.5, 'couples_to': 'both_areas_odd'},
        ],
    }


def read_header(path):
    header = {}
    with open(path, encoding='utf-8') as handle:
        for line in handle:
            if line.startswith('# '):
                key, value = line[2:].rstrip('\n').split(' = ', 1)
                header[key] = value
    return header


class CliTestCase(unittest.TestCase):
    """Shared runner and scratch directory."""

    def setUp(self):
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def write_config(self, document, name='run.json'):
        path = self.path(name)
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(document, handle)
        return path

    def simulate(self, config_path, out, *extra):
        result = self.runner.invoke(cli, ['simulate', '--config', config_path, '--out', out, *extra])
        self.assertEqual(result.exit_code, 0, result.output)
        return result

    def analyze(self, dataset_path, out, *extra):
        return self.runner.invoke(cli, ['analyze', dataset_path, '--out', out, *extra])


class TestSimulateCommand(CliTestCase):

    def test_example_config(self):
        out = self.path('example.csv')
        result = self.simulate(EXAMPLE_CONFIG, out)
        self.assertIn('cycles: 720', result.output)
        self.assertIn('duration: 14400 s', result.output)
        self.assertEqual(len(read_dataset(out)), 720)

    def test_same_config_gives_identical_files(self):
        self.simulate(EXAMPLE_CONFIG, self.path('a.csv'))
        self.simulate(EXAMPLE_CONFIG, self.path('b.csv'))
        self.assertEqual(file_digest(self.path('a.csv')), file_digest(self.path('b.csv')))

    def test_seed_override(self):
        self.simulate(EXAMPLE_CONFIG, self.path('a.csv'))
        self.simulate(EXAMPLE_CONFIG, self.path('b.csv'), '--seed', '7')
        self.assertNotEqual(file_digest(self.path('a.csv')), file_digest(self.path('b.csv')))
        self.assertEqual(read_dataset(self.path('b.csv')).seed, 7)

    def test_chop_shorter_than_two_samples_is_rejected(self):
        config = self.write_config({'schedule': {'sample_period': 1.0, 'chop_period': 1.5}})
        result = self.runner.invoke(cli, ['simulate', '--config', config, '--out', self.path('x.csv')])
        self.assertEqual(result.exit_code, 1)
        self.assertIn('schedule.chop_period', result.output)
        self.assertFalse(os.path.exists(self.path('x.csv')))

    def test_unknown_key_is_named(self):
        config = self.write_config({'noise': {'white_sigma': 0.1}})
        result = self.runner.invoke(cli, ['simulate', '--config', config, '--out', self.path('x.csv')])
        self.assertEqual(result.exit_code, 1)
        self.assertIn('noise.white_sigma', result.output)

    def test_missing_option_is_a_usage_error(self):
        result = self.runner.invoke(cli, ['simulate', '--config', EXAMPLE_CONFIG])
        self.assertEqual(result.exit_code, 1)

    def test_help(self):
        result = self.runner.invoke(cli, ['--help'])
        self.assertEqual(result.exit_code, 0)
        for verb in ('simulate', 'analyze', 'sweep'):
            self.assertIn(verb, result.output)


class TestAnalyzeCommand(CliTestCase):

    def test_report_and_plot_files(self):
        dataset = self.path('example.csv')
        self.simulate(EXAMPLE_CONFIG, dataset)
        out = self.path('example_report.json')
        result = self.analyze(dataset, out, '--method', 'extrapolate')
        self.assertEqual(result.exit_code, 0, result.output)
        report = read_report(out)
        self.assertEqual(report['provenance']['input_sha256'], file_digest(dataset))
        self.assertEqual(report['bias_stability']['method'], 'extrapolate')
        self.assertEqual(report['scale_factor']['source'], 'truth')
        self.assertAlmostEqual(report['rate']['applied_bias_rad'], 6.0476)
        self.assertEqual(sorted(report['regression']['channels']),
                         ['laser1_intensity', 'laser2_intensity', 'pointing_x', 'pointing_y',
                          'temperature'])
        for name in ('phase', 'allan', 'psd', 'longrun'):
            self.assertTrue(os.path.exists(self.path(f'example_report_{name}.csv')))

    def test_same_input_gives_identical_report(self):
        dataset = self.path('example.csv')
        self.simulate(EXAMPLE_CONFIG, dataset)
        self.assertEqual(self.analyze(dataset, self.path('a.json')).exit_code, 0)
        self.assertEqual(self.analyze(dataset, self.path('b.json')).exit_code, 0)
        self.assertEqual(file_digest(self.path('a.json')), file_digest(self.path('b.json')))

    def test_missing_channel_lists_available_channels(self):
        dataset = self.path('example.csv')
        self.simulate(EXAMPLE_CONFIG, dataset)
        result = self.analyze(dataset, self.path('r.json'), '--channels', 'temperature,humidity')
        self.assertEqual(result.exit_code, 2)
        self.assertIn('humidity', result.output)
        self.assertIn('pointing_x', result.output)

    def test_noiseless_rotation_only_dataset(self):
        config = self.write_config({'environment': {'rotation_rate': [0.0, 0.0, EARTH_RATE]},
                                    'schedule': {'duration': 2000.0}})
        dataset = self.path('quiet.csv')
        self.simulate(config, dataset)
        out = self.path('quiet.json')
        self.assertEqual(self.analyze(dataset, out).exit_code, 0)
        report = read_report(out)
        self.assertEqual(report['regression']['channels'], [])
        self.assertTrue(all(d <= 1e-12 for d in report['allan']['deviation_rad']))
        self.assertEqual(report['allan']['deviation_rad'], report['allan']['raw_deviation_rad'])
        self.assertAlmostEqual(report['rate']['mean_deghr'], radps_to_deghr(EARTH_RATE), places=6)

    def test_short_dataset_keeps_only_feasible_taus(self):
        config = self.write_config({'schedule': {'duration': 60.0},
                                    'noise': {'white_phase_noise_sigma': 0.01}})
        dataset = self.path('short.csv')
        self.simulate(config, dataset)
        out = self.path('short.json')
        result = self.analyze(dataset, out, '--taus', '20:200:5')
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn('warning', result.output)
        allan = read_report(out)['allan']
        self.assertEqual(allan['taus_s'], [20.0])
        self.assertEqual(allan['omitted_taus_s'], [40.0, 60.0, 120.0, 200.0])
        self.assertEqual(len(allan['warnings']), 4)

    def test_short_record_extrapolation_fits_the_whole_curve(self):
        config = self.write_config({'schedule': {'duration': 200.0},
                                    'noise': {'white_phase_noise_sigma': 0.01}})
        dataset = self.path('ten.csv')
        self.simulate(config, dataset)
        out = self.path('ten.json')
        result = self.analyze(dataset, out, '--method', 'extrapolate')
        self.assertEqual(result.exit_code, 0, result.output)
        stability = read_report(out)['bias_stability']
        self.assertIsNotNone(stability['value_rad'])
        self.assertEqual(stability['fit_window_s'][0], 20.0)
        self.assertEqual(stability['warnings'], [])

    def test_two_cycle_record_reports_without_arw(self):
        config = self.write_config({'schedule': {'duration': 40.0},
                                    'noise': {'white_phase_noise_sigma': 0.01}})
        dataset = self.path('two.csv')
        self.simulate(config, dataset)
        out = self.path('two.json')
        result = self.analyze(dataset, out)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn('ARW not estimated', result.output)
        arw = read_report(out)['arw']
        self.assertIsNone(arw['value_deg_per_rthr'])
        self.assertEqual(len(arw['warnings']), 1)
        self.assertTrue(os.path.exists(self.path('two_psd.csv')))

    def test_missing_dataset_is_a_data_error(self):
        result = self.analyze(self.path('absent.csv'), self.path('r.json'))
        self.assertEqual(result.exit_code, 2)
        self.assertIn('absent.csv', result.output)

    def test_collinear_channels_are_a_data_error(self):
        config = self.write_config({'schedule': {'duration': 400.0}, 'aux_channels': [
            {'name': 'fixed', 'process': 'constant', 'params': {'value': 2.0}}]})
        dataset = self.path('fixed.csv')
        self.simulate(config, dataset)
        result = self.analyze(dataset, self.path('fixed.json'), '--channels', 'fixed')
        self.assertEqual(result.exit_code, 2)
        self.assertIn('fixed', result.output)

    def test_data_errors_exit_with_two(self):
        dataset = self.path('example.csv')
        self.simulate(EXAMPLE_CONFIG, dataset)
        with patch('cli.combined_phases', side_effect=ShapeError('series lengths differ')):
            result = self.analyze(dataset, self.path('r.json'))
        self.assertEqual(result.exit_code, 2)
        self.assertIn('series lengths differ', result.output)

    def test_unparseable_dataset(self):
        path = self.path('bad.csv')
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write('# format = other/9\n')
        result = self.analyze(path, self.path('r.json'))
        self.assertEqual(result.exit_code, 2)

    def test_pipeline_reproduction(self):
        dataset = self.path('drift.csv')
        self.simulate(self.write_config(drift_config(seed=31)), dataset)
        out = self.path('drift.json')
        self.assertEqual(self.analyze(dataset, out).exit_code, 0)
        report = read_report(out)
        allan = report['allan']
        taus = np.array(allan['taus_s'])
        raw = np.array(allan['raw_deviation_rad'])
        corrected = np.array(allan['deviation_rad'])

        lowest = int(np.argmin(raw))
        self.assertGreater(lowest, 0)
        self.assertLess(lowest, len(raw) - 1)
        self.assertGreater(raw[-1], 2.0 * raw[lowest])

        window = taus <= 14400.0 / 10.0
        slope = np.polyfit(np.log(taus[window]), np.log(corrected[window]), 1)[0]
        self.assertAlmostEqual(slope, -0.5, delta=0.1)

        regression = report['regression']
        self.assertEqual(regression['channels'], ['tilt'])
        error = regression['standard_errors_rad_per_unit'][0]
        self.assertLess(abs(regression['coefficients_rad_per_unit'][0] - 0.5), 3.0 * error)

    def test_closed_loop_over_seeds(self):
        for seed in range(20):
            dataset = self.path(f'loop{seed}.csv')
            self.simulate(self.write_config(drift_config(seed, duration=3600.0)), dataset)
            out = self.path(f'loop{seed}.json')
            self.assertEqual(self.analyze(dataset, out).exit_code, 0)
            regression = read_report(out)['regression']
            error = regression['standard_errors_rad_per_unit'][0]
            self.assertLess(abs(regression['coefficients_rad_per_unit'][0] - 0.5), 5.0 * error)


class TestCorrection(unittest.TestCase):

    def test_correction_removes_the_channel_and_keeps_the_mean(self):
        rng = np.random.default_rng(4)
        tilt = np.cumsum(rng.normal(size=400))
        white = rng.normal(0.0, 0.1, 400)
        target = 2.0 + 0.5 * tilt + white
        model, corrected = correct(target, {'tilt': tilt, 'unused': rng.normal(size=400)}, ['tilt'])
        self.assertEqual(model.channels, ['tilt'])
        self.assertAlmostEqual(float(np.mean(corrected)), float(np.mean(target)), places=10)
        self.assertLess(abs(np.corrcoef(corrected, tilt)[0, 1]), 1e-8)

    def test_no_channels_returns_a_copy(self):
        target = np.arange(5.0)
        model, corrected = correct(target, {}, [])
        self.assertIsNone(model)
        np.testing.assert_array_equal(corrected, target)
        self.assertIsNot(corrected, target)


class TestSweepCommand(CliTestCase):

    def sweep(self, config, *extra):
        out = self.path('sweep.csv')
        result = self.runner.invoke(cli, ['sweep', '--config', config, '--out', out, *extra])
        return result, out

    def test_bias_field_apex(self):
        config = self.write_config({'environment': {'stray_field': 2e-6}})
        result, out = self.sweep(config, '--param', 'bias_field', '--range', '-1e-4:1e-4',
                                 '--steps', '21')
        self.assertEqual(result.exit_code, 0, result.output)
        header = read_header(out)
        for name in ('fwd', 'rev'):
            self.assertAlmostEqual(float(header[f'fit.{name}.apex_t']), -2e-6, delta=2e-15)
            self.assertIn(f'fit.{name}.residual_rms_rad', header)
        with open(out, encoding='utf-8') as handle:
            rows = [line for line in handle if not line.startswith('#')]
        self.assertEqual(rows[0].strip(),
                         'bias_field_t,phase_fwd_rad,phase_rev_rad,rotation_like_rad,bias_like_rad')
        self.assertEqual(len(rows), 22)

    def test_delta_sweep_has_no_recoil_in_rotation_like(self):
        config = self.write_config({})
        result, out = self.sweep(config, '--param', 'delta', '--range', '-1e-3:1e-3', '--steps', '5')
        self.assertEqual(result.exit_code, 0, result.output)
        header = read_header(out)
        self.assertAlmostEqual(float(header['fit.rotation_like.slope_rad_per_m']), 0.0, places=9)
        self.assertAlmostEqual(abs(float(header['fit.bias_like.slope_rad_per_m'])), 472.1, delta=1.0)

    def test_too_few_steps(self):
        result, _ = self.sweep(self.write_config({}), '--param', 'delta', '--range', '0:1e-3',
                               '--steps', '2')
        self.assertEqual(result.exit_code, 1)

    def test_range_outside_instrument_invariants(self):
        result, out = self.sweep(self.write_config({}), '--param', 'delta', '--range', '-2:2')
        self.assertEqual(result.exit_code, 1)
        self.assertFalse(os.path.exists(out))

    def test_reversed_range(self):
        result, _ = self.sweep(self.write_config({}), '--param', 'bias_field', '--range', '1:0')
        self.assertEqual(result.exit_code, 1)

    def test_unknown_parameter(self):
        result, _ = self.sweep(self.write_config({}), '--param', 'laser', '--range', '0:1')
        self.assertEqual(result.exit_code, 1)


if __name__ == '__main__':
    unittest.main()
