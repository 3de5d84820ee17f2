import os
import sys

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import math
import unittest

import numpy as np

from base import ConfigurationError, DomainError, RankDeficientError, ShapeError
from models.constants import EARTH_RATE, STANDARD_GRAVITY
from models.environment import EnvironmentState
from models.instrument import InstrumentConfig
from models.results import AllanResult
from models.schedule import NoiseSpec, Schedule
from phase_model import scale_factor
from simulator import simulate
from stability import (allan_deviation, arw_from_psd, bias_stability, combine_area,
                       combine_beams, detrend_regression, loglog_slope, phase_to_rate,
                       psd_welch, rank_channels, rotation_rate, scale_factor_stability, tau_grid)


def brute_force_allan(series, m):
    clusters = len(series) // m
    averages = [sum(series[i * m:(i + 1) * m]) / m for i in range(clusters)]
    differences = [(averages[i + 1] - averages[i]) ** 2 for i in range(clusters - 1)]
    return math.sqrt(0.5 * sum(differences) / len(differences))


class TestCombination(unittest.TestCase):

    def test_combine_area(self):
        rotation_like, bias_like = combine_area([3.0, 1.0], [-1.0, 1.0])
        np.testing.assert_array_equal(rotation_like, [2.0, 0.0])
        np.testing.assert_array_equal(bias_like, [1.0, 1.0])

    def test_length_mismatch(self):
        with self.assertRaises(ShapeError):
            combine_area([1.0, 2.0], [1.0])
        with self.assertRaises(ShapeError):
            combine_beams([1.0], [1.0, 2.0])

    def test_beam_subtraction_removes_platform_acceleration(self):
        config = InstrumentConfig(center_pulse_offset_delta=1e-3, transverse_velocity=(0.01, 0.0))
        schedule = Schedule(sample_period=1.0, chop_period=20.0, duration=200.0)
        still = EnvironmentState(rotation_rate=(0.0, 0.0, EARTH_RATE))
        shaken = EnvironmentState(rotation_rate=(0.0, 0.0, EARTH_RATE),
                                  acceleration=(0.0, 0.2, -STANDARD_GRAVITY))

        def beam_difference(env):
            dataset = simulate(config, schedule, env=env)
            first, _ = combine_area(dataset.phase(1, 1), dataset.phase(1, -1))
            second, _ = combine_area(dataset.phase(-1, 1), dataset.phase(-1, -1))
            return first, combine_beams(first, second)

        shaken_beam, shaken_combined = beam_difference(shaken)
        still_beam, still_combined = beam_difference(still)
        self.assertGreater(np.max(np.abs(shaken_beam - still_beam)), 0.1)
        self.assertTrue(np.all(np.abs(shaken_combined - still_combined) <= 1e-12))


class TestAllanDeviation(unittest.TestCase):

    def test_non_overlapping_matches_brute_force(self):
        rng = np.random.default_rng(5)
        taus = [1.0, 2.0, 5.0, 10.0, 100.0, 1000.0]
        for _ in range(100):
            series = rng.normal(0.0, 1.0, 10000) + np.cumsum(rng.normal(0.0, 0.01, 10000))
            result = allan_deviation(series, 1.0, taus, overlapping=False)
            for tau, deviation in zip(result.taus, result.deviations):
                expected = brute_force_allan(series.tolist(), int(tau))
                self.assertAlmostEqual(deviation, expected, delta=1e-10 * expected)

    def test_white_noise_scaling(self):
        series = np.random.default_rng(8).normal(0.0, 2.0, 2 ** 20)
        result = allan_deviation(series, 1.0, [1.0, 4.0, 16.0, 64.0, 256.0])
        self.assertTrue(np.all(result.cluster_counts >= 100))
        for tau, deviation in zip(result.taus, result.deviations):
            self.assertAlmostEqual(deviation, 2.0 / math.sqrt(tau), delta=0.05 * 2.0 / math.sqrt(tau))

    def test_linear_drift(self):
        t = np.arange(5000) * 0.5
        for overlapping in (True, False):
            result = allan_deviation(3e-3 * t, 0.5, [0.5, 5.0, 50.0, 500.0], overlapping)
            expected = 3e-3 * result.taus / math.sqrt(2.0)
            np.testing.assert_allclose(result.deviations, expected, rtol=0.01)
            self.assertAlmostEqual(loglog_slope(result), 1.0, delta=0.05)

    def test_short_series_omits_infeasible_taus(self):
        with self.assertLogs('stability', level='WARNING'):
            result = allan_deviation(np.arange(11.0), 1.0, [1.0, 2.0, 5.0, 8.0])
        np.testing.assert_array_equal(result.taus, [1.0, 2.0, 5.0])
        np.testing.assert_array_equal(result.cluster_counts, [11, 5, 2])
        np.testing.assert_allclose(result.confidence, 1.0 / np.sqrt([11, 5, 2]))
        self.assertEqual(result.omitted_taus, [8.0])
        self.assertEqual(len(result.warnings), 1)

    def test_tau_must_be_a_sample_multiple(self):
        with self.assertRaises(ConfigurationError):
            allan_deviation(np.zeros(100), 1.0, [1.5])

    def test_tau_grid(self):
        grid = tau_grid(2.0, 1000, 12)
        self.assertEqual(grid[0], 2.0)
        self.assertEqual(grid[-1], 1000.0)
        self.assertTrue(np.all(np.diff(grid) > 0.0))
        self.assertTrue(np.all(np.mod(grid, 2.0) == 0.0))

    def test_slope_of_white_noise(self):
        series = np.random.default_rng(2).normal(0.0, 1.0, 100000)
        result = allan_deviation(series, 1.0, tau_grid(1.0, len(series), 20, stop=1000.0))
        self.assertAlmostEqual(loglog_slope(result), -0.5, delta=0.05)


class TestBiasStability(unittest.TestCase):

    def setUp(self):
        taus = 2.0 ** np.arange(0, 11)
        self.result = AllanResult(taus=taus, deviations=22e-6 / np.sqrt(taus),
                                  cluster_counts=np.full(len(taus), 10),
                                  confidence=np.full(len(taus), 0.3))

    def test_minimum(self):
        result = AllanResult(taus=np.array([1.0, 10.0, 100.0]), deviations=np.array([3.0, 1.0, 2.0]),
                             cluster_counts=np.array([100, 10, 2]), confidence=np.zeros(3))
        self.assertEqual(bias_stability(result, 'minimum'), (1.0, 10.0))

    def test_square_root_extrapolation_is_exact(self):
        value, tau = bias_stability(self.result, 'extrapolate', fit_window=(1.0, 1024.0),
                                    target_tau=16384.0)
        self.assertEqual(tau, 16384.0)
        self.assertAlmostEqual(value, 22e-6 / 128.0, delta=1e-12 * 22e-6 / 128.0)

    def test_extrapolation_defaults_to_the_largest_tau(self):
        value, tau = bias_stability(self.result, 'extrapolate', fit_window=(1.0, 64.0))
        self.assertEqual(tau, 1024.0)
        self.assertAlmostEqual(value, 22e-6 / 32.0, delta=1e-12 * 22e-6 / 32.0)

    def test_empty_window(self):
        with self.assertRaises(ConfigurationError):
            bias_stability(self.result, 'extrapolate', fit_window=(5000.0, 6000.0))

    def test_unknown_method(self):
        with self.assertRaises(ConfigurationError):
            bias_stability(self.result, 'median')

    def test_scale_factor_stability(self):
        self.assertAlmostEqual(scale_factor_stability(9.1e-6, 9.1), 1e-6, places=15)
        with self.assertRaises(DomainError):
            scale_factor_stability(1.0, 0.0)


class TestSpectrum(unittest.TestCase):

    def test_arw_round_trip(self):
        arw = 0.01
        schedule = Schedule(sample_period=1.0, chop_period=2.0, duration=3600.0, beams='single')
        config = InstrumentConfig()
        dataset = simulate(config, schedule, noise=NoiseSpec(rotation_noise_arw=arw), seed=21)
        rotation_like, _ = combine_area(dataset.phase(1, 1), dataset.phase(1, -1))
        rate = rotation_like / scale_factor(config)
        psd = psd_welch(rate, dataset.sample_period, 256)
        nyquist = 0.5 / dataset.sample_period
        recovered = arw_from_psd(psd, (0.1 * nyquist, 0.9 * nyquist))
        self.assertAlmostEqual(recovered, arw, delta=0.1 * arw)

    def test_white_psd_level(self):
        series = np.random.default_rng(4).normal(0.0, 1.0, 20000)
        psd = psd_welch(series, 0.5, 512)
        self.assertEqual(psd.overlap, 256)
        self.assertAlmostEqual(float(np.median(psd.psd[5:-5])), 2.0 * 0.5, delta=0.1)

    def test_zero_series_has_zero_psd(self):
        psd = psd_welch(np.zeros(1024), 1.0, 256)
        self.assertTrue(np.all(psd.psd == 0.0))

    def test_sinusoid_peaks_at_its_frequency(self):
        t = np.arange(8192)
        psd = psd_welch(np.sin(2.0 * math.pi * 0.125 * t), 1.0, 256)
        self.assertEqual(psd.frequencies[int(np.argmax(psd.psd))], 0.125)

    def test_integral_matches_the_variance(self):
        series = np.random.default_rng(6).normal(0.0, 1.5, 2 ** 16)
        psd = psd_welch(series, 1.0, 256)
        df = psd.frequencies[1] - psd.frequencies[0]
        self.assertAlmostEqual(float(np.sum(psd.psd) * df), float(np.var(series)),
                               delta=0.05 * float(np.var(series)))

    def test_arw_ignores_an_in_band_spur(self):
        rng = np.random.default_rng(9)
        rate = rng.normal(0.0, 1e-6, 2 ** 16)
        band = (0.05, 0.45)
        clean = arw_from_psd(psd_welch(rate, 1.0, 256), band)
        spur = 1e-6 * np.sin(2.0 * math.pi * 0.25 * np.arange(len(rate)))
        spurred_psd = psd_welch(rate + spur, 1.0, 256)
        in_band = spurred_psd.psd[(spurred_psd.frequencies >= 0.05) & (spurred_psd.frequencies <= 0.45)]
        self.assertGreater(in_band.max(), 10.0 * np.median(in_band))
        self.assertAlmostEqual(arw_from_psd(spurred_psd, band), clean, delta=0.01 * clean)

    def test_segment_longer_than_series(self):
        with self.assertRaises(ConfigurationError):
            psd_welch(np.zeros(100), 1.0, 256)

    def test_empty_band(self):
        psd = psd_welch(np.random.default_rng(1).normal(size=512), 1.0, 128)
        with self.assertRaises(ConfigurationError):
            arw_from_psd(psd, (2.0, 3.0))


class TestRegression(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(12)
        self.a = rng.normal(size=500)
        self.b = np.cumsum(rng.normal(size=500))
        self.target = 1.0 + 2.0 * self.a - 3.0 * self.b

    def test_exact_recovery(self):
        model, residual = detrend_regression(self.target, {'b': self.b, 'a': self.a})
        self.assertEqual(model.channels, ['a', 'b'])
        np.testing.assert_allclose(model.coefficients, [2.0, -3.0], rtol=1e-10)
        self.assertAlmostEqual(model.intercept, 1.0, places=9)
        self.assertLess(model.residual_rms, 1e-9)
        self.assertEqual(model.sample_count, 500)
        np.testing.assert_allclose(model.predict({'a': self.a, 'b': self.b}), self.target, atol=1e-9)
        self.assertEqual(len(residual), 500)

    def test_standard_errors_cover_the_truth(self):
        noisy = self.target + np.random.default_rng(13).normal(0.0, 0.5, 500)
        model, _ = detrend_regression(noisy, {'a': self.a, 'b': self.b})
        for coefficient, error, truth in zip(model.coefficients, model.standard_errors, (2.0, -3.0)):
            self.assertGreater(error, 0.0)
            self.assertLess(abs(coefficient - truth), 4.0 * error)

    def test_detrending_a_residual_again_changes_nothing(self):
        noisy = self.target + np.random.default_rng(14).normal(0.0, 0.5, 500)
        aux = {'a': self.a, 'b': self.b}
        _, residual = detrend_regression(noisy, aux)
        _, again = detrend_regression(residual, aux)
        scale = float(np.max(np.abs(residual)))
        np.testing.assert_allclose(again, residual, rtol=0.0, atol=1e-10 * scale)

    def test_irrelevant_regressors_remove_only_their_degrees_of_freedom(self):
        rng = np.random.default_rng(15)
        n = 500
        ratios = []
        for _ in range(200):
            target = rng.normal(size=n)
            aux = {f'c{index}': rng.normal(size=n) for index in range(9)}
            _, residual = detrend_regression(target, aux)
            ratios.append(np.var(residual) / np.var(target))
        ratios = np.array(ratios)
        margin = 3.0 * ratios.std() / math.sqrt(len(ratios))
        self.assertGreaterEqual(ratios.mean(), 1.0 - 9.0 / n - margin)
        self.assertLessEqual(ratios.max(), 1.0)
        self.assertGreater(ratios.min(), 1.0 - 40.0 / n)

    def test_independent_channels_stay_inside_the_null_bound(self):
        rng = np.random.default_rng(16)
        n = 4000
        aux = {f'c{index}': rng.normal(size=n) for index in range(5)}
        for correlation in rank_channels(rng.normal(size=n), aux):
            self.assertLess(abs(correlation.correlation), 3.0 / math.sqrt(n))

    def test_collinear_channel(self):
        with self.assertRaises(RankDeficientError) as context:
            detrend_regression(self.target, {'a': self.a, 'c': 2.0 * self.a})
        self.assertEqual(context.exception.channels, ['c'])

    def test_constant_channel_is_collinear_with_the_intercept(self):
        with self.assertRaises(RankDeficientError) as context:
            detrend_regression(self.target, {'a': self.a, 'k': np.full(500, 5.0)})
        self.assertEqual(context.exception.channels, ['k'])

    def test_empty_subset(self):
        with self.assertRaises(ConfigurationError):
            detrend_regression(self.target, {})

    def test_ranking(self):
        aux = {'weak': self.a + 10.0 * np.random.default_rng(3).normal(size=500),
               'strong': self.b, 'flat': np.ones(500)}
        with self.assertLogs('stability', level='WARNING'):
            ranking = rank_channels(self.target, aux)
        self.assertEqual([c.name for c in ranking], ['strong', 'weak', 'flat'])
        self.assertEqual(ranking[-1].correlation, 0.0)
        self.assertTrue(ranking[-1].flagged)
        self.assertLess(ranking[0].correlation, 0.0)

    def test_ranking_ties_break_by_name(self):
        ranking = rank_channels(self.a, {'y': self.a, 'x': self.a})
        self.assertEqual([c.name for c in ranking], ['x', 'y'])


class TestRates(unittest.TestCase):

    def test_earth_rate_phase_converts_to_fifteen_degrees_per_hour(self):
        scale = scale_factor(InstrumentConfig())
        self.assertAlmostEqual(float(phase_to_rate(scale * EARTH_RATE, scale)), 15.0, places=9)

    def test_non_positive_scale_factor(self):
        with self.assertRaises(DomainError):
            phase_to_rate(1.0, 0.0)

    def test_rotation_rate_adds_the_bias_back(self):
        scale = scale_factor(InstrumentConfig())
        bias = scale * EARTH_RATE
        rate = rotation_rate(np.zeros(3), bias, scale)
        np.testing.assert_allclose(rate, 15.0, rtol=1e-9)


if __name__ == '__main__':
    unittest.main()
