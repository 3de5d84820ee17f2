#!/usr/bin/env python3
""" holds the analysis result classes"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AllanResult:
    """
    Allan deviation versus cluster duration.

    confidence holds the fractional 1-sigma bound 1/sqrt(cluster_count) for
    each point. omitted_taus lists requested durations with fewer than two
    clusters; warnings holds one message per omission.
    """

    taus: np.ndarray
    deviations: np.ndarray
    cluster_counts: np.ndarray
    confidence: np.ndarray
    overlapping: bool = True
    sample_period: float = None
    sample_count: int = 0
    omitted_taus: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.taus)

    def to_dict(self):
        return {
            'taus_s': self.taus.tolist(),
            'deviation_rad': self.deviations.tolist(),
            'cluster_count': self.cluster_counts.tolist(),
            'confidence_frac': self.confidence.tolist(),
            'overlapping': self.overlapping,
            'omitted_taus_s': list(self.omitted_taus),
            'warnings': list(self.warnings),
        }


@dataclass
class PsdResult:
    """One-sided Welch power spectral density."""

    frequencies: np.ndarray
    psd: np.ndarray
    segment_length: int
    window: str = 'hann'
    overlap: int = 0
    sample_period: float = 1.0


@dataclass
class RegressionModel:
    """Fixed-constant linear correction against auxiliary channels."""

    channels: list
    coefficients: np.ndarray
    intercept: float
    residual_rms: float
    standard_errors: np.ndarray = None
    sample_count: int = 0

    def predict(self, aux):
        """Evaluates intercept + Σ coefficient × channel."""
        prediction = np.full(len(next(iter(aux.values()))), self.intercept, dtype=float)
        for name, coefficient in zip(self.channels, self.coefficients):
            prediction = prediction + coefficient * np.asarray(aux[name], dtype=float)
        return prediction

    def to_dict(self):
        return {
            'channels': list(self.channels),
            'coefficients_rad_per_unit': self.coefficients.tolist(),
            'standard_errors_rad_per_unit': (self.standard_errors.tolist()
                                             if self.standard_errors is not None else []),
            'intercept_rad': self.intercept,
            'residual_rms_rad': self.residual_rms,
            'sample_count': self.sample_count,
        }


@dataclass(frozen=True)
class ChannelCorrelation:
    """Pearson correlation of one auxiliary channel with a target; flagged when undefined."""

    name: str
    correlation: float
    flagged: bool = False


@dataclass
class SweepResult:
    """Noiseless phases of both area configurations across a swept parameter."""

    parameter: str
    values: np.ndarray
    phase_fwd: np.ndarray
    phase_rev: np.ndarray
    rotation_like: np.ndarray
    bias_like: np.ndarray
    fits: dict = field(default_factory=dict)
