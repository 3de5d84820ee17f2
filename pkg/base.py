#!/usr/bin/env python3
"""Shared exception hierarchy and logger factory."""

import logging

from config import LOG_FORMAT, LOG_LEVEL


"""Base class for every error raised by the toolkit."""
class SagnacLabError(Exception):
    """Root of the sagnac-lab error hierarchy."""


class DomainError(SagnacLabError, ValueError):
    """An input lies outside the validity domain of a phase-model formula."""


class SaturationError(DomainError):
    """A detected population lies outside the fringe range (fringe lock lost)."""


class ConfigurationError(SagnacLabError, ValueError):
    """A configuration, schedule or analysis option violates its invariants."""


class ShapeError(SagnacLabError, ValueError):
    """Series that must be aligned have different lengths."""


class RankDeficientError(SagnacLabError, ValueError):
    """
    The regression design matrix is rank deficient.

    Attributes:
    - channels (list[str]): The channels that add no new direction to the design.
    """

    def __init__(self, channels):
        self.channels = list(channels)
        super().__init__(
            "Design matrix is rank deficient; collinear channels: {}".format(
                ", ".join(self.channels)))


class DatasetParseError(SagnacLabError):
    """
    A dataset file does not conform to the format.

    Attributes:
    - line_number (int): 1-based line of the offending content, or None.
    """

    def __init__(self, message, line_number=None, path=None):
        self.line_number = line_number
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line_number is not None:
            where += f":{line_number}"
        super().__init__(f"{where}: {message}" if where else message)


class ReportError(SagnacLabError):
    """A report document is missing sections or violates the unit-key rule."""


_configured = False


def get_logger(name):
    """
    Return a module logger, installing the default handler on first use.

    Args:
    - name (str): Usually the calling module's __name__.

    Returns:
    - logging.Logger: The named logger.
    """
    global _configured
    if not _configured:
        logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)
        _configured = True
    return logging.getLogger(name)
