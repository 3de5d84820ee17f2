#!/usr/bin/env python3

"""
Tool configuration

This module holds the settings shared by the simulator, the analysis pipeline,
the file formats and the command line.

Variables:
- FORMAT_VERSION (str): Version tag written into every dataset header.
- TOOL_VERSION (str): Version recorded in report provenance.
- FLOAT_FORMAT (str): Format spec for decimals; 17 significant digits round-trip binary64.
- DEFAULT_TAU_POINTS (int): Points in the default log-spaced τ grid.
- DEFAULT_SEGMENT_LENGTH (int): Default Welch segment length in samples.
- DEFAULT_ARW_BAND_FRACTION (tuple): Default ARW floor band as fractions of the Nyquist frequency.
- DEFAULT_TOP_K (int): Channel count for the reduced ("just a few parameters") correction.
- DEFAULT_FIT_WINDOW_START_SAMPLES (int): Start of the τ^(-1/2) fit window, in sample periods.
- DEFAULT_FIT_WINDOW_END_FRACTION (float): End of the τ^(-1/2) fit window, as a fraction of the record length.
- LOG_LEVEL (str): Level used when the toolkit installs its own logging handler.
- LOG_FORMAT (str): Log record format.

The tool reads no environment variables; every run is described by its
configuration file and command-line flags, so identical inputs reproduce
identical outputs.
"""
FORMAT_VERSION = 'sagnac-lab/1'
TOOL_VERSION = '1.0.0'
FLOAT_FORMAT = '.17g'

DEFAULT_TAU_POINTS = 24
DEFAULT_SEGMENT_LENGTH = 256
DEFAULT_ARW_BAND_FRACTION = (0.1, 0.9)
DEFAULT_TOP_K = 3
DEFAULT_FIT_WINDOW_START_SAMPLES = 4
DEFAULT_FIT_WINDOW_END_FRACTION = 0.1

LOG_LEVEL = 'WARNING'
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
