#!/usr/bin/env python3
"""
Dataset and report serialization.

Datasets are comma-separated text preceded by '#' header lines that declare
the format version, the seed, the column set and the truth record. Every
decimal is written with 17 significant digits, so binary64 values survive a
round trip exactly. Reports are JSON documents with sorted keys whose numeric
fields carry their unit in the key name.

Functions:
- write_dataset(dataset, path): Write a DatasetFile.
- read_dataset(path): Parse a DatasetFile back into a Dataset.
- write_report(report, path): Validate and write a ReportFile.
- read_report(path): Parse and validate a ReportFile.
- file_digest(path): SHA-256 of a file, for report provenance.
- write_table(path, columns, header): Write a plot-data table.

Concurrent writes to one path are a caller error.
"""

import csv
import hashlib
import json
import math
import re

import numpy as np

from base import ConfigurationError, DatasetParseError, ReportError, get_logger
from config import FLOAT_FORMAT, FORMAT_VERSION
from models.dataset import AUX_PREFIX, TIME_COLUMN, Dataset, parse_phase_column

logger = get_logger(__name__)

REPORT_SECTIONS = ('scale_factor', 'allan', 'bias_stability', 'arw', 'regression', 'provenance')
UNIT_SUFFIXES = ('_rad', '_s', '_deghr', '_hz', '_frac', '_count', '_ratio',
                 '_deg_per_rthr', '_rad_per_radps', '_rad_per_unit', '_t', '_m')
_INTEGER = re.compile(r'^[+-]?\d+$')


def format_value(value):
    """Text form of a header or cell value; floats use 17 significant digits."""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), FLOAT_FORMAT)


def parse_value(text):
    """Inverse of format_value for header values."""
    if _INTEGER.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def _open(path, mode):
    try:
        return open(path, mode, encoding='utf-8', newline='')
    except OSError as exc:
        raise type(exc)(exc.errno, f"cannot open {path}: {exc.strerror}") from exc


"""Dataset files."""

def write_dataset(dataset, path):
    """
    Write a dataset as comma-separated text.

    Args:
    - dataset (Dataset): A valid dataset; empty datasets are rejected.
    - path (str): Destination file.

    Raises:
    - ConfigurationError: If the dataset violates its invariants; nothing is written.
    - OSError: If the path cannot be written, with the path in the message.
    """
    dataset.validate()
    columns = dataset.columns()
    lines = [
        f"# format = {FORMAT_VERSION}",
        f"# seed = {'none' if dataset.seed is None else int(dataset.seed)}",
        f"# columns = {','.join(columns)}",
    ]
    for key in sorted(dataset.truth):
        lines.append(f"# truth.{key} = {format_value(dataset.truth[key])}")
    table = np.column_stack([np.asarray(dataset.column_values(c), dtype=float) for c in columns])
    with _open(path, 'w') as handle:
        handle.write('\n'.join(lines) + '\n')
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(columns)
        for row in table:
            writer.writerow([format(value, FLOAT_FORMAT) for value in row])
    logger.info("wrote %d rows x %d columns to %s", len(table), len(columns), path)


def _parse_header(lines, path):
    header = {}
    truth = {}
    count = 0
    for number, line in enumerate(lines, start=1):
        if not line.startswith('#'):
            break
        count = number
        body = line[1:].strip()
        if ' = ' not in body:
            raise DatasetParseError(f"malformed header line {line!r}", number, path)
        key, value = body.split(' = ', 1)
        if key.startswith('truth.'):
            truth[key[len('truth.'):]] = parse_value(value)
        elif key in ('format', 'seed', 'columns'):
            if key in header:
                raise DatasetParseError(f"duplicate header key {key!r}", number, path)
            header[key] = (value, number)
        else:
            raise DatasetParseError(f"unknown header key {key!r}", number, path)
    for key in ('format', 'columns'):
        if key not in header:
            raise DatasetParseError(f"missing '{key}' header", None, path)
    version, number = header['format']
    if version != FORMAT_VERSION:
        raise DatasetParseError(
            f"format version {version!r} does not match {FORMAT_VERSION!r}", number, path)
    return header, truth, count


def _declared_columns(text, number, path):
    columns = text.split(',')
    if len(set(columns)) != len(columns):
        raise DatasetParseError("duplicate column in header declaration", number, path)
    for name in columns:
        if name != TIME_COLUMN and parse_phase_column(name) is None and not (
                name.startswith(AUX_PREFIX) and len(name) > len(AUX_PREFIX)):
            raise DatasetParseError(f"unknown column {name!r}", number, path)
    if TIME_COLUMN not in columns:
        raise DatasetParseError(f"missing column {TIME_COLUMN!r}", number, path)
    return columns


def read_dataset(path):
    """
    Parse a dataset file.

    Args:
    - path (str): File written by write_dataset, columns possibly reordered.

    Returns:
    - Dataset: Values exactly as written, truth record reconstructed.

    Raises:
    - DatasetParseError: On version mismatch, malformed or non-finite cells,
      duplicate or undeclared columns; the message names the line number.
    - OSError: If the file cannot be read.
    """
    with _open(path, 'r') as handle:
        lines = handle.read().split('\n')
    if lines and lines[-1] == '':
        lines.pop()
    header, truth, offset = _parse_header(lines, path)
    declared = _declared_columns(header['columns'][0], header['columns'][1], path)

    reader = csv.reader(lines[offset:])
    try:
        names = next(reader)
    except StopIteration:
        raise DatasetParseError("missing column header row", offset + 1, path) from None
    if len(set(names)) != len(names):
        raise DatasetParseError("duplicate column in table header", offset + 1, path)
    if sorted(names) != sorted(declared):
        raise DatasetParseError("table columns do not match the header declaration", offset + 1, path)

    rows = []
    for row in reader:
        number = offset + reader.line_num
        if len(row) != len(names):
            raise DatasetParseError(f"expected {len(names)} cells, found {len(row)}", number, path)
        try:
            values = [float(cell) for cell in row]
        except ValueError:
            raise DatasetParseError("malformed decimal", number, path) from None
        if not all(math.isfinite(v) for v in values):
            raise DatasetParseError("non-finite value", number, path)
        rows.append(values)
    if not rows:
        raise DatasetParseError("dataset has no rows", None, path)

    table = np.asarray(rows, dtype=float)
    by_name = {name: table[:, index].copy() for index, name in enumerate(names)}
    phases, aux = {}, {}
    for name in declared:
        key = parse_phase_column(name)
        if key is not None:
            phases[key] = by_name[name]
        elif name != TIME_COLUMN:
            aux[name[len(AUX_PREFIX):]] = by_name[name]
    seed_text = header.get('seed', ('none', None))[0]
    dataset = Dataset(time=by_name[TIME_COLUMN], phases=phases, aux=aux, truth=truth,
                      seed=None if seed_text == 'none' else int(seed_text))
    try:
        return dataset.validate()
    except ConfigurationError as exc:
        raise DatasetParseError(str(exc), None, path) from exc


"""Report files."""

def _check_units(node, where):
    if isinstance(node, dict):
        for key, value in node.items():
            path = f"{where}.{key}" if where else key
            leaves = value if isinstance(value, list) else [value]
            numeric = any(isinstance(v, (int, float)) and not isinstance(v, bool) for v in leaves)
            if numeric and not key.endswith(UNIT_SUFFIXES):
                raise ReportError(f"numeric field {path!r} lacks a unit suffix")
            if isinstance(value, float) and not math.isfinite(value):
                raise ReportError(f"field {path!r} is not finite")
            if isinstance(value, (dict, list)):
                _check_units(value, path)
    elif isinstance(node, list):
        for index, item in enumerate(node):
            if isinstance(item, (dict, list)):
                _check_units(item, f"{where}[{index}]")
            elif isinstance(item, float) and not math.isfinite(item):
                raise ReportError(f"field {where}[{index}] is not finite")


def validate_report(report):
    """Ensures every section is present and every numeric key names its unit."""
    missing = [s for s in REPORT_SECTIONS if s not in report]
    if missing:
        raise ReportError(f"report is missing section(s): {', '.join(missing)}")
    _check_units(report, '')
    return report


def render_report(report):
    """Deterministic text form: sorted keys, two-space indent, trailing newline."""
    validate_report(report)
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + '\n'


def write_report(report, path):
    """
    Write an analysis report.

    Raises:
    - ReportError: If a section is missing or a numeric key lacks a unit; nothing is written.
    - OSError: If the path cannot be written.
    """
    text = render_report(report)
    with _open(path, 'w') as handle:
        handle.write(text)


def read_report(path):
    """Read and validate a report written by write_report."""
    with _open(path, 'r') as handle:
        try:
            report = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ReportError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return validate_report(report)


def file_digest(path):
    """SHA-256 hex digest of a file."""
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for block in iter(lambda: handle.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


def write_table(path, columns, header=None):
    """
    Write a plot-data table.

    Args:
    - path (str): Destination file.
    - columns (dict): Column name -> equal-length numeric sequence, written in insertion order.
    - header (dict): Optional key-value pairs written as '# key = value' lines.
    """
    names = list(columns)
    table = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    with _open(path, 'w') as handle:
        for key, value in (header or {}).items():
            handle.write(f"# {key} = {format_value(value)}\n")
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(names)
        for row in table:
            writer.writerow([format(value, FLOAT_FORMAT) for value in row])
