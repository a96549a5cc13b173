"""
ercavity/parsers/record_parser.py
CSV and JSON readers for measurement records.

  spectrum       CSV header  frequency_hz,transmission[,sigma]
  decay trace    CSV header  time_s,counts      (uniform bins, time = bin start)
  distribution   JSON        {factors[], weights[], uncoupled_fraction}

Line numbers in ParseError messages are 1-based and count the header.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ercavity.ensemble.distribution import EnhancementDistribution
from ercavity.errors import DomainError, ParseError, UsageError
from ercavity.models.record import DecayTrace, Spectrum
from ercavity.parsers.text_io import read_text

logger = logging.getLogger(__name__)

SPECTRUM_HEADER = ['frequency_hz', 'transmission']
SPECTRUM_SIGMA = 'sigma'
TRACE_HEADER = ['time_s', 'counts']
BIN_WIDTH_RTOL = 1e-6


def _require(path: Path) -> Path:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"input file not found: {path}")
    return path


def _read_rows(path: Path, header_options: List[List[str]]) -> Tuple[List[str], List[Tuple[int, List[float]]]]:
    """Header plus (line number, float row) pairs; blank lines are skipped."""
    reader = csv.reader(io.StringIO(read_text(path)))
    header = None
    rows = []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        cells = [cell.strip() for cell in row]
        if header is None:
            header = [c.lower() for c in cells]
            if header not in header_options:
                expected = ' or '.join(','.join(h) for h in header_options)
                raise ParseError(f"unexpected header {','.join(cells)!r}, expected {expected}", line=line, path=path.name)
            continue
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(cells)}", line=line, path=path.name)
        try:
            values = [float(c) for c in cells]
        except ValueError:
            raise ParseError(f"non-numeric value in {','.join(cells)!r}", line=line, path=path.name) from None
        if not all(np.isfinite(values)):
            raise ParseError("non-finite value", line=line, path=path.name)
        rows.append((line, values))
    if header is None:
        raise ParseError("missing section: header", line=1, path=path.name)
    return header, rows


def load_spectrum(path: Path) -> Spectrum:
    path = _require(path)
    header, rows = _read_rows(path, [SPECTRUM_HEADER, SPECTRUM_HEADER + [SPECTRUM_SIGMA]])
    if not rows:
        raise ParseError("spectrum has no data rows", line=2, path=path.name)
    for (_, prev), (line, cur) in zip(rows, rows[1:]):
        if not cur[0] > prev[0]:
            raise ParseError("frequencies must be strictly ascending", line=line, path=path.name)
    for line, values in rows:
        if values[1] < 0:
            raise ParseError("negative transmission", line=line, path=path.name)
        if len(values) == 3 and not values[2] > 0:
            raise ParseError("sigma must be positive", line=line, path=path.name)
    data = np.array([values for _, values in rows])
    sigma = data[:, 2] if data.shape[1] == 3 else None
    logger.info(f"Parsed spectrum {path.name}: {len(rows)} points")
    return Spectrum(nu=data[:, 0], T=data[:, 1], sigma=sigma)


def load_decay_trace(path: Path) -> DecayTrace:
    path = _require(path)
    _, rows = _read_rows(path, [TRACE_HEADER])
    if len(rows) < 2:
        raise ParseError("a decay trace needs at least two bins to define its width", path=path.name)
    times = np.array([values[0] for _, values in rows])
    counts = np.array([values[1] for _, values in rows])
    width = times[1] - times[0]
    if not width > 0:
        raise ParseError("bin times must increase", line=rows[1][0], path=path.name)
    steps = np.diff(times)
    bad = np.flatnonzero(np.abs(steps - width) > BIN_WIDTH_RTOL * width)
    if bad.size:
        raise ParseError(f"non-uniform bin width (expected {width:.6g} s)", line=rows[bad[0] + 1][0], path=path.name)
    negative = np.flatnonzero(counts < 0)
    if negative.size:
        raise ParseError("negative counts", line=rows[negative[0]][0], path=path.name)
    logger.info(f"Parsed decay trace {path.name}: {len(rows)} bins of {width:.6g} s")
    return DecayTrace(bin_width=float(width), counts=counts, t0=float(times[0]))


def load_distribution(path: Path) -> EnhancementDistribution:
    path = _require(path)
    try:
        data = json.loads(read_text(path))
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", line=e.lineno, path=path.name) from e
    if not isinstance(data, dict):
        raise ParseError("distribution JSON must be an object", line=1, path=path.name)
    try:
        return EnhancementDistribution.from_dict(data)
    except (DomainError, TypeError, ValueError) as e:
        raise ParseError(f"invalid distribution: {e}", path=path.name) from e
