"""
ercavity/exporters/csv_exporter.py
Column-oriented CSV (and distribution JSON) for plotting tools.
Headers match what parsers.record_parser reads back.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Sequence

from ercavity.ensemble.distribution import EnhancementDistribution
from ercavity.exporters.output import open_output, write_output_text
from ercavity.models.record import DecayTrace, Spectrum

logger = logging.getLogger(__name__)


def _write_rows(path: Path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    with open_output(path) as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(header)
        n = 0
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
            n += 1
    logger.info(f"Wrote {n} rows to {path.name}")
    return path


def write_decay_trace(trace: DecayTrace, path: Path) -> Path:
    return _write_rows(path, ['time_s', 'counts'], zip(trace.times, trace.counts))


def write_normalized_decay(times: Sequence[float], values: Sequence[float], path: Path) -> Path:
    """Decay curve scaled by the fitted bulk coefficient."""
    return _write_rows(path, ['time_s', 'normalized'], zip(times, values))


def write_spectrum(scan: Spectrum, path: Path) -> Path:
    if scan.sigma is None:
        return _write_rows(path, ['frequency_hz', 'transmission'], zip(scan.nu, scan.T))
    return _write_rows(path, ['frequency_hz', 'transmission', 'sigma'], zip(scan.nu, scan.T, scan.sigma))


def write_efficiency_curve(reduction_factors: Sequence[float], etas: Sequence[float], path: Path) -> Path:
    return _write_rows(path, ['reduction_factor', 'eta'], zip(reduction_factors, etas))


def write_distribution(dist: EnhancementDistribution, path: Path) -> Path:
    path = write_output_text(path, json.dumps(dist.to_dict(), indent=2))
    logger.info(f"Wrote {dist.factors.size}-bin distribution to {path.name}")
    return path
