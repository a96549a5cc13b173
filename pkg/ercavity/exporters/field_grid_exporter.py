"""
ercavity/exporters/field_grid_exporter.py
Writes FieldGrid files readable by parsers.field_grid_parser.
Text records use 17 significant digits, enough to round-trip every double.
"""

import logging
from pathlib import Path

import numpy as np

from ercavity.cavity.field_grid import FieldGrid
from ercavity.errors import UsageError
from ercavity.exporters.output import open_output
from ercavity.parsers.field_grid_parser import FORMATS, HEADER

logger = logging.getLogger(__name__)


def write_field_grid(grid: FieldGrid, path: Path, fmt: str = 'fieldgrid-v1') -> Path:
    path = Path(path)
    if fmt not in FORMATS:
        raise UsageError(f"unknown field-grid format '{fmt}', expected one of {FORMATS}")

    if fmt == 'npz':
        with open_output(path, 'wb') as fh:
            np.savez(fh, E=grid.E, eps=grid.eps, spacing=np.asarray(grid.spacing))
    else:
        nx, ny, nz = grid.dims
        records = np.concatenate([grid.E, grid.eps[..., None]], axis=-1)
        records = records.transpose(2, 1, 0, 3).reshape(-1, 4)
        with open_output(path) as fh:
            fh.write(f"{HEADER}\n{nx} {ny} {nz}\n")
            fh.write(' '.join(f"{d:.17g}" for d in grid.spacing) + '\n')
            np.savetxt(fh, records, fmt='%.17g')

    logger.info(f"Wrote {grid.dims[0]}x{grid.dims[1]}x{grid.dims[2]} field grid to {path.name}")
    return path
