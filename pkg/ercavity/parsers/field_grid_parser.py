"""
ercavity/parsers/field_grid_parser.py
Reads externally computed mode fields.

FORMATS:
  fieldgrid-v1  text, line-oriented:
                  FIELDGRID v1
                  nx ny nz
                  dx dy dz                  (metres)
                  Ex Ey Ez eps              x nx·ny·nz records, x fastest
  npz           numpy archive with arrays E (nx,ny,nz,3), eps (nx,ny,nz), spacing (3,)

Every failure raises ParseError naming the line (text) or the missing array (npz).
Non-finite values and eps < 1 are rejected.
"""

import logging
from pathlib import Path

import numpy as np

from ercavity.cavity.field_grid import FieldGrid
from ercavity.errors import GridValidationError, ParseError, UsageError
from ercavity.parsers.text_io import read_text

logger = logging.getLogger(__name__)

HEADER = 'FIELDGRID v1'
FORMATS = ('fieldgrid-v1', 'npz')
RECORD_OFFSET = 4   # first record sits on line 4


def load_field_grid(path: Path, fmt: str = 'fieldgrid-v1') -> FieldGrid:
    """Load a FieldGrid in the given format descriptor."""
    path = Path(path)
    if fmt not in FORMATS:
        raise UsageError(f"unknown field-grid format '{fmt}', expected one of {FORMATS}")
    if not path.exists():
        raise UsageError(f"field-grid file not found: {path}")
    grid = _load_npz(path) if fmt == 'npz' else _load_text(path)
    logger.info(f"Loaded {grid.dims[0]}x{grid.dims[1]}x{grid.dims[2]} field grid from {path.name}")
    return grid


def _load_text(path: Path) -> FieldGrid:
    lines = read_text(path).splitlines()
    while lines and not lines[-1].strip():
        lines.pop()

    if not lines:
        raise ParseError("missing section: header", line=1, path=path.name)
    if lines[0].strip() != HEADER:
        raise ParseError(f"malformed header {lines[0].strip()[:40]!r}, expected {HEADER!r}", line=1, path=path.name)

    if len(lines) < 2:
        raise ParseError("missing section: dimensions", line=2, path=path.name)
    dims = _parse_fields(lines[1], 3, int, 2, path, 'dimensions')
    if any(n < 2 for n in dims):
        raise ParseError(f"every grid dimension must be >= 2, got {dims}", line=2, path=path.name)

    if len(lines) < 3:
        raise ParseError("missing section: spacing", line=3, path=path.name)
    spacing = _parse_fields(lines[2], 3, float, 3, path, 'spacing')
    if not all(np.isfinite(spacing)) or any(d <= 0 for d in spacing):
        raise ParseError(f"grid spacings must be positive and finite, got {spacing}", line=3, path=path.name)

    nx, ny, nz = dims
    expected = nx * ny * nz
    records = lines[3:]
    if len(records) < expected:
        raise ParseError(
            f"missing section: records (expected {expected}, found {len(records)})",
            line=len(lines) + 1, path=path.name,
        )
    if len(records) > expected:
        raise ParseError(
            f"dimension mismatch: {len(records)} records for a {nx}x{ny}x{nz} grid",
            line=RECORD_OFFSET + expected, path=path.name,
        )

    try:
        data = np.loadtxt(records, dtype=float, ndmin=2)
    except ValueError:
        data = None
    if data is None or data.shape != (expected, 4):
        _locate_bad_record(records, path)
        raise ParseError("malformed records", path=path.name)

    finite = np.all(np.isfinite(data), axis=1)
    if not finite.all():
        bad = int(np.argmin(finite))
        raise GridValidationError("non-finite value in record", line=RECORD_OFFSET + bad, path=path.name)
    below = data[:, 3] < 1.0
    if below.any():
        bad = int(np.argmax(below))
        raise GridValidationError(f"permittivity {data[bad, 3]:.6g} < 1", line=RECORD_OFFSET + bad, path=path.name)

    # x fastest on disk -> (nx, ny, nz) in memory
    cube = data.reshape(nz, ny, nx, 4).transpose(2, 1, 0, 3)
    return _build(spacing, cube[..., :3], cube[..., 3], path)


def _load_npz(path: Path) -> FieldGrid:
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as e:
        raise ParseError(f"unreadable npz archive: {e}", path=path.name) from e
    with archive:
        for key in ('E', 'eps', 'spacing'):
            if key not in archive.files:
                raise ParseError(f"missing section: array '{key}'", path=path.name)
        E, eps, spacing = archive['E'], archive['eps'], archive['spacing']
    if np.asarray(spacing).shape != (3,):
        raise ParseError(f"spacing must hold 3 values, got shape {np.asarray(spacing).shape}", path=path.name)
    return _build(tuple(float(d) for d in spacing), E, eps, path)


def _build(spacing, E, eps, path: Path) -> FieldGrid:
    try:
        return FieldGrid(spacing=tuple(spacing), E=E, eps=eps)
    except GridValidationError as e:
        raise GridValidationError(str(e), path=path.name) from e


def _parse_fields(text: str, count: int, kind, line: int, path: Path, section: str):
    parts = text.split()
    if len(parts) != count:
        raise ParseError(f"malformed {section}: expected {count} values, got {len(parts)}", line=line, path=path.name)
    try:
        return tuple(kind(p) for p in parts)
    except ValueError as e:
        raise ParseError(f"malformed {section}: {e}", line=line, path=path.name) from e


def _locate_bad_record(records, path: Path) -> None:
    for i, rec in enumerate(records):
        parts = rec.split()
        if len(parts) != 4:
            raise ParseError(f"expected 4 values (Ex Ey Ez eps), got {len(parts)}", line=RECORD_OFFSET + i, path=path.name)
        try:
            [float(p) for p in parts]
        except ValueError as e:
            raise ParseError(f"unparseable value: {e}", line=RECORD_OFFSET + i, path=path.name) from e
