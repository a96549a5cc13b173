"""
ercavity/exporters/output.py
Output files for every writer. An unwritable path raises UsageError naming
the path.
"""

from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator

from ercavity.errors import UsageError


@contextmanager
def open_output(path: Path, mode: str = 'w') -> Iterator[IO]:
    path = Path(path)
    binary = 'b' in mode
    try:
        fh = path.open(mode) if binary else path.open(mode, encoding='utf-8', newline='')
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror or e}") from e
    with fh:
        try:
            yield fh
        except OSError as e:
            raise UsageError(f"cannot write {path}: {e.strerror or e}") from e


def write_output_text(path: Path, text: str) -> Path:
    with open_output(path) as fh:
        fh.write(text)
    return Path(path)
