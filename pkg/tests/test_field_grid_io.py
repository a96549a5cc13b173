"""
tests/test_field_grid_io.py
Field-grid reader and writer, text and npz formats.
"""

import numpy as np
import pytest

from ercavity.cavity.field_grid import mode_volume
from ercavity.cavity.surrogate import surrogate_mode
from ercavity.errors import GridValidationError, ParseError, UsageError
from ercavity.exporters.field_grid_exporter import write_field_grid
from ercavity.parsers.field_grid_parser import HEADER, load_field_grid


# ── FIXTURES ──────────────────────────────────────────────────

@pytest.fixture(scope='module')
def small_grid():
    return surrogate_mode(dims=(33, 33, 20), spacing=(50e-9, 50e-9, 57e-9))


def _tiny_text(records, dims="2 2 2", spacing="1e-7 1e-7 1e-7"):
    return f"{HEADER}\n{dims}\n{spacing}\n" + "\n".join(records) + "\n"


GOOD_RECORDS = ["1 0 0 2.0"] * 8


# ── ROUND TRIPS ───────────────────────────────────────────────

class TestRoundTrip:
    @pytest.mark.parametrize("fmt, name", [("fieldgrid-v1", "mode.txt"), ("npz", "mode.npz")])
    def test_exact_round_trip(self, small_grid, tmp_path, fmt, name):
        path = write_field_grid(small_grid, tmp_path / name, fmt=fmt)
        loaded = load_field_grid(path, fmt=fmt)
        assert loaded.dims == small_grid.dims
        assert loaded.spacing == small_grid.spacing
        assert np.array_equal(loaded.E, small_grid.E)
        assert np.array_equal(loaded.eps, small_grid.eps)

    def test_mode_volume_survives_text_format(self, small_grid, tmp_path):
        path = write_field_grid(small_grid, tmp_path / "mode.txt")
        assert mode_volume(load_field_grid(path), 1536e-9).V_norm == mode_volume(small_grid, 1536e-9).V_norm

    def test_loaded_arrays_are_c_contiguous(self, small_grid, tmp_path):
        loaded = load_field_grid(write_field_grid(small_grid, tmp_path / "mode.txt"))
        assert loaded.E.flags['C_CONTIGUOUS']
        assert loaded.eps.flags['C_CONTIGUOUS']

    def test_x_index_runs_fastest_on_disk(self, tmp_path):
        records = [f"{i} 0 0 1.0" for i in range(1, 9)]
        path = tmp_path / "order.txt"
        path.write_text(_tiny_text(records))
        grid = load_field_grid(path)
        assert grid.E[1, 0, 0, 0] == 2.0
        assert grid.E[0, 1, 0, 0] == 3.0
        assert grid.E[0, 0, 1, 0] == 5.0

    def test_utf8_bom_is_tolerated(self, tmp_path):
        path = tmp_path / "bom.txt"
        path.write_bytes(b'\xef\xbb\xbf' + _tiny_text(GOOD_RECORDS).encode('utf-8'))
        assert load_field_grid(path).dims == (2, 2, 2)


# ── MALFORMED INPUT ───────────────────────────────────────────

class TestMalformed:
    def _write(self, tmp_path, text, name="grid.txt"):
        path = tmp_path / name
        path.write_text(text)
        return path

    def test_truncated_records(self, tmp_path):
        path = self._write(tmp_path, _tiny_text(GOOD_RECORDS[:5]))
        with pytest.raises(ParseError, match="missing section"):
            load_field_grid(path)

    def test_header_only(self, tmp_path):
        path = self._write(tmp_path, f"{HEADER}\n")
        with pytest.raises(ParseError, match="missing section: dimensions"):
            load_field_grid(path)

    def test_wrong_header_names_line_one(self, tmp_path):
        path = self._write(tmp_path, _tiny_text(GOOD_RECORDS).replace(HEADER, "GRID v2"))
        with pytest.raises(ParseError) as exc:
            load_field_grid(path)
        assert exc.value.line == 1

    def test_extra_records(self, tmp_path):
        path = self._write(tmp_path, _tiny_text(GOOD_RECORDS + ["1 0 0 2.0"]))
        with pytest.raises(ParseError, match="dimension mismatch"):
            load_field_grid(path)

    def test_eps_below_one(self, tmp_path):
        records = list(GOOD_RECORDS)
        records[3] = "1 0 0 0.5"
        path = self._write(tmp_path, _tiny_text(records))
        with pytest.raises(GridValidationError) as exc:
            load_field_grid(path)
        assert exc.value.line == 7

    def test_non_finite_value(self, tmp_path):
        records = list(GOOD_RECORDS)
        records[0] = "nan 0 0 2.0"
        path = self._write(tmp_path, _tiny_text(records))
        with pytest.raises(GridValidationError) as exc:
            load_field_grid(path)
        assert exc.value.line == 4

    def test_short_record_names_line(self, tmp_path):
        records = list(GOOD_RECORDS)
        records[2] = "1 0 2.0"
        path = self._write(tmp_path, _tiny_text(records))
        with pytest.raises(ParseError) as exc:
            load_field_grid(path)
        assert exc.value.line == 6

    def test_zero_spacing(self, tmp_path):
        path = self._write(tmp_path, _tiny_text(GOOD_RECORDS, spacing="1e-7 0 1e-7"))
        with pytest.raises(ParseError) as exc:
            load_field_grid(path)
        assert exc.value.line == 3

    def test_npz_missing_array(self, tmp_path):
        path = tmp_path / "bad.npz"
        np.savez(path, E=np.ones((2, 2, 2, 3)), spacing=np.ones(3))
        with pytest.raises(ParseError, match="eps"):
            load_field_grid(path, fmt="npz")

    def test_grid_validation_is_parse_error(self):
        assert issubclass(GridValidationError, ParseError)


class TestUsage:
    def test_missing_file(self, tmp_path):
        with pytest.raises(UsageError):
            load_field_grid(tmp_path / "absent.txt")

    def test_unknown_format(self, tmp_path, small_grid):
        with pytest.raises(UsageError):
            load_field_grid(tmp_path / "x.txt", fmt="hdf5")
        with pytest.raises(UsageError):
            write_field_grid(small_grid, tmp_path / "x.h5", fmt="hdf5")

    def test_directory_instead_of_file(self, tmp_path):
        with pytest.raises(UsageError, match="cannot read"):
            load_field_grid(tmp_path)

    def test_write_into_missing_directory(self, tmp_path, small_grid):
        with pytest.raises(UsageError, match="cannot write"):
            write_field_grid(small_grid, tmp_path / "absent" / "mode.txt")
