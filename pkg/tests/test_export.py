"""Tests for the CSV and dense-text writers."""

import csv
import io

import numpy as np

from core.export import (export_dense, format_value, write_csv, write_residual_history,
                         write_spectrum, write_symbol_curve)


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestFormatValue:
    def test_float_round_trips(self):
        value = 0.1 + 0.2
        assert float(format_value(value)) == value

    def test_bools_lowercase(self):
        assert format_value(True) == "true"
        assert format_value(np.bool_(False)) == "false"

    def test_ints_and_strings(self):
        assert format_value(12) == "12"
        assert format_value("PN") == "PN"


class TestWriters:
    def test_write_csv_to_path_creates_parent(self, tmp_path):
        path = tmp_path / "nested" / "out.csv"
        count = write_csv(str(path), ("a", "b"), [(1, 2.5), (3, True)])
        assert count == 2
        assert _read(path) == [["a", "b"], ["1", "2.5"], ["3", "true"]]

    def test_write_csv_to_stream(self):
        buffer = io.StringIO()
        write_csv(buffer, ("x",), [(1,)])
        assert buffer.getvalue() == "x\n1\n"

    def test_write_csv_to_stdout(self, capsys):
        write_csv(None, ("x",), [])
        assert capsys.readouterr().out == "x\n"

    def test_residual_history(self, tmp_path):
        path = tmp_path / "res.csv"
        assert write_residual_history(str(path), [1.0, 0.5, 0.25]) == 3
        rows = _read(path)
        assert rows[0] == ["iteration", "relative_residual"]
        assert rows[-1] == ["2", "0.25"]

    def test_symbol_curve(self, tmp_path):
        path = tmp_path / "g.csv"
        write_symbol_curve(str(path), [0.0, 1.0], [3 + 4j, 1j])
        rows = _read(path)
        assert rows[0] == ["theta", "re", "im", "abs"]
        assert rows[1] == ["0", "3", "4", "5"]

    def test_spectrum_without_reference(self, tmp_path):
        path = tmp_path / "s.csv"
        write_spectrum(str(path), np.array([1 + 0j, 2 - 1j]))
        rows = _read(path)
        assert rows[2] == ["1", "2", "-1", "nan"]

    def test_export_dense(self, tmp_path):
        path = tmp_path / "m.txt"
        matrix = np.array([[1.0, 1 / 3], [0.0, -2.0]])
        export_dense(matrix, str(path))
        loaded = np.loadtxt(path)
        np.testing.assert_array_equal(loaded, matrix)
