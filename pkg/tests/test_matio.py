"""Round-trip and error-path tests for the WMLABMAT serialization helpers."""

import numpy as np
import numpy.testing as npt
import pytest

from wmlab.errors import DataError
from wmlab.matio import (
    MAGIC,
    read_matrix,
    write_eigenvalues_csv,
    write_matrix,
    write_matrix_csv,
)


def test_binary_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(7)
    a = rng.standard_normal((13, 5))
    # include awkward values that would lose digits in a text format
    a[0, 0] = np.pi
    a[1, 1] = 1e-308
    a[2, 2] = -0.0
    path = tmp_path / "m.bin"
    write_matrix(path, a)
    b = read_matrix(path)
    assert b.shape == a.shape
    assert b.dtype == np.float64
    npt.assert_array_equal(a, b)


def test_binary_header_layout(tmp_path):
    path = tmp_path / "m.bin"
    write_matrix(path, np.zeros((3, 2)))
    raw = path.read_bytes()
    assert raw[:8] == MAGIC
    assert int.from_bytes(raw[8:12], "little") == 3
    assert int.from_bytes(raw[12:16], "little") == 2
    assert len(raw) == 16 + 8 * 6


def test_write_rejects_non_2d(tmp_path):
    with pytest.raises(DataError):
        write_matrix(tmp_path / "v.bin", np.arange(4.0))
    with pytest.raises(DataError):
        write_matrix_csv(tmp_path / "v.csv", np.zeros((2, 2, 2)))


def test_read_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 16)
    with pytest.raises(DataError, match="bad magic"):
        read_matrix(path)


def test_read_rejects_truncation(tmp_path):
    path = tmp_path / "m.bin"
    write_matrix(path, np.ones((4, 4)))
    raw = path.read_bytes()
    short = tmp_path / "short.bin"
    short.write_bytes(raw[:-8])
    with pytest.raises(DataError, match="truncated payload"):
        read_matrix(short)
    stub = tmp_path / "stub.bin"
    stub.write_bytes(raw[:10])
    with pytest.raises(DataError, match="truncated header"):
        read_matrix(stub)


def test_csv_repr_round_trip(tmp_path):
    a = np.array([[np.pi, 1.0 / 3.0], [6.02e23, -1e-300]])
    path = tmp_path / "m.csv"
    write_matrix_csv(path, a)
    b = np.array(
        [[float(v) for v in line.split(",")] for line in path.read_text().splitlines()]
    )
    npt.assert_array_equal(a, b)


def test_eigenvalue_csv_format(tmp_path):
    path = tmp_path / "eigs.csv"
    write_eigenvalues_csv(path, [1.5, 2.5, 99.0])
    lines = path.read_text().splitlines()
    assert lines[0] == "j,lambda_j"
    assert lines[1] == "1,1.5"
    assert lines[3] == "3,99.0"
