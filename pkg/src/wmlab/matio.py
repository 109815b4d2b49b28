"""Binary and CSV serialization of dense matrices.

The binary format is deliberately minimal: an 8-byte magic ``WMLABMAT``,
two little-endian uint32 fields (rows, cols), then rows*cols float64
values in row-major order. It round-trips bit-exactly and is readable
from any language without a dependency.
"""

import struct

import numpy as np

from .errors import DataError

MAGIC = b"WMLABMAT"
_HEADER = struct.Struct("<8sII")

__all__ = ["write_matrix", "read_matrix", "write_matrix_csv", "write_eigenvalues_csv"]


def write_matrix(path, matrix):
    """Write a 2-d float array in the WMLABMAT binary format."""
    arr = np.ascontiguousarray(matrix, dtype="<f8")
    if arr.ndim != 2:
        raise DataError(f"expected a 2-d array, got shape {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes(order="C"))


def read_matrix(path):
    """Read a matrix written by :func:`write_matrix`."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise DataError(f"{path}: truncated header")
        magic, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}")
        payload = fh.read(8 * rows * cols)
    if len(payload) != 8 * rows * cols:
        raise DataError(f"{path}: truncated payload")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()


def write_matrix_csv(path, matrix):
    """Debug export: one CSV line per matrix row, repr-precision floats."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"expected a 2-d array, got shape {arr.shape}")
    with open(path, "w", newline="") as fh:
        for row in arr:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def write_eigenvalues_csv(path, eigenvalues):
    """CSV of (index, eigenvalue) pairs, 1-based index, ascending order."""
    vals = np.asarray(eigenvalues, dtype=np.float64).ravel()
    with open(path, "w", newline="") as fh:
        fh.write("j,lambda_j\n")
        for j, v in enumerate(vals, start=1):
            fh.write(f"{j},{repr(float(v))}\n")
