from __future__ import annotations

import os
from pathlib import Path
from typing import Union

import numpy as np

from gpps.config import SNAPSHOT_MAGIC, SNAPSHOT_VERSION

HEADER_DTYPE = np.dtype(
    [("magic", "S8"), ("version", "<u2"), ("dtype_code", "u1"), ("ndim", "u1")]
)
DTYPE_CODES = {1: np.dtype("<c16"), 2: np.dtype("<f8")}


def _dtype_code(values: np.ndarray) -> int:
    if np.iscomplexobj(values):
        return 1
    if np.issubdtype(values.dtype, np.floating):
        return 2
    raise ValueError(
        f"Snapshots store complex128 or float64 arrays, {values.dtype} given."
    )


def write_snapshot(path: Union[str, Path], values: np.ndarray) -> None:
    """
    Write an array to a self-describing binary snapshot.

    Layout, all little-endian: 8-byte magic `b"GPPSSNAP"`, uint16 format
    version, uint8 dtype code (1 = complex128, 2 = float64), uint8 number of
    dimensions, one uint64 per dimension, then the C-ordered payload.

    Args:
        path (Union[str, Path]): Destination file; parent directories are
            created.
        values (np.ndarray): Complex or real floating array.

    Example:
        ```python
        from gpps import Wavefunction, make_grid
        from gpps.tools.snapshot import read_snapshot, write_snapshot

        psi = Wavefunction.gaussian(make_grid(dim=2, extents=8.0, points=64))
        write_snapshot("runs/field.snap", psi.values)
        (read_snapshot("runs/field.snap") == psi.values).all()
        # True
        ```
    """
    values = np.asarray(values)
    code = _dtype_code(values)
    if values.ndim > np.iinfo(np.uint8).max:
        raise ValueError(f"Snapshots support at most 255 axes, {values.ndim} given.")
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header["magic"] = SNAPSHOT_MAGIC
    header["version"] = SNAPSHOT_VERSION
    header["dtype_code"] = code
    header["ndim"] = values.ndim
    shape = np.asarray(values.shape, dtype="<u8")
    payload = np.ascontiguousarray(values, dtype=DTYPE_CODES[code])

    parent_directory = os.path.dirname(str(path))
    if parent_directory and not os.path.exists(parent_directory):
        os.makedirs(parent_directory)
    with open(path, "wb") as file:
        file.write(header.tobytes())
        file.write(shape.tobytes())
        file.write(payload.tobytes())


def read_snapshot(path: Union[str, Path]) -> np.ndarray:
    """
    Read a snapshot written by `write_snapshot`.

    Args:
        path (Union[str, Path]): Snapshot file.

    Returns:
        np.ndarray: Array in native byte order with the stored shape and dtype.

    Raises:
        ValueError: When the file is truncated, has the wrong magic, an unknown
            version or dtype code, or a payload of the wrong size.
    """
    with open(path, "rb") as file:
        data = file.read()
    if len(data) < HEADER_DTYPE.itemsize:
        raise ValueError(f"'{path}' is too short to be a snapshot.")
    header = np.frombuffer(data, dtype=HEADER_DTYPE, count=1)[0]
    if header["magic"] != SNAPSHOT_MAGIC:
        raise ValueError(f"'{path}' is not a snapshot: bad magic {header['magic']!r}.")
    if int(header["version"]) != SNAPSHOT_VERSION:
        raise ValueError(
            f"Unsupported snapshot version {int(header['version'])} in '{path}'."
        )
    code = int(header["dtype_code"])
    if code not in DTYPE_CODES:
        raise ValueError(f"Unknown snapshot dtype code {code} in '{path}'.")

    ndim = int(header["ndim"])
    offset = HEADER_DTYPE.itemsize
    if len(data) < offset + 8 * ndim:
        raise ValueError(f"'{path}' ends inside the snapshot shape.")
    shape = tuple(int(n) for n in np.frombuffer(data, "<u8", ndim, offset))
    offset += 8 * ndim
    dtype = DTYPE_CODES[code]
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if len(data) - offset != expected:
        raise ValueError(
            f"Snapshot payload of '{path}' has {len(data) - offset} bytes, "
            f"{expected} expected for shape {shape}."
        )
    values = np.frombuffer(data, dtype=dtype, offset=offset).reshape(shape)
    return values.astype(dtype.newbyteorder("="))
