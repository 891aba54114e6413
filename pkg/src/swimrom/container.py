"""Versioned binary container for named numpy arrays.

Layout (little-endian throughout):

    magic    4 bytes  b"SWRM"
    version  uint32   currently 1
    count    uint32   number of arrays
    per array:
        name length   uint16, then UTF-8 name bytes
        dtype length  uint16, then UTF-8 numpy dtype string
        ndim          uint8
        shape         ndim x uint64
        payload       raw C-order bytes

Reload is bit-exact: payloads are written with ``tobytes()`` and read with
``frombuffer`` copies, so arrays round-trip without any float formatting.
"""

import struct

import numpy as np

_MAGIC = b"SWRM"
_VERSION = 1


class ContainerError(Exception):
    pass


def write_container(path, arrays):
    """Write a dict of name -> ndarray to ``path``."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(arrays)))
        for name, arr in arrays.items():
            a = np.ascontiguousarray(arr)
            nb = name.encode("utf-8")
            db = a.dtype.str.encode("utf-8")
            fh.write(struct.pack("<H", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<H", len(db)))
            fh.write(db)
            fh.write(struct.pack("<B", a.ndim))
            fh.write(struct.pack(f"<{a.ndim}Q", *a.shape))
            fh.write(a.tobytes())


def read_container(path):
    """Read a container written by write_container; returns name -> ndarray."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise ContainerError(f"{path}: not a recognized container file")
    version, count = struct.unpack_from("<II", data, 4)
    if version != _VERSION:
        raise ContainerError(f"{path}: unsupported container version {version}")
    out = {}
    off = 12
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", data, off)
        off += 2
        name = data[off:off + nlen].decode("utf-8")
        off += nlen
        (dlen,) = struct.unpack_from("<H", data, off)
        off += 2
        dtype = np.dtype(data[off:off + dlen].decode("utf-8"))
        off += dlen
        (ndim,) = struct.unpack_from("<B", data, off)
        off += 1
        shape = struct.unpack_from(f"<{ndim}Q", data, off)
        off += 8 * ndim
        size = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        arr = np.frombuffer(data[off:off + size], dtype=dtype).reshape(shape)
        off += size
        out[name] = arr.copy()
    if off != len(data):
        raise ContainerError(f"{path}: {len(data) - off} trailing bytes")
    return out
