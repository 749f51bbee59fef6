"""Binary weight files.

Layout: magic b"6GMN", uint16 format version, then one record per tensor:
uint32 rank, rank uint32 dims, row-major float64 payload. All integers and
floats little-endian. Tensors are read until EOF, so the count is implied
by the model adapter that consumes them. Identical files mean identical
models and vice versa.
"""

import struct

import numpy as np

MAGIC = b"6GMN"
VERSION = 1


def save_weights(path, tensors):
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        for t in tensors:
            # tobytes() serializes in C order on its own; ascontiguousarray
            # would silently promote 0-d tensors to 1-d
            a = np.asarray(t, dtype="<f8")
            fh.write(struct.pack("<I", a.ndim))
            for d in a.shape:
                fh.write(struct.pack("<I", d))
            fh.write(a.tobytes())


def load_weights(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ValueError(f"bad magic {blob[:4]!r}; not a weight file")
    (version,) = struct.unpack_from("<H", blob, 4)
    if version != VERSION:
        raise ValueError(f"unsupported weight format version {version}")
    off = 6
    tensors = []
    while off < len(blob):
        if off + 4 > len(blob):
            raise ValueError("truncated tensor header")
        (rank,) = struct.unpack_from("<I", blob, off)
        off += 4
        if off + 4 * rank > len(blob):
            raise ValueError("truncated dim list")
        dims = struct.unpack_from(f"<{rank}I", blob, off) if rank else ()
        off += 4 * rank
        count = 1
        for d in dims:
            count *= d
        nbytes = 8 * count
        if off + nbytes > len(blob):
            raise ValueError("truncated tensor payload")
        a = np.frombuffer(blob, dtype="<f8", count=count, offset=off)
        tensors.append(a.reshape(dims).astype(float))
        off += nbytes
    return tensors
