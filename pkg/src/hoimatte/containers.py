"""Deterministic named-array containers.

``numpy.savez`` stamps zip members with the wall clock, so two identical
saves differ byte-wise. These helpers write the same ``.npz`` layout with a
fixed timestamp and sorted member order, which keeps checkpoints and corpus
files byte-reproducible.
"""
import hashlib
import io
import json
import zipfile

import numpy as np

_EPOCH = (1980, 1, 1, 0, 0, 0)
STATE_MEMBER = "__state__.json"


def _member(zf, name, payload):
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_STORED
    info.external_attr = 0o644 << 16
    zf.writestr(info, payload)


def save_arrays(path, arrays, state=None):
    """Write ``arrays`` (name -> ndarray) and an optional JSON ``state``."""
    with zipfile.ZipFile(path, "w") as zf:
        for name in sorted(arrays):
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arrays[name]), allow_pickle=False)
            _member(zf, name + ".npy", buf.getvalue())
        if state is not None:
            _member(zf, STATE_MEMBER, json.dumps(state, sort_keys=True, indent=1).encode())


def load_arrays(path, names=None):
    """Return ``(arrays, state)``; ``state`` is None when absent."""
    arrays = {}
    state = None
    with zipfile.ZipFile(path) as zf:
        for member in zf.namelist():
            if member == STATE_MEMBER:
                state = json.loads(zf.read(member))
                continue
            name = member[: -len(".npy")]
            if names is not None and name not in names:
                continue
            with zf.open(member) as fh:
                arrays[name] = np.lib.format.read_array(io.BytesIO(fh.read()), allow_pickle=False)
    return arrays, state


def array_checksum(arrays):
    h = hashlib.sha256()
    for name in sorted(arrays):
        a = np.ascontiguousarray(arrays[name])
        h.update(name.encode())
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def file_checksum(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
