"""Binary field dump for ``(h, kappa)`` with a JSON sidecar.

Layout (all integers little-endian ``uint32``)::

    magic  b"GCRF"
    version, d, n_co, n_1 .. n_d
    signature length, signature (ASCII, e.g. "h:aij;kappa:alb")
    body: float64 little-endian, node-major in C order over the grid; per
          node the dense h[a, i, j] followed by the dense kappa[a, l, b]

Dense components are written (not canonical storage), so a reader needs no
knowledge of the symmetry layout; reading projects onto the symmetries,
which is the identity on anything this module wrote.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .gcr import ImmersionFields
from .grid import build_grid

MAGIC = b"GCRF"
FORMAT_VERSION = 1
SIGNATURE = "h:aij;kappa:alb"


def _body(fields):
    grid = fields.grid
    n = grid.n_nodes
    h = fields.h.full().reshape(fields.h.full().shape[:3] + (n,))
    k = fields.kappa.full().reshape(fields.kappa.full().shape[:3] + (n,))
    per_node = np.concatenate([h.reshape(-1, n), k.reshape(-1, n)], axis=0)
    return np.ascontiguousarray(per_node.T, dtype="<f8")


def encode(fields):
    grid = fields.grid
    sig = SIGNATURE.encode("ascii")
    head = MAGIC + struct.pack(f"<{3 + grid.d}I", FORMAT_VERSION, grid.d, fields.n_co, *grid.resolution)
    head += struct.pack("<I", len(sig)) + sig
    return head + _body(fields).tobytes()


def sidecar(fields, extra=None):
    grid = fields.grid
    meta = {
        "format": "gcrf",
        "version": FORMAT_VERSION,
        "d": grid.d,
        "n_co": fields.n_co,
        "resolution": list(grid.resolution),
        "lengths": list(grid.lengths),
        "periodic": list(grid.periodic),
        "signature": SIGNATURE,
        "byte_order": "little",
        "dtype": "float64",
        "order": "node-major; per node dense h[a,i,j] then kappa[a,l,b]",
    }
    if extra:
        meta.update(extra)
    return meta


def write_fields(path, fields, extra=None):
    """Write ``path`` and ``path`` + ``.json``; returns both paths."""
    path = Path(path)
    path.write_bytes(encode(fields))
    side = path.with_name(path.name + ".json")
    side.write_text(json.dumps(sidecar(fields, extra), indent=2, sort_keys=True) + "\n")
    return path, side


def decode(data, lengths=None, periodic=None):
    """Fields from dump bytes. ``lengths`` defaults to a ``(2*pi)^d`` box."""
    if data[:4] != MAGIC:
        raise ConfigurationError("not a field dump (bad magic)")
    off = 4
    version, d, n_co = struct.unpack_from("<3I", data, off)
    off += 12
    if version != FORMAT_VERSION:
        raise ConfigurationError(f"unsupported field dump version {version}")
    res = struct.unpack_from(f"<{d}I", data, off)
    off += 4 * d
    (slen,) = struct.unpack_from("<I", data, off)
    off += 4
    sig = data[off:off + slen].decode("ascii")
    off += slen
    if sig != SIGNATURE:
        raise ConfigurationError(f"unsupported index signature {sig!r}")
    lengths = tuple(lengths) if lengths is not None else (2.0 * np.pi,) * d
    periodic = tuple(periodic) if periodic is not None else (True,) * d
    grid = build_grid(d, lengths, res, periodic)
    nh, nk = n_co * d * d, n_co * d * n_co
    body = np.frombuffer(data, dtype="<f8", offset=off)
    if body.size != grid.n_nodes * (nh + nk):
        raise ConfigurationError(
            f"field dump body has {body.size} values, expected {grid.n_nodes * (nh + nk)}"
        )
    comps = body.reshape(grid.n_nodes, nh + nk).T.astype(float)
    h = comps[:nh].reshape((n_co, d, d) + grid.shape)
    k = comps[nh:].reshape((n_co, d, n_co) + grid.shape)
    return ImmersionFields.from_dense(grid, h, k)


def read_fields(path):
    """Read a dump, taking box lengths from its sidecar when present."""
    path = Path(path)
    side = path.with_name(path.name + ".json")
    lengths = periodic = None
    if side.exists():
        meta = json.loads(side.read_text())
        lengths, periodic = meta.get("lengths"), meta.get("periodic")
    return decode(path.read_bytes(), lengths, periodic)
