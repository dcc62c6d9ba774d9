"""Shared container format for fields, paths and families, and its JSON mirror.

Container layout::

    HOFERLIKE-CONTAINER 1\\n
    <one line of JSON header>\\n
    <raw little-endian float64 payload, sections back to back>

The header carries ``type`` (field, generator, diffeo, family), the grid size
``N``, optional ``T`` / ``S`` / ``kind``, and a ``sections`` list of
{name, shape} in payload order.  The JSON mirror stores the same header plus
every section as a nested list of floats written with shortest round-trip
repr, so container -> JSON -> container reproduces the payload bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .isotopy import DiffeoPath, GeneratorPath

MAGIC = b"HOFERLIKE-CONTAINER 1\n"
DTYPE = np.dtype("<f8")
TYPES = ("field", "generator", "diffeo", "family")


class ContainerParseError(ValueError):
    """Malformed or truncated container; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


def _header_bytes(header: dict) -> bytes:
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode() + b"\n"


def _make_header(type_: str, arrays: dict, meta: dict | None) -> dict:
    if type_ not in TYPES:
        raise ValueError(f"unknown container type {type_!r}")
    header = dict(meta or {})
    header["type"] = type_
    header["sections"] = [{"name": k, "shape": list(np.shape(v))} for k, v in arrays.items()]
    return header


def encode(type_: str, arrays: dict, meta: dict | None = None) -> bytes:
    header = _make_header(type_, arrays, meta)
    body = b"".join(np.ascontiguousarray(v, dtype=DTYPE).tobytes() for v in arrays.values())
    return MAGIC + _header_bytes(header) + body


def decode(data: bytes) -> tuple[dict, dict]:
    """Parse container bytes into (header, {section: array})."""
    if not data.startswith(MAGIC):
        raise ContainerParseError("malformed header: missing magic line", 0)
    start = len(MAGIC)
    end = data.find(b"\n", start)
    if end < 0:
        raise ContainerParseError("malformed header: unterminated header line", start)
    try:
        header = json.loads(data[start:end])
    except json.JSONDecodeError as exc:
        raise ContainerParseError(f"malformed header: {exc.msg}", start + exc.pos) from None
    if not isinstance(header, dict) or header.get("type") not in TYPES or "sections" not in header:
        raise ContainerParseError("malformed header: need type and sections", start)
    pos = end + 1
    arrays = {}
    for sec in header["sections"]:
        shape = tuple(int(n) for n in sec["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * DTYPE.itemsize
        if pos + nbytes > len(data):
            raise ContainerParseError(f"truncated file: missing section {sec['name']!r}", pos)
        arrays[sec["name"]] = np.frombuffer(data, DTYPE, count=nbytes // DTYPE.itemsize,
                                            offset=pos).reshape(shape).astype(float)
        pos += nbytes
    if pos != len(data):
        raise ContainerParseError("trailing bytes after last section", pos)
    return header, arrays


def write_container(path, type_: str, arrays: dict, meta: dict | None = None) -> Path:
    path = Path(path)
    path.write_bytes(encode(type_, arrays, meta))
    return path


def read_container(path) -> tuple[dict, dict]:
    return decode(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# typed helpers
# ---------------------------------------------------------------------------

def save_field(path, field: np.ndarray, kind: str = "scalar") -> Path:
    field = np.asarray(field, dtype=float)
    comps = 1 if field.ndim == 2 else field.shape[0]
    return write_container(path, "field", {"values": field},
                           {"N": field.shape[-1], "components": comps, "kind": kind})


def save_generator(path, gen: GeneratorPath) -> Path:
    return write_container(path, "generator", {"U": gen.U, "H": gen.H},
                           {"N": gen.N, "T": gen.T, "kind": "generator"})


def load_generator(path) -> GeneratorPath:
    header, arrays = read_container(path)
    if header["type"] != "generator":
        raise ValueError(f"expected a generator file, found {header['type']!r}")
    return GeneratorPath(arrays["U"], arrays["H"])


def save_diffeo(path, dp: DiffeoPath) -> Path:
    return write_container(path, "diffeo", {"D": dp.D}, {"N": dp.N, "T": dp.T, "kind": dp.source})


def load_diffeo(path) -> DiffeoPath:
    header, arrays = read_container(path)
    if header["type"] != "diffeo":
        raise ValueError(f"expected a diffeo file, found {header['type']!r}")
    return DiffeoPath(arrays["D"], header.get("kind", "loaded"))


def save_family(path, fam) -> Path:
    arrays = {"X": fam.X, "s": fam.s, "t": fam.t, "Z": fam.Z}
    if fam.V is not None:
        arrays["V"] = fam.V
    return write_container(path, "family", arrays, {"N": fam.N, "S": fam.S, "T": fam.T})


# ---------------------------------------------------------------------------
# JSON mirror
# ---------------------------------------------------------------------------

def _generator_stats(arrays: dict) -> list[dict]:
    U, H = arrays["U"], arrays["H"]
    T = U.shape[0] - 1
    out = []
    for n in range(T + 1):
        out.append({"t": n / T, "U_min": float(U[n].min()), "U_max": float(U[n].max()),
                    "U_osc": float(U[n].max() - U[n].min()), "U_mean": float(U[n].mean()),
                    "H": [float(H[n, 0]), float(H[n, 1])]})
    return out


def to_json_text(header: dict, arrays: dict) -> str:
    doc = {"header": header, "data": {k: v.tolist() for k, v in arrays.items()}}
    if header["type"] == "generator":
        doc["samples"] = _generator_stats(arrays)
    return json.dumps(doc, sort_keys=True)


def from_json_text(text: str) -> tuple[dict, dict]:
    try:
        doc = json.loads(text)
        header = doc["header"]
        arrays = {}
        for sec in header["sections"]:
            name = sec["name"]
            if name not in doc["data"]:
                raise ContainerParseError(f"truncated file: missing section {name!r}", 0)
            a = np.asarray(doc["data"][name], dtype=float)
            if list(a.shape) != list(sec["shape"]):
                raise ContainerParseError(f"section {name!r} has shape {list(a.shape)}", 0)
            arrays[name] = a
    except json.JSONDecodeError as exc:
        raise ContainerParseError(f"malformed JSON: {exc.msg}", exc.pos) from None
    except (KeyError, TypeError) as exc:
        raise ContainerParseError(f"malformed JSON document: missing {exc}", 0) from None
    return header, arrays


def convert(path, to: str, out=None) -> Path:
    """Convert between the container and its JSON mirror.

    ``to`` is ``"json"`` or ``"container"``; the output defaults to the input
    path with suffix ``.json`` or ``.hlc``.
    """
    path = Path(path)
    if to == "json":
        header, arrays = read_container(path)
        out = Path(out) if out else path.with_suffix(".json")
        out.write_text(to_json_text(header, arrays))
    elif to == "container":
        header, arrays = from_json_text(path.read_text())
        meta = {k: v for k, v in header.items() if k not in ("type", "sections")}
        out = Path(out) if out else path.with_suffix(".hlc")
        write_container(out, header["type"], arrays, meta)
    else:
        raise ValueError(f"unknown conversion target {to!r}")
    return out


def payload(path) -> bytes:
    """Numeric payload bytes of a container file (everything after the header line)."""
    data = Path(path).read_bytes()
    decode(data)
    return data[data.find(b"\n", len(MAGIC)) + 1:]


__all__ = ["MAGIC", "ContainerParseError", "encode", "decode", "write_container",
           "read_container", "save_field", "save_generator", "load_generator", "save_diffeo",
           "load_diffeo", "save_family", "convert", "payload", "to_json_text",
           "from_json_text"]
