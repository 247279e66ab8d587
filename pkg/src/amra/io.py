"""File formats: bank and plan JSON, pyramid directories, binary PGM.

All JSON is written canonically (sorted keys, compact separators, floats as
``%.17g``) so identical objects always serialize to identical bytes. Every
document carries ``"version": 1``; other versions are rejected.
"""

import json
import math
import os
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from .filterbank import FilterBank
from .intlat import IntMatrix
from .mask import HIGH, LOW, Mask
from .ops import Signal
from .tree import TreePlan, node_str, parse_node

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Malformed or schema-violating input file."""


# ---------------------------------------------------------------- schemas

_INT_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}, "minItems": 1}
_INT_VECTOR = {"type": "array", "items": {"type": "integer"}}
_NUM_VECTOR = {"type": "array", "items": {"type": "number"}}

BANK_SCHEMA = {
    "type": "object",
    "required": ["version", "dim", "separator", "filters"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "dim": {"type": "integer", "minimum": 1, "maximum": 4},
        "separator": {"type": "integer", "minimum": 1},
        "filters": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["matrix", "offset", "shape", "re", "band"],
                "additionalProperties": False,
                "properties": {
                    "matrix": _INT_MATRIX,
                    "offset": _INT_VECTOR,
                    "shape": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                    "re": _NUM_VECTOR,
                    "im": _NUM_VECTOR,
                    "band": {"enum": [LOW, HIGH]},
                },
            },
        },
    },
}

_BANK_OR_REF = {
    "oneOf": [
        {"type": "object", "required": ["$ref"], "properties": {"$ref": {"type": "string"}}, "additionalProperties": False},
        {"type": "object", "required": ["filters"]},
    ]
}

PLAN_SCHEMA = {
    "type": "object",
    "required": ["version", "dim", "depth", "levels"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "dim": {"type": "integer", "minimum": 1, "maximum": 4},
        "depth": {"type": "integer", "minimum": 0},
        "levels": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["bank"],
                "additionalProperties": False,
                "properties": {
                    "bank": _BANK_OR_REF,
                    "node_overrides": {"type": "object", "additionalProperties": _BANK_OR_REF},
                },
            },
        },
    },
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["version", "digest", "dim", "depth", "nodes"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": FORMAT_VERSION},
        "digest": {"type": "string"},
        "dim": {"type": "integer", "minimum": 1},
        "depth": {"type": "integer", "minimum": 0},
        "input": {
            "type": "object",
            "required": ["offset", "shape"],
            "properties": {"offset": _INT_VECTOR, "shape": _INT_VECTOR, "maxval": {"type": "integer"}},
        },
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "band", "offset", "shape", "file"],
                "properties": {
                    "id": {"type": "string"},
                    "band": {"enum": [LOW, HIGH]},
                    "offset": _INT_VECTOR,
                    "shape": _INT_VECTOR,
                    "file": {"type": "string"},
                    "matrix": _INT_MATRIX,
                    "accumulated": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
                },
            },
        },
    },
}


def _validate(doc, schema, what):
    if isinstance(doc, dict) and "version" in doc and doc["version"] != FORMAT_VERSION:
        raise FormatError(f"unsupported {what} version {doc['version']!r} (expected {FORMAT_VERSION})")
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        raise FormatError(f"invalid {what}: {exc.message}") from None


# ---------------------------------------------------------- canonical JSON


def _encode(obj):
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError("non-finite floats cannot be serialized")
        return "%.17g" % (x + 0.0)  # folds -0.0 into 0
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(json.dumps(str(k), ensure_ascii=False) + ":" + _encode(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj):
    """Deterministic JSON text (no trailing newline)."""
    return _encode(obj)


def atomic_write(path, data):
    """Write bytes or text to ``path`` via a temporary file and rename."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write(path, canonical_json(obj) + "\n")


def read_json(path):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    if raw.startswith(b"\xef\xbb\xbf"):
        raise FormatError(f"{path}: byte order marks are not allowed")
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: malformed JSON ({exc})") from None


# ------------------------------------------------------------------ banks


def bank_to_dict(bank):
    filters = []
    for a, m in bank:
        entry = {
            "band": a.band,
            "matrix": m.tolist(),
            "offset": list(a.offset),
            "re": [float(x) for x in np.real(a.data).reshape(-1)],
            "shape": list(a.shape),
        }
        if not a.is_real:
            entry["im"] = [float(x) for x in np.imag(a.data).reshape(-1)]
        filters.append(entry)
    return {"dim": bank.dim, "filters": filters, "separator": bank.separator, "version": FORMAT_VERSION}


def bank_from_dict(doc):
    _validate(doc, BANK_SCHEMA, "bank")
    d = doc["dim"]
    items = []
    for i, f in enumerate(doc["filters"]):
        shape = tuple(f["shape"])
        n = int(np.prod(shape))
        if len(shape) != d or len(f["offset"]) != d:
            raise FormatError(f"filter {i}: offset/shape length must equal dim {d}")
        if len(f["re"]) != n or ("im" in f and len(f["im"]) != n):
            raise FormatError(f"filter {i}: coefficient count does not match shape {list(shape)}")
        if len(f["matrix"]) != d or any(len(r) != d for r in f["matrix"]):
            raise FormatError(f"filter {i}: matrix must be {d}x{d}")
        data = np.array(f["re"], dtype=np.float64)
        if "im" in f:
            data = data + 1j * np.array(f["im"], dtype=np.float64)
        items.append((Mask(data.reshape(shape), tuple(f["offset"]), f["band"]), IntMatrix(f["matrix"])))
    try:
        return FilterBank(items, doc["separator"])
    except ValueError as exc:
        raise FormatError(f"invalid bank: {exc}") from None


def save_bank(path, bank):
    write_json(path, bank_to_dict(bank))


def load_bank(path):
    return bank_from_dict(read_json(path))


# ------------------------------------------------------------------ plans


def plan_to_dict(plan):
    levels = []
    for j, bank in enumerate(plan.levels):
        entry = {"bank": bank_to_dict(bank)}
        ov = {node_str(n, plan.depth): bank_to_dict(b) for n, b in plan.overrides.items() if len(n) == j}
        if ov:
            entry["node_overrides"] = ov
        levels.append(entry)
    return {"depth": plan.depth, "dim": plan.dim, "levels": levels, "version": FORMAT_VERSION}


def _resolve_bank(spec, base_dir):
    if "$ref" in spec:
        ref = Path(spec["$ref"])
        return load_bank(ref if ref.is_absolute() else Path(base_dir) / ref)
    return bank_from_dict(spec)


def plan_from_dict(doc, base_dir="."):
    _validate(doc, PLAN_SCHEMA, "plan")
    if len(doc["levels"]) != doc["depth"]:
        raise FormatError(f"plan depth {doc['depth']} but {len(doc['levels'])} levels given")
    levels, overrides = [], {}
    for j, lvl in enumerate(doc["levels"]):
        levels.append(_resolve_bank(lvl["bank"], base_dir))
        for key, spec in lvl.get("node_overrides", {}).items():
            try:
                node = parse_node(key)
            except ValueError as exc:
                raise FormatError(str(exc)) from None
            if len(node) != j:
                raise FormatError(f"override {key!r} listed under level {j} but addresses level {len(node)}")
            overrides[node] = _resolve_bank(spec, base_dir)
    try:
        return TreePlan(doc["dim"], doc["depth"], levels, overrides)
    except (ValueError, TypeError) as exc:
        raise FormatError(f"invalid plan: {exc}") from None


def save_plan(path, plan):
    write_json(path, plan_to_dict(plan))


def load_plan(path):
    return plan_from_dict(read_json(path), Path(path).parent)


# --------------------------------------------------------------- pyramids


def _node_file(node_id):
    return f"{node_id}.f64"


def save_pyramid(directory, plan, pyramid, input_box=None):
    """Write a pyramid as ``manifest.json`` plus one little-endian float64 file per leaf."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    nodes = []
    for band, store in ((LOW, pyramid.low), (HIGH, pyramid.high)):
        for node in sorted(store):
            sig = store[node]
            if np.iscomplexobj(sig.data):
                raise ValueError("pyramid files store real coefficients only")
            nid = node_str(node, plan.depth)
            atomic_write(directory / _node_file(nid), np.ascontiguousarray(sig.data, dtype="<f8").tobytes())
            entry = {"band": band, "file": _node_file(nid), "id": nid, "offset": list(sig.offset), "shape": list(sig.shape)}
            if node:
                entry["matrix"] = plan.matrix_path(node)[-1].tolist()
                entry["accumulated"] = [[str(x) for x in row] for row in plan.accumulated_matrix(node)]
            nodes.append(entry)
    manifest = {"depth": plan.depth, "digest": pyramid.digest, "dim": plan.dim, "nodes": nodes, "version": FORMAT_VERSION}
    if input_box is not None:
        manifest["input"] = input_box
    write_json(directory / "manifest.json", manifest)
    return manifest


def load_manifest(directory):
    doc = read_json(Path(directory) / "manifest.json")
    _validate(doc, MANIFEST_SCHEMA, "manifest")
    return doc


def load_pyramid(directory, plan=None):
    """Read a pyramid directory; with ``plan`` the digest and leaf sets are checked."""
    from .tree import Pyramid

    directory = Path(directory)
    doc = load_manifest(directory)
    if plan is not None:
        if doc["digest"] != plan.digest():
            raise FormatError("pyramid was produced by a different plan (digest mismatch)")
        low, high = plan.leaves()
        want = sorted(node_str(n, plan.depth) for n in low + high)
        got = sorted(n["id"] for n in doc["nodes"])
        if want != got:
            raise FormatError("manifest node list does not match the plan's leaves")
    stores = {LOW: {}, HIGH: {}}
    for entry in doc["nodes"]:
        shape = tuple(entry["shape"])
        raw = (directory / entry["file"]).read_bytes()
        if len(raw) != 8 * int(np.prod(shape)):
            raise FormatError(f"{entry['file']}: expected {8 * int(np.prod(shape))} bytes, found {len(raw)}")
        data = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
        stores[entry["band"]][parse_node(entry["id"])] = Signal(data, tuple(entry["offset"]))
    return Pyramid(stores[LOW], stores[HIGH], doc["digest"], doc["depth"]), doc


# -------------------------------------------------------------------- PGM


def _pgm_tokens(raw):
    """Split the P5 header into (tokens, data offset)."""
    tokens, i = [], 0
    while len(tokens) < 4:
        while i < len(raw) and raw[i : i + 1].isspace():
            i += 1
        if i < len(raw) and raw[i : i + 1] == b"#":
            while i < len(raw) and raw[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < len(raw) and not raw[j : j + 1].isspace() and raw[j : j + 1] != b"#":
            j += 1
        if j == i:
            raise FormatError("truncated PGM header")
        tokens.append(raw[i:j])
        i = j
    # exactly one whitespace byte separates the header from the raster
    return tokens, i + 1


def read_pgm(path):
    """Read a binary (P5) PGM; returns ``(uint array (rows, cols), maxval)``."""
    raw = Path(path).read_bytes()
    tokens, start = _pgm_tokens(raw)
    if tokens[0] != b"P5":
        raise FormatError("only binary P5 PGM files are supported")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError("non-numeric PGM header field") from None
    if maxval not in (255, 65535) or width <= 0 or height <= 0:
        raise FormatError(f"unsupported PGM geometry {width}x{height} maxval {maxval}")
    dtype = np.dtype("u1") if maxval == 255 else np.dtype(">u2")
    need = width * height * dtype.itemsize
    body = raw[start : start + need]
    if len(body) != need:
        raise FormatError("PGM raster is truncated")
    return np.frombuffer(body, dtype=dtype).reshape(height, width).astype(np.int64), maxval


def write_pgm(path, pixels, maxval=255):
    pixels = np.asarray(pixels)
    if maxval not in (255, 65535):
        raise ValueError("maxval must be 255 or 65535")
    if pixels.ndim != 2:
        raise ValueError("PGM rasters are 2-D")
    if pixels.min() < 0 or pixels.max() > maxval:
        raise ValueError("pixel values out of range")
    dtype = "u1" if maxval == 255 else ">u2"
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n{maxval}\n".encode("ascii")
    atomic_write(path, header + pixels.astype(dtype).tobytes())


def quantize(values, maxval):
    """Scale ``[0, 1]`` doubles to integers, rounding half away from zero, then clip."""
    x = np.asarray(values, dtype=np.float64) * maxval
    q = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return np.clip(q, 0, maxval).astype(np.int64)


def write_f64(path, signal, meta=None):
    """Raw little-endian float64 grid plus a ``<path>.json`` sidecar."""
    if np.iscomplexobj(signal.data):
        raise ValueError("f64 grids store real values only")
    atomic_write(path, np.ascontiguousarray(signal.data, dtype="<f8").tobytes())
    side = {"dtype": "<f8", "offset": list(signal.offset), "shape": list(signal.shape), "version": FORMAT_VERSION}
    side.update(meta or {})
    write_json(str(path) + ".json", side)


def read_f64(path):
    side = read_json(str(path) + ".json")
    if side.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported grid version {side.get('version')!r}")
    shape = tuple(side["shape"])
    data = np.frombuffer(Path(path).read_bytes(), dtype="<f8").reshape(shape)
    return Signal(data.astype(np.float64), tuple(side["offset"])), side
