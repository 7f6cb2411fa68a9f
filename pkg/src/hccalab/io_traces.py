"""HCT1 binary trace files and the CSV + JSON-sidecar variant.

HCT1 layout, little-endian throughout::

    magic        4 bytes   b"HCT1"
    version      uint16
    samples/cyc  uint32
    num_cycles   uint64
    meta_len     uint32
    metadata     meta_len bytes of UTF-8 JSON (annotations live here)
    samples      num_cycles * samples/cyc float64
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from .leakage import Annotation, Trace

MAGIC = b"HCT1"
VERSION = 1
_HEADER = struct.Struct("<4sHIQI")


class TraceFileError(Exception):
    """Base class for malformed or unreadable trace files."""


class BadMagicError(TraceFileError):
    pass


class UnsupportedVersionError(TraceFileError):
    pass


class TruncatedFileError(TraceFileError):
    def __init__(self, path, section: str, expected: int, got: int):
        self.section = section
        super().__init__(f"{path}: truncated {section} section ({got} of {expected} bytes)")


class LengthMismatchError(TraceFileError):
    pass


class MetadataError(TraceFileError):
    pass


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def encode_metadata(t: Trace) -> bytes:
    doc = dict(t.metadata)
    doc["annotations"] = [a.to_dict() for a in t.annotations]
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), default=_json_default).encode("utf-8")


def decode_metadata(raw: bytes, path="<bytes>") -> tuple[dict, list[Annotation]]:
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MetadataError(f"{path}: metadata is not valid UTF-8 JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise MetadataError(f"{path}: metadata must be a JSON object")
    try:
        anns = [Annotation.from_dict(a) for a in doc.pop("annotations", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise MetadataError(f"{path}: malformed annotation ({exc})") from exc
    return doc, anns


def _build(samples, spc, anns, meta, path) -> Trace:
    try:
        return Trace(samples, spc, anns, meta)
    except ValueError as exc:
        raise MetadataError(f"{path}: {exc}") from exc


def trace_to_bytes(t: Trace) -> bytes:
    meta = encode_metadata(t)
    header = _HEADER.pack(MAGIC, VERSION, t.samples_per_cycle, t.num_cycles, len(meta))
    return header + meta + t.samples.astype("<f8", copy=False).tobytes()


def trace_from_bytes(data: bytes, path="<bytes>") -> Trace:
    if len(data) < _HEADER.size:
        raise TruncatedFileError(path, "header", _HEADER.size, len(data))
    magic, version, spc, ncyc, mlen = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported version {version}")
    if spc == 0:
        raise LengthMismatchError(f"{path}: samples_per_cycle is zero")
    pos = _HEADER.size
    if len(data) < pos + mlen:
        raise TruncatedFileError(path, "metadata", mlen, len(data) - pos)
    meta, anns = decode_metadata(data[pos:pos + mlen], path)
    pos += mlen
    want = ncyc * spc * 8
    have = len(data) - pos
    if have < want:
        raise TruncatedFileError(path, "samples", want, have)
    if have > want:
        raise LengthMismatchError(f"{path}: {have - want} trailing bytes after samples")
    samples = np.frombuffer(data, dtype="<f8", count=ncyc * spc, offset=pos).astype(np.float64)
    return _build(samples, spc, anns, meta, path)


def write_trace(t: Trace, path) -> None:
    path = Path(path)
    try:
        path.write_bytes(trace_to_bytes(t))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write trace file: {exc.strerror}", str(path)) from exc


def read_trace(path) -> Trace:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read trace file: {exc.strerror}", str(path)) from exc
    return trace_from_bytes(data, path)


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.name + ".json")


def write_csv(t: Trace, path, sidecar=None) -> Path:
    """One sample per line (shortest round-trip repr) plus a JSON sidecar."""
    path = Path(path)
    sidecar = Path(sidecar) if sidecar else sidecar_path(path)
    doc = dict(t.metadata)
    doc["annotations"] = [a.to_dict() for a in t.annotations]
    doc["samples_per_cycle"] = t.samples_per_cycle
    with open(path, "w", newline="\n") as fh:
        fh.writelines(f"{float(v)!r}\n" for v in t.samples)
    sidecar.write_text(json.dumps(doc, sort_keys=True, indent=1, default=_json_default) + "\n")
    return sidecar


def read_csv(path, sidecar=None, samples_per_cycle: int | None = None) -> Trace:
    """Ingest a one-column CSV; the sidecar supplies samples_per_cycle and annotations.

    Without a sidecar, ``samples_per_cycle`` must be passed and the trace has no
    annotations (the usual case for externally measured data).
    """
    path = Path(path)
    sc = Path(sidecar) if sidecar else sidecar_path(path)
    meta: dict = {}
    anns: list[Annotation] = []
    if sc.exists():
        meta, anns = decode_metadata(sc.read_bytes(), sc)
        spc = meta.pop("samples_per_cycle", None)
        if samples_per_cycle is None:
            samples_per_cycle = spc
    if samples_per_cycle is None:
        raise MetadataError(f"{path}: samples_per_cycle unknown (no sidecar)")
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            cell = line.split(",", 1)[0].strip()
            if not cell:
                continue
            try:
                values.append(float(cell))
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise LengthMismatchError(f"{path}:{lineno}: not a number: {cell!r}") from None
    return _build(np.array(values, dtype=np.float64), int(samples_per_cycle), anns, meta, path)


def load_any(path, samples_per_cycle: int | None = None) -> Trace:
    """Dispatch on magic bytes: HCT1 binary, otherwise CSV."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return read_trace(path)
    if os.path.splitext(path)[1].lower() in (".csv", ".txt"):
        return read_csv(path, samples_per_cycle=samples_per_cycle)
    raise BadMagicError(f"{path}: neither an HCT1 file nor a .csv trace")
