"""Canonical feature-file format.

One header line of JSON, then one record per line:

    {"trait": "nose", "dim": 256, "count": 12, "subimages": 1}
    S4000,img01,3f8000003f000000...

Vector payloads are little-endian 32-bit floats, base16 (lowercase); iris
files carry 4 payloads followed by 4 decimal mask ratios. This binary-in-text
form is bit-exact and authoritative for golden tests. A plain-CSV variant
with decimal floats is also accepted on read (header carries
"encoding": "decimal"); writers always emit hex.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import IngestError
from .model import FeatureRecord, IrisRecord, SampleKey, Trait

SCHEMA = "fusebench/1"


def _encode_f32(vec: np.ndarray) -> str:
    return np.asarray(vec, dtype="<f4").tobytes().hex()


def _decode_f32(blob: str, dim: int, where: str) -> np.ndarray:
    if len(blob) != 8 * dim:
        raise IngestError(f"{where}: payload length {len(blob)} != {8 * dim} hex chars")
    try:
        raw = bytes.fromhex(blob)
    except ValueError:
        raise IngestError(f"{where}: payload is not valid base16") from None
    return np.frombuffer(raw, dtype="<f4").astype(np.float64)


def write_features(path, trait: Trait, records) -> None:
    """Write feature (or iris) records in the canonical hex format."""
    records = list(records)
    iris = bool(records) and isinstance(records[0], IrisRecord)
    if iris:
        dim = records[0].subvectors[0].shape[0]
    else:
        dim = records[0].vector.shape[0] if records else 0
    header = {
        "schema": SCHEMA,
        "trait": trait.value,
        "dim": int(dim),
        "count": len(records),
        "subimages": 4 if iris else 1,
    }
    lines = [json.dumps(header, separators=(",", ":"))]
    for rec in records:
        fields = [rec.key.subject_id, rec.key.sample_id]
        if iris:
            fields += [_encode_f32(s) for s in rec.subvectors]
            fields += [repr(r) for r in rec.mask_ratios]
        else:
            fields.append(_encode_f32(rec.vector))
        lines.append(",".join(fields))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_features(path):
    """Read a canonical feature file.

    Returns (trait, records) where records are FeatureRecord or IrisRecord
    depending on the header's "subimages" field. Parse failures name the
    file, line and field.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise IngestError(f"{path}: empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: line 1: bad JSON header: {exc}") from None
    for field in ("trait", "dim", "count", "subimages"):
        if field not in header:
            raise IngestError(f"{path}: line 1: header missing {field!r}")
    trait = Trait.from_name(header["trait"])
    dim = int(header["dim"])
    count = int(header["count"])
    subimages = int(header["subimages"])
    if subimages not in (1, 4):
        raise IngestError(f"{path}: line 1: subimages must be 1 or 4")
    decimal = header.get("encoding", "hex") == "decimal"

    data_lines = [ln for ln in lines[1:] if ln.strip()]
    if len(data_lines) != count:
        raise IngestError(f"{path}: header count {count} != {len(data_lines)} records")

    records = []
    for lineno, line in enumerate(data_lines, start=2):
        parts = line.split(",")
        where = f"{path}: line {lineno}"
        if subimages == 1:
            want = 2 + (dim if decimal else 1)
            if len(parts) != want:
                raise IngestError(f"{where}: expected {want} fields, got {len(parts)}")
            key = SampleKey(parts[0], parts[1])
            if decimal:
                vec = _parse_decimals(parts[2:], where)
            else:
                vec = _decode_f32(parts[2], dim, where)
            records.append(FeatureRecord(key=key, trait=trait, vector=vec))
        else:
            want = 2 + (4 * dim if decimal else 4) + 4
            if len(parts) != want:
                raise IngestError(f"{where}: expected {want} fields, got {len(parts)}")
            key = SampleKey(parts[0], parts[1])
            if decimal:
                flat = _parse_decimals(parts[2:2 + 4 * dim], where)
                subs = tuple(flat[i * dim:(i + 1) * dim] for i in range(4))
            else:
                subs = tuple(_decode_f32(parts[2 + i], dim, where) for i in range(4))
            try:
                ratios = tuple(float(x) for x in parts[-4:])
            except ValueError:
                raise IngestError(f"{where}: bad mask ratio field") from None
            records.append(IrisRecord(key=key, subvectors=subs, mask_ratios=ratios))
    keys = [r.key for r in records]
    if len(set(keys)) != len(keys):
        raise IngestError(f"{path}: duplicate sample keys")
    return trait, records


def _parse_decimals(fields, where):
    try:
        return np.array([float(x) for x in fields], dtype=np.float64)
    except ValueError:
        raise IngestError(f"{where}: bad decimal float field") from None
