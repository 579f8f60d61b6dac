"""Versioned on-disk formats: field dumps, CSV tables, atomic writes."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .disk import DiskGrid, Field
from .errors import InvalidInputError
from .potential import PotentialSpec

FORMAT_VERSION = 1


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    _atomic_write(Path(path), text.encode())


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def potential_block(spec: PotentialSpec) -> dict:
    block = {"kind": spec.kind}
    if spec.kind == "perturbed-cubic":
        block.update({"s": spec.s, "rho": spec.rho, "center": list(spec.center)})
    if spec.kind == "user-polynomial":
        block["coeffs"] = spec.coeffs.tolist()
        block["wells"] = spec.wells.as_array().tolist()
    return block


def spec_from_block(block: dict) -> PotentialSpec:
    kind = block["kind"]
    if kind == "cubic":
        return PotentialSpec()
    if kind == "perturbed-cubic":
        return PotentialSpec(
            kind=kind, s=block["s"], rho=block["rho"], center=tuple(block["center"])
        )
    raise InvalidInputError(f"cannot rebuild potential of kind {kind!r}")


def dump_field(prefix, field: Field) -> dict:
    """Write <prefix>.bin (row-major float64 pairs) and <prefix>.json."""
    prefix = Path(prefix)
    data = np.ascontiguousarray(field.values, dtype=np.float64).tobytes()
    _atomic_write(prefix.with_suffix(".bin"), data)
    sidecar = {
        "format_version": FORMAT_VERSION,
        "n": field.grid.n,
        "h": field.grid.h,
        "epsilon": field.epsilon,
        "c0": field.c0,
        "potential": potential_block(field.spec),
        "sha256": hashlib.sha256(data).hexdigest(),
    }
    write_json(prefix.with_suffix(".json"), sidecar)
    return sidecar


def load_field(prefix) -> Field:
    prefix = Path(prefix)
    with open(prefix.with_suffix(".json")) as f:
        sidecar = json.load(f)
    if sidecar.get("format_version") != FORMAT_VERSION:
        raise InvalidInputError("unsupported field dump format version")
    raw = Path(prefix.with_suffix(".bin")).read_bytes()
    if hashlib.sha256(raw).hexdigest() != sidecar["sha256"]:
        raise InvalidInputError("field dump checksum mismatch")
    n = sidecar["n"]
    values = np.frombuffer(raw, dtype=np.float64).reshape(n, n, 2).copy()
    spec = spec_from_block(sidecar["potential"])
    return Field(DiskGrid(n), values, sidecar["epsilon"], sidecar["c0"], spec)
