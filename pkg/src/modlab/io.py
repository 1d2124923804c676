"""Bit-stable serialization: JSON reports, CSV tables, field snapshots.

JSON output has sorted keys and floats printed with 17 significant digits so
identical inputs give byte-identical files. Non-finite floats are written as
the strings ``"inf"``, ``"-inf"`` and ``"nan"`` to stay valid JSON.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .occupation import LocalTimeField
from .spectral import SpectralField

SNAPSHOT_DTYPE = "<c8"


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = f"{x:.17g}"
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def to_plain(obj):
    """Convert numpy scalars/arrays, tuples and dataclass-like dicts to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text (sorted keys, ``%.17g`` floats)."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(o[k], level + 1)}" for k in sorted(o)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt_float(o)
        return json.dumps(o)

    return enc(to_plain(obj), 0) + "\n"


def write_json(obj, filename) -> Path:
    filename = Path(filename)
    try:
        filename.write_text(dumps(obj))
    except OSError as exc:
        raise OSError(f"cannot write {filename}: {exc.strerror}") from exc
    return filename


def read_json(filename):
    def fix(o):
        if isinstance(o, dict):
            return {k: fix(v) for k, v in o.items()}
        if isinstance(o, list):
            return [fix(v) for v in o]
        if o in ("inf", "-inf", "nan"):
            return float(o)
        return o

    return fix(json.loads(Path(filename).read_text()))


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if v is None:
        return ""
    return str(v)


def write_csv(filename, header, rows) -> Path:
    """Plain CSV with a header line; floats at 17 significant digits."""
    filename = Path(filename)
    try:
        with filename.open("w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                if len(row) != len(header):
                    raise ValueError(f"{filename}: row has {len(row)} cells, header has {len(header)}")
                fh.write(",".join(_cell(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {filename}: {exc.strerror}") from exc
    return filename


def read_csv_header(filename) -> list[str]:
    with Path(filename).open() as fh:
        return fh.readline().rstrip("\n").split(",")


def localtime_rows(field: LocalTimeField):
    """Rows ``(t, z, density)`` with ``z`` the bin centres."""
    z = field.z_centers
    for i, t in enumerate(field.t_grid):
        for zk, dk in zip(z, field.density[i]):
            yield (float(t), float(zk), float(dk))


def trajectory_rows(traj):
    for row in zip(traj.diag_times, traj.mass, traj.h1, traj.linf):
        yield tuple(float(v) for v in row)


def write_snapshot(field: SpectralField, t: float, filename) -> Path:
    """One JSON header line, then the physical values as little-endian complex64."""
    filename = Path(filename)
    header = {"d": field.d, "N": field.N, "L": field.box_length, "t": float(t),
              "real_valued": field.real_valued, "dtype": SNAPSHOT_DTYPE, "layout": "C"}
    data = np.ascontiguousarray(field.physical(), dtype=SNAPSHOT_DTYPE)
    with filename.open("wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        fh.write(data.tobytes())
    return filename


def read_snapshot(filename):
    """Return ``(header, values)`` from :func:`write_snapshot` output."""
    raw = Path(filename).read_bytes()
    cut = raw.index(b"\n")
    header = json.loads(raw[:cut])
    values = np.frombuffer(raw[cut + 1:], dtype=header["dtype"]).reshape((header["N"],) * header["d"])
    return header, values


def write_snapshot_csv(field: SpectralField, filename) -> Path:
    """1-d slice as ``x, re, im``."""
    if field.d != 1:
        raise ValueError("CSV snapshots are for one-dimensional fields")
    u = field.physical().astype(complex)
    x = field.grid()[0]
    return write_csv(filename, ["x", "re", "im"], zip(x, u.real, u.imag))
