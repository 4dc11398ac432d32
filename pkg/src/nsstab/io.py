"""Files written by the command line: headed CSV tables and a hashed manifest."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import __version__
from .errors import UsageError

MANIFEST_NAME = "manifest.json"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path, columns: Sequence[str], rows, meta: Optional[Mapping] = None) -> Path:
    """CSV with ``# key: value`` metadata lines above the column header.

    Floats are written with ``repr`` so values round-trip exactly.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# nsstab {__version__}"]
    for k, v in (meta or {}).items():
        lines.append(f"# {k}: {v}")
    lines.append(",".join(columns))
    for r in rows:
        if len(r) != len(columns):
            raise UsageError(f"row of length {len(r)} does not match {len(columns)} columns")
        lines.append(",".join(_fmt(v) for v in r))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Inverse of :func:`write_csv`: ``(meta, columns, array)``."""
    meta, columns, data = {}, None, []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    for line in text.splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if ": " in body:
                k, v = body.split(": ", 1)
                meta[k] = v
        elif columns is None:
            columns = line.split(",")
        elif line:
            try:
                data.append([float(x) for x in line.split(",")])
            except ValueError:
                raise UsageError(f"{path}: non-numeric row {line!r}") from None
    if columns is None:
        raise UsageError(f"{path}: no column header")
    return meta, columns, np.array(data, dtype=float).reshape(-1, len(columns))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


class Manifest:
    """Single writer for the list of produced files.

    Entries are recorded relative to the output directory with their
    sha256.  ``status`` is ``complete`` only when :meth:`finish` is called
    without an error.
    """

    def __init__(self, outdir, mode: str):
        self.outdir = Path(outdir)
        self.mode = mode
        self.entries = []
        self.summary = {}

    def add(self, path, kind: str, partial: bool = False) -> Path:
        path = Path(path)
        self.entries.append({
            "file": path.relative_to(self.outdir).as_posix(),
            "kind": kind,
            "sha256": sha256_file(path),
            "partial": bool(partial),
        })
        return path

    def finish(self, error: Optional[BaseException] = None) -> Path:
        doc = {
            "nsstab_version": __version__,
            "mode": self.mode,
            "status": "complete" if error is None else "partial",
            "files": sorted(self.entries, key=lambda e: e["file"]),
            "summary": self.summary,
        }
        if error is not None:
            doc["error"] = f"{type(error).__name__}: {error}"
        return write_json(self.outdir / MANIFEST_NAME, doc)


def records(rows: Iterable[Mapping], columns: Sequence[str]):
    return [[r[c] for c in columns] for r in rows]
