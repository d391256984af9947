"""CSV and report writers with a '#' provenance header.

Numbers are written with ``repr`` so output is bitwise reproducible and
reads back exactly.  No timestamps go into headers.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from . import __version__

__all__ = ["write_csv", "read_csv", "write_report", "spectrum_csv", "provenance"]


def provenance(meta) -> list[str]:
    lines = [f"bosecrit {__version__}"]
    lines += [f"{k} = {_cell(v)}" for k, v in (meta.items() if hasattr(meta, "items") else meta)]
    return lines


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (tuple, list, np.ndarray)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def write_csv(path, columns: dict, meta=()) -> Path:
    """Columns of equal length; ``meta`` pairs go into the header comment."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    cols = [np.asarray(columns[n]) if not isinstance(columns[n], list) else columns[n] for n in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"column lengths differ: {sorted(lengths)}")
    with path.open("w", newline="") as fh:
        for line in provenance(meta):
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_cell(x) for x in row])
    return path


def read_csv(path) -> tuple[dict, dict]:
    """(columns as float arrays where possible, header metadata)."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            if "=" in line:
                k, v = line[1:].split("=", 1)
                meta[k.strip()] = v.strip()
        else:
            body.append(line)
    rows = list(csv.reader(body))
    names, data = rows[0], rows[1:]
    out = {}
    for j, n in enumerate(names):
        vals = [r[j] for r in data]
        try:
            out[n] = np.array([float(v) for v in vals])
        except ValueError:
            out[n] = vals
    return out, meta


def write_report(path, values, meta=()) -> Path:
    """``key = value`` fit report."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for line in provenance(meta):
            fh.write(f"# {line}\n")
        for k, v in (values.items() if hasattr(values, "items") else values):
            fh.write(f"{k} = {_cell(v)}\n")
    return path


def spectrum_csv(path, eigenvalues, meta=()) -> Path:
    ev = np.asarray(eigenvalues, dtype=float)
    return write_csv(path, {"index": np.arange(ev.size), "E": ev, "E_minus_E0": ev - ev[0]}, meta)
