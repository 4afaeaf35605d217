"""Writers for result tables (CSV, JSON), optional images and run metadata.

Every table carries the config hash, tool version and a schema version. CSV
files start with ``#`` comment lines holding that header; JSON files hold it
as top-level keys. Floats are written with ``repr`` so reading a table back
reproduces the in-memory values exactly, including non-finite ones.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import platform
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

TABLE_SCHEMA_VERSION = 1
_NONFINITE = {"nan": math.nan, "inf": math.inf, "-inf": -math.inf}


@dataclass
class Table:
    """Named rows with a fixed column order; cells are float, int, bool or str."""

    name: str
    columns: list
    rows: list = field(default_factory=list)
    units: dict = field(default_factory=dict)

    @classmethod
    def from_dicts(cls, name: str, rows: list[dict], columns=None, units=None) -> "Table":
        columns = list(columns) if columns is not None else (list(rows[0]) if rows else [])
        return cls(name, columns, [[_plain(r.get(c)) for c in columns] for r in rows], dict(units or {}))

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def dicts(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def column_types(self) -> dict:
        out = {}
        for k, c in enumerate(self.columns):
            kinds = {type(r[k]).__name__ for r in self.rows if r[k] is not None}
            out[c] = kinds.pop() if len(kinds) == 1 else ("float" if kinds <= {"float", "int"} else "str")
        return out

    def equals(self, other: "Table") -> bool:
        """Exact equality treating NaN as equal to NaN."""
        if self.name != other.name or self.columns != other.columns or len(self.rows) != len(other.rows):
            return False
        for r1, r2 in zip(self.rows, other.rows):
            for a, b in zip(r1, r2):
                if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
                    continue
                if type(a) is not type(b) or a != b:
                    return False
        return True


def _plain(v):
    """Convert numpy scalars to Python ones; complex values become strings."""
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, complex):
        return repr(v)
    return v


def _header(table: Table, meta: dict) -> dict:
    return {
        "table": table.name,
        "schema_version": TABLE_SCHEMA_VERSION,
        "tool_version": __version__,
        "config_hash": meta.get("config_hash", ""),
        "config_name": meta.get("name", ""),
    }


# ----------------------------------------------------------------------------
# JSON
# ----------------------------------------------------------------------------

def _encode_cell(v):
    if isinstance(v, float) and not math.isfinite(v):
        return {"float": repr(v)}
    return v


def _decode_cell(v):
    if isinstance(v, dict) and set(v) == {"float"}:
        return _NONFINITE[v["float"]]
    return v


def table_to_json(table: Table, meta: dict) -> str:
    doc = _header(table, meta)
    doc.update(columns=table.columns, units=table.units, column_types=table.column_types(),
               rows=[[_encode_cell(v) for v in r] for r in table.rows])
    return json.dumps(doc, indent=1, allow_nan=False)


def table_from_json(text: str) -> tuple[Table, dict]:
    doc = json.loads(text)
    if doc.get("schema_version") != TABLE_SCHEMA_VERSION:
        raise ValueError(f"unsupported table schema version {doc.get('schema_version')!r}")
    types = doc.get("column_types", {})
    rows = []
    for r in doc["rows"]:
        row = []
        for c, v in zip(doc["columns"], r):
            v = _decode_cell(v)
            if types.get(c) == "float" and isinstance(v, int) and not isinstance(v, bool):
                v = float(v)
            row.append(v)
        rows.append(row)
    meta = {k: doc[k] for k in ("table", "schema_version", "tool_version", "config_hash", "config_name")}
    return Table(doc["table"], list(doc["columns"]), rows, dict(doc.get("units", {}))), meta


# ----------------------------------------------------------------------------
# CSV
# ----------------------------------------------------------------------------

def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def table_to_csv(table: Table, meta: dict, path: Path) -> None:
    head = _header(table, meta)
    types = table.column_types()
    with open(path, "w", newline="") as fh:
        for k, v in head.items():
            fh.write(f"# {k}: {v}\n")
        fh.write("# column_types: " + ",".join(types[c] for c in table.columns) + "\n")
        if table.units:
            fh.write("# units: " + ",".join(f"{c}={u}" for c, u in table.units.items()) + "\n")
        w = csv.writer(fh)
        w.writerow(table.columns)
        for r in table.rows:
            w.writerow([_csv_cell(v) for v in r])


def table_from_csv(path: Path) -> tuple[Table, dict]:
    meta, types, units = {}, [], {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    k = 0
    while k < len(lines) and lines[k].startswith("#"):
        key, _, val = lines[k][2:].partition(": ")
        if key == "column_types":
            types = val.split(",")
        elif key == "units":
            units = dict(item.split("=", 1) for item in val.split(","))
        else:
            meta[key] = val
        k += 1
    reader = csv.reader(lines[k:])
    columns = next(reader)
    parse = {"float": lambda s: float(s) if s else None, "int": lambda s: int(s) if s else None,
             "bool": lambda s: s == "true", "str": str, "NoneType": lambda s: None}
    rows = [[parse.get(t, str)(s) for t, s in zip(types, r)] for r in reader]
    return Table(meta.get("table", ""), columns, rows, units), meta


# ----------------------------------------------------------------------------
# writers
# ----------------------------------------------------------------------------

def write_table(table: Table, out_dir: Path, meta: dict, formats=("csv", "json")) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        p = out_dir / f"{table.name}.csv"
        table_to_csv(table, meta, p)
        written.append(p)
    if "json" in formats:
        p = out_dir / f"{table.name}.json"
        p.write_text(table_to_json(table, meta))
        written.append(p)
    return written


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=1, allow_nan=False, default=_json_default))
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialise {type(o).__name__}")


def sanitize(obj):
    """Replace non-finite floats with ``{"float": "inf"}`` markers, recursively."""
    if isinstance(obj, dict):
        return {k: sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, complex):
        return [sanitize(obj.real), sanitize(obj.imag)]
    return _encode_cell(obj)


def write_run_info(out_dir: Path, command: str, argv: list[str], meta: dict, extra: dict | None = None) -> Path:
    """Timestamped provenance; kept apart from result tables so those stay reproducible."""
    from ._backend import backend_name, get_threads
    info = {
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "command": command,
        "argv": list(argv),
        "tool_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "backend": backend_name(),
        "threads": get_threads(),
        **meta,
    }
    if extra:
        info.update(extra)
    return write_json(Path(out_dir) / "run_info.json", sanitize(info))


# ----------------------------------------------------------------------------
# images
# ----------------------------------------------------------------------------

class ImageEmitter:
    """Optional raster output; a no-op with a warning when matplotlib is absent."""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self._plt = None
        if enabled:
            try:
                import matplotlib
                matplotlib.use("Agg")
                import matplotlib.pyplot as plt
                self._plt = plt
            except ImportError:
                warnings.warn("matplotlib is not installed; images are skipped", RuntimeWarning, stacklevel=2)
                self.enabled = False

    def heatmap(self, path: Path, omega_axis, delta_axis, values, label: str) -> Path | None:
        if not self.enabled:
            return None
        plt = self._plt
        fig, ax = plt.subplots(figsize=(6, 4.5))
        im = ax.pcolormesh(np.asarray(delta_axis) / 1e9, np.asarray(omega_axis) / 1e3, values, shading="nearest")
        ax.set_xlabel("delta (GHz)")
        ax.set_ylabel("omega (kHz)")
        fig.colorbar(im, ax=ax, label=label)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        return Path(path)

    def contours(self, path: Path, contour_set) -> Path | None:
        if not self.enabled:
            return None
        plt = self._plt
        fig, ax = plt.subplots(figsize=(6, 4.5))
        colors = {"optical": "tab:blue", "microwave": "tab:orange", "matching": "tab:green"}
        for fam, col in colors.items():
            for k, b in enumerate(contour_set.branches(fam)):
                ax.plot(b[:, 0] / 1e9, b[:, 1] / 1e3, color=col, lw=0.8, label=fam if k == 0 else None)
        for p in contour_set.intersections:
            ax.plot(p.delta / 1e9, p.omega / 1e3, "rx", ms=8)
        w = contour_set.window
        ax.set_xlim(w.delta_min / 1e9, w.delta_max / 1e9)
        ax.set_ylim(w.omega_min / 1e3, w.omega_max / 1e3)
        # the window extends far past the features, so compress the tails
        ax.set_xscale("symlog", linthresh=(w.delta_max - w.delta_min) / 1e9 / 100)
        ax.set_yscale("symlog", linthresh=(w.omega_max - w.omega_min) / 1e3 / 100)
        ax.set_xlabel("delta (GHz)")
        ax.set_ylabel("omega (kHz)")
        ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        return Path(path)
