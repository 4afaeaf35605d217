"""Run configuration: strict TOML with mandatory units on dimensional fields.

A configuration file has system sections (``centers`` or ``classes``,
``optical``, ``microwave``, ``pump`` and optionally ``dipoles``, ``geometry``,
``superconductor``, ``optical_loss``), per-subcommand ``task.*`` sections and
an ``output`` section. Dimensional values are strings such as
``"0.8 MHz"``; bare numbers are rejected for them. Unknown keys are errors.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .budget import (ConfigurationError, DipoleSpec, ExponentialLossFit, GeometrySpec, LossModel,
                     OpticalLossPolynomial, SuperconductorSpec, coupling_from_dipole, pump_rabi)
from .ensemble import FWHM_PER_SIGMA, GaussianEnsemble
from .model import CavityMode, CenterClass, ClassArrays, DomainError, pack_classes
from .system import TransducerSystem

SCHEMA_VERSION = 1

# kind -> pint dimensionality string
DIMENSIONS = {
    "frequency": "1/[time]",
    "length": "[length]",
    "volume": "[length]**3",
    "energy": "[energy]",
    "temperature": "[temperature]",
    "dos": "1/[energy]/[length]**3",
    "density": "1/[length]**3",
    "rate_volume": "[length]**3/[time]",
    "electric_dipole": "[charge]*[length]",
    "magnetic_dipole": "[energy]/[magnetic_field]",
}

REQUIRED = object()


def _f(kind, default=REQUIRED):
    return (kind, default)


_CLASS_FIELDS = {
    "g13": _f("frequency"), "g12": _f("frequency"),
    "gamma13": _f("frequency"), "gamma12": _f("frequency"),
    "delta13": _f("frequency", 0.0), "delta12": _f("frequency", 0.0),
    "omega_p": _f("frequency", 0.0), "weight": _f("number", 1.0),
}

_WINDOW = {
    "omega_min": _f("frequency"), "omega_max": _f("frequency"),
    "delta_min": _f("frequency"), "delta_max": _f("frequency"),
}

SCHEMA = {
    "meta": {"name": _f("str", ""), "description": _f("str", "")},
    "centers": {
        "g13": _f("frequency", None), "g12": _f("frequency", None),
        "gamma13": _f("frequency"), "gamma12": _f("frequency"),
        "delta13": _f("frequency", 0.0), "delta12": _f("frequency", 0.0),
        "omega_p": _f("frequency", None), "n_total": _f("number"),
        "sigma13": _f("frequency", 0.0), "sigma12": _f("frequency", 0.0),
        "ib_width": _f("str", "sigma"), "nodes13": _f("int", 32), "nodes12": _f("int", 32),
        "rule": _f("str", "hybrid"),
    },
    "dipoles": {"d13": _f("electric_dipole"), "d23": _f("electric_dipole"), "mu12": _f("magnetic_dipole")},
    "optical": {"frequency": _f("frequency"), "kappa_ex": _f("frequency"), "kappa_in": _f("frequency", 0.0)},
    "microwave": {"frequency": _f("frequency"), "kappa_ex": _f("frequency"), "kappa_in": _f("frequency", 0.0),
                  "temperature": _f("temperature", 0.02)},
    "pump": {"frequency": _f("frequency"), "n_photons": _f("number", 0.0), "n_ref": _f("number", None)},
    "geometry": {"v_optical": _f("volume"), "v_microwave": _f("volume"), "fill_a": _f("number", 1.0),
                 "fill_b": _f("number", 1.0), "fill_c": _f("number", 1.0), "d_om": _f("length", 1.0e-6),
                 "eps_r": _f("number", 11.7)},
    "superconductor": {"alpha_ki": _f("number"), "n0": _f("dos"), "gap": _f("energy"),
                       "kappa_b_sc": _f("frequency"), "temperature": _f("temperature", 0.02),
                       "qp_model": _f("str", "steady_state"), "eta_pb": _f("number", None),
                       "r_rec": _f("rate_volume", None), "n_qp": _f("density", None),
                       "f_model": _f("str", "unity")},
    "optical_loss": {"sc_kappa_at_min": _f("frequency", None), "sc_d_min": _f("length", 0.2e-6),
                     "sc_d_max": _f("length", 1.4e-6), "sc_decades": _f("number", 10.0),
                     "k0": _f("frequency", 0.0), "c1": _f("frequency", 0.0), "c2": _f("frequency", 0.0)},
    "output": {"dir": _f("str", "out"), "formats": _f("list_str", ["csv", "json"]), "images": _f("bool", False)},
}

TASK_SCHEMA = {
    "sweep": {**_WINDOW, "n_omega": _f("int", 201), "n_delta": _f("int", 201)},
    "contours": {**_WINDOW, "n_omega": _f("int", 800), "n_delta": _f("int", 800), "tolerance": _f("number", 1e-8),
                 "scale_omega": _f("frequency", None), "scale_delta": _f("frequency", None),
                 "merge_radius": _f("number", 1e-3)},
    "optimize": {**_WINDOW, "n_coarse": _f("int", 41)},
    "budget": {"omega": _f("frequency", 0.0), "delta": _f("frequency", 0.0)},
    "design": {"free": _f("str", "omega_p")},
    "density": {"n_photons": _f("list_number"), "sigma13": _f("list_frequency"), "sigma12": _f("frequency", None)},
    "validate": {"n_draws": _f("int", 1000), "seed": _f("int", 20240601), "max_classes": _f("int", 1024)},
}

OUTPUT_FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Malformed configuration; carries the source location when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None, path: str | None = None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        where = f"{path}: " if path else ""
        super().__init__(f"{where}{message}{loc}")
        self.line = line
        self.column = column
        self.path = path


@lru_cache(maxsize=1)
def unit_registry():
    import pint
    return pint.UnitRegistry()


def parse_quantity(text, kind: str, key: str) -> float:
    """Convert ``"0.8 MHz"`` to an SI float, checking the dimension of ``kind``."""
    if not isinstance(text, str):
        raise ValueError(f"{key} needs an explicit unit, e.g. \"{text} {_EXAMPLE_UNIT[kind]}\"")
    if re.search(r"\brad", text):
        raise ValueError(f"{key}: angular units are not accepted; give ordinary frequencies in Hz")
    ureg = unit_registry()
    try:
        q = ureg.Quantity(text)
    except Exception as exc:
        raise ValueError(f"{key}: cannot parse quantity {text!r} ({exc})") from None
    if q.dimensionless:
        raise ValueError(f"{key} needs an explicit unit, got {text!r}")
    if not q.check(DIMENSIONS[kind]):
        raise ValueError(f"{key}: {text!r} has dimension {q.dimensionality}, expected {DIMENSIONS[kind]}")
    return float(q.to_base_units().magnitude)


_EXAMPLE_UNIT = {"frequency": "Hz", "length": "m", "volume": "m^3", "energy": "J", "temperature": "K",
                 "dos": "1/J/m^3", "density": "1/m^3", "rate_volume": "m^3/s",
                 "electric_dipole": "C*m", "magnetic_dipole": "J/T"}


def _convert(value, kind: str, key: str):
    if kind in DIMENSIONS:
        return parse_quantity(value, kind, key)
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"{key} must be a number, got {value!r}")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"{key} must be an integer, got {value!r}")
        return int(value)
    if kind == "str":
        if not isinstance(value, str):
            raise ValueError(f"{key} must be a string, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise ValueError(f"{key} must be true or false, got {value!r}")
        return value
    if kind.startswith("list_"):
        if not isinstance(value, list) or not value:
            raise ValueError(f"{key} must be a non-empty list")
        return [_convert(v, kind[5:], f"{key}[{i}]") for i, v in enumerate(value)]
    raise AssertionError(kind)


# ----------------------------------------------------------------------------
# locating keys in the source text
# ----------------------------------------------------------------------------

def locate(text: str, section: str, key: str | None = None) -> tuple[int | None, int | None]:
    """Best-effort 1-based ``(line, column)`` of ``key`` inside ``[section]``."""
    lines = text.splitlines()
    head = re.compile(r"^\s*\[\[?\s*" + re.escape(section) + r"\s*\]\]?\s*(#.*)?$")
    any_head = re.compile(r"^\s*\[")
    start = None
    for i, ln in enumerate(lines):
        if head.match(ln):
            start = i
            if key is None:
                return i + 1, ln.index("[") + 1
            break
    if start is None:
        return None, None
    kpat = re.compile(r"^(\s*)" + re.escape(key) + r"\s*=")
    for j in range(start + 1, len(lines)):
        if any_head.match(lines[j]):
            break
        m = kpat.match(lines[j])
        if m:
            return j + 1, len(m.group(1)) + 1
    return start + 1, 1


# ----------------------------------------------------------------------------
# overrides
# ----------------------------------------------------------------------------

def parse_override(item: str) -> tuple[list[str], object]:
    """``"a.b=value"`` -> (["a", "b"], value); values are TOML literals, else raw strings."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value", path="--set")
    key, raw = item.split("=", 1)
    parts = [p.strip() for p in key.strip().split(".")]
    if not all(parts):
        raise ConfigError(f"override {item!r} has an empty key component", path="--set")
    raw = raw.strip()
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return parts, value


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    for item in overrides:
        parts, value = parse_override(item)
        node = data
        for p in parts[:-1]:
            nxt = node.setdefault(p, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {item!r}: {p!r} is not a section", path="--set")
            node = nxt
        node[parts[-1]] = value
    return data


def config_hash(raw: bytes, overrides: list[str] | tuple = ()) -> str:
    h = hashlib.sha256(raw)
    for item in overrides:
        h.update(b"\0--set\0" + item.encode("utf-8"))
    return h.hexdigest()


# ----------------------------------------------------------------------------
# loading
# ----------------------------------------------------------------------------

def bundled_configs() -> list[str]:
    root = resources.files("transduce_sim") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def resolve_config(name_or_path: str) -> tuple[bytes, str]:
    """Read a config by path, or by bundled name (with or without ``.toml``)."""
    p = Path(name_or_path)
    if p.is_file():
        return p.read_bytes(), str(p)
    stem = name_or_path[:-5] if name_or_path.endswith(".toml") else name_or_path
    res = resources.files("transduce_sim") / "configs" / f"{stem}.toml"
    if res.is_file():
        return res.read_bytes(), f"<bundled>/{stem}.toml"
    raise ConfigError(f"config {name_or_path!r} not found (bundled: {', '.join(bundled_configs())})")


@dataclass
class RunConfig:
    system: TransducerSystem
    n_pump: float
    tasks: dict
    output: dict
    metadata: dict
    data: dict = field(repr=False, default_factory=dict)

    @property
    def name(self) -> str:
        return self.metadata.get("name", "")


class _Reader:
    """Validates sections against the schema and reports source locations."""

    def __init__(self, text: str, source: str, overridden: set[tuple[str, ...]]):
        self.text = text
        self.source = source
        self.overridden = overridden

    def error(self, msg: str, section: str, key: str | None = None) -> ConfigError:
        path = tuple(section.split(".")) + ((key,) if key else ())
        if path in self.overridden:
            return ConfigError(msg, path=f"--set {'.'.join(path)}")
        line, col = locate(self.text, section, key)
        return ConfigError(msg, line, col, self.source)

    def section(self, data: dict, section: str, schema: dict) -> dict:
        if not isinstance(data, dict):
            raise self.error(f"[{section}] must be a table", section)
        unknown = sorted(set(data) - set(schema))
        if unknown:
            raise self.error(f"unknown key {unknown[0]!r} in [{section}]; allowed: {', '.join(schema)}",
                             section, unknown[0])
        out = {}
        for key, (kind, default) in schema.items():
            if key not in data:
                if default is REQUIRED:
                    raise self.error(f"missing required key {key!r} in [{section}]", section)
                out[key] = default
                continue
            try:
                out[key] = _convert(data[key], kind, f"{section}.{key}")
            except ValueError as exc:
                raise self.error(str(exc), section, key) from None
        return out


def _domain(section: str, fn, *args, **kw):
    """Call ``fn`` and prefix the parameter of any DomainError with ``section``."""
    try:
        return fn(*args, **kw)
    except DomainError as exc:
        param = f"{section}.{exc.parameter}" if exc.parameter else section
        raise DomainError(str(exc), param) from None


def _leaf_paths(d: dict, prefix=()) -> set[tuple[str, ...]]:
    out = set()
    for k, v in d.items():
        out.add(prefix + (k,))
        if isinstance(v, dict):
            out |= _leaf_paths(v, prefix + (k,))
    return out


def load_config(name_or_path: str, overrides: list[str] | tuple = ()) -> RunConfig:
    """Parse, validate and build a :class:`RunConfig`.

    Raises :class:`ConfigError` for syntax, schema and unit problems and
    :class:`DomainError` (with a dotted parameter path) for physically
    invalid values.
    """
    raw, source = resolve_config(name_or_path)
    overrides = list(overrides)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config is not UTF-8 ({exc})", path=source) from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"at line (\d+), column (\d+)", str(exc))
        msg = re.sub(r"\s*\(at line \d+, column \d+\)", "", str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ConfigError(f"TOML syntax error: {msg}", line, col, source) from None
    over_data = apply_overrides({}, overrides)
    data = apply_overrides(data, overrides)
    rd = _Reader(text, source, _leaf_paths(over_data))

    known = set(SCHEMA) | {"classes", "task"}
    for top in data:
        if top not in known:
            raise rd.error(f"unknown section [{top}]; allowed: {', '.join(sorted(known))}", top)

    sec = {name: rd.section(data[name], name, SCHEMA[name]) for name in SCHEMA if name in data}
    for name in ("optical", "microwave", "pump"):
        if name not in sec:
            raise ConfigError(f"missing required section [{name}]", path=source)
    sec.setdefault("output", rd.section({}, "output", SCHEMA["output"]))
    sec.setdefault("meta", rd.section({}, "meta", SCHEMA["meta"]))

    tasks_raw = data.get("task", {})
    if not isinstance(tasks_raw, dict):
        raise rd.error("[task] must be a table of subcommand sections", "task")
    tasks = {}
    for tname, tdata in tasks_raw.items():
        if tname not in TASK_SCHEMA:
            raise rd.error(f"unknown task section [task.{tname}]; allowed: {', '.join(TASK_SCHEMA)}",
                           f"task.{tname}")
        tasks[tname] = rd.section(tdata, f"task.{tname}", TASK_SCHEMA[tname])

    for fmt in sec["output"]["formats"]:
        if fmt not in OUTPUT_FORMATS:
            raise rd.error(f"unknown output format {fmt!r}; allowed: {', '.join(OUTPUT_FORMATS)}",
                           "output", "formats")

    system = _build_system(sec, data, rd)
    n_pump = sec["pump"]["n_photons"]
    meta = {
        "name": sec["meta"]["name"] or Path(source).stem,
        "description": sec["meta"]["description"],
        "source": source,
        "config_hash": config_hash(raw, overrides),
        "overrides": overrides,
        "tool_version": __version__,
        "schema_version": SCHEMA_VERSION,
    }
    return RunConfig(system, n_pump, tasks, sec["output"], meta, data)


def _build_system(sec: dict, data: dict, rd: _Reader) -> TransducerSystem:
    opt, mw, pump = sec["optical"], sec["microwave"], sec["pump"]
    cav_a = _domain("optical", CavityMode, opt["frequency"], opt["kappa_ex"], opt["kappa_in"])
    cav_c = _domain("microwave", CavityMode, mw["frequency"], mw["kappa_ex"], mw["kappa_in"])

    geometry = None
    if "geometry" in sec:
        g = sec["geometry"]
        geometry = _domain("geometry", GeometrySpec, g["v_optical"], g["v_microwave"], g["fill_a"], g["fill_b"],
                           g["fill_c"], g["d_om"], g["eps_r"])

    has_centers = "centers" in data
    has_classes = "classes" in data
    if has_centers == has_classes:
        raise ConfigError("give exactly one of [centers] or [[classes]]", path=rd.source)

    if has_classes:
        if "dipoles" in sec:
            raise rd.error("[dipoles] can only be combined with [centers]", "dipoles")
        if not isinstance(data["classes"], list) or not data["classes"]:
            raise rd.error("[[classes]] must be a non-empty array of tables", "classes")
        rows = [rd.section(c, "classes", _CLASS_FIELDS) for c in data["classes"]]
        classes = [_domain(f"classes[{i}]", CenterClass, **r) for i, r in enumerate(rows)]
        ensemble = _domain("classes", pack_classes, classes)
    else:
        c = sec["centers"]
        g13, g12, op = c["g13"], c["g12"], c["omega_p"]
        if "dipoles" in sec:
            if geometry is None:
                raise rd.error("[dipoles] needs a [geometry] section", "dipoles")
            if any(v is not None for v in (g13, g12, op)):
                raise rd.error("give couplings either in [centers] or through [dipoles], not both", "centers")
            d = sec["dipoles"]
            dip = _domain("dipoles", DipoleSpec, d["d13"], d["d23"], d["mu12"])
            g13, g12 = _domain("dipoles", coupling_from_dipole, dip, geometry, opt["frequency"], mw["frequency"])
            n_ref = pump["n_ref"] if pump["n_ref"] is not None else pump["n_photons"]
            op = _domain("dipoles", pump_rabi, dip, geometry, pump["frequency"], n_ref)
        else:
            for k, v in (("g13", g13), ("g12", g12)):
                if v is None:
                    raise rd.error(f"missing required key {k!r} in [centers]", "centers")
            op = 0.0 if op is None else op
        base = _domain("centers", CenterClass, g13, g12, c["gamma13"], c["gamma12"], c["delta13"],
                       c["delta12"], op, 1.0)
        if c["ib_width"] not in ("sigma", "fwhm"):
            raise rd.error("ib_width must be 'sigma' or 'fwhm'", "centers", "ib_width")
        scale = 1.0 if c["ib_width"] == "sigma" else 1.0 / FWHM_PER_SIGMA
        s13, s12 = c["sigma13"] * scale, c["sigma12"] * scale
        if s13 == 0.0 and s12 == 0.0:
            if not c["n_total"] > 0 or not math.isfinite(c["n_total"]):
                raise DomainError("n_total must be > 0", "centers.n_total")
            ensemble = pack_classes([base.with_(weight=c["n_total"])])
        else:
            ensemble = _domain("centers", GaussianEnsemble, c["delta13"], c["delta12"], s13, s12, c["n_total"],
                               base, c["nodes13"], c["nodes12"], c["rule"])

    loss_model = None
    if geometry is not None:
        sc = None
        if "superconductor" in sec:
            s = sec["superconductor"]
            params = {k: s[k] for k in ("eta_pb", "r_rec", "n_qp") if s[k] is not None}
            sc = _domain("superconductor", SuperconductorSpec, s["alpha_ki"], s["n0"], s["gap"], s["kappa_b_sc"],
                         s["temperature"], s["qp_model"], params, s["f_model"])
            try:
                sc.qp_density(0.0, geometry.v_microwave)
                sc.f_factor(mw["frequency"])
            except ConfigurationError as exc:
                raise rd.error(str(exc), "superconductor", "qp_model") from None
            except KeyError as exc:
                raise rd.error(f"qp_model {s['qp_model']!r} needs parameter {exc}", "superconductor") from None
        fit = None
        poly = OpticalLossPolynomial()
        if "optical_loss" in sec:
            o = sec["optical_loss"]
            if o["sc_kappa_at_min"] is not None:
                fit = _domain("optical_loss", ExponentialLossFit.from_decade_span, o["sc_kappa_at_min"],
                              o["sc_d_min"], o["sc_d_max"], o["sc_decades"])
            poly = _domain("optical_loss", OpticalLossPolynomial, o["k0"], o["c1"], o["c2"])
        loss_model = LossModel(geometry, sc, fit, poly, pump["frequency"], mw["frequency"])
    elif "superconductor" in sec or "optical_loss" in sec:
        raise ConfigError("[superconductor] and [optical_loss] need a [geometry] section", path=rd.source)

    n_ref = pump["n_ref"]
    return _domain("pump", TransducerSystem, ensemble, cav_a, cav_c, n_ref, loss_model, mw["temperature"])


def describe(cfg: RunConfig) -> str:
    return json.dumps({k: v for k, v in cfg.metadata.items()}, indent=2)
