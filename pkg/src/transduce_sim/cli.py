"""Command-line entry point: ``transduce-sim <command> --config FILE``.

Exit status: 0 success, 1 unexpected failure or failed validation, 2 bad
arguments or configuration (with line/column where known), 3 physics domain
error (with the offending parameter path).
"""

from __future__ import annotations

import argparse
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import set_threads
from .budget import ConfigurationError, RangeWarning
from .config import ConfigError, RunConfig, bundled_configs, load_config
from .emit import ImageEmitter, Table, write_run_info, write_table
from .model import DomainError, OperatingPoint

COMMANDS = ("sweep", "contours", "optimize", "budget", "validate", "design")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3
VALIDATE_RTOL = 1e-9
RECIPROCITY_RTOL = 1e-12


def _hz(v: float) -> str:
    a = abs(v)
    for unit, s in (("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3)):
        if a >= s:
            return f"{v / s:.6g} {unit}"
    return f"{v:.6g} Hz"


def _task(cfg: RunConfig, name: str) -> dict:
    if name not in cfg.tasks:
        raise ConfigError(f"config has no [task.{name}] section", path=cfg.metadata["source"])
    return cfg.tasks[name]


# ----------------------------------------------------------------------------
# subcommands; each returns (tables, summary lines, exit status, extra info)
# ----------------------------------------------------------------------------

def cmd_sweep(cfg: RunConfig, args, images: ImageEmitter, out: Path):
    from .sweep import sweep
    if args.density:
        return _density(cfg, out)
    t = _task(cfg, "sweep")
    grid = sweep(cfg.system, (t["omega_min"], t["omega_max"]), (t["delta_min"], t["delta_max"]),
                 (t["n_omega"], t["n_delta"]), cfg.n_pump)
    rows = grid.rows()
    table = Table.from_dicts("sweep", rows, units={"omega_hz": "Hz", "delta_hz": "Hz"})
    i, j = grid.argmax()
    w, d = grid.omega_axis[i], grid.delta_axis[j]
    n_err = int(np.sum(grid.errors != ""))
    lines = [f"grid {grid.shape[0]} x {grid.shape[1]}, n_pump = {cfg.n_pump:g}",
             f"max eta = {grid.values['eta'][i, j]:.6f} at omega = {_hz(w)}, delta = {_hz(d)}",
             f"cells with errors: {n_err}"]
    if grid.omega_axis[0] <= 0 <= grid.omega_axis[-1] and grid.delta_axis[0] <= 0 <= grid.delta_axis[-1]:
        oi, oj = grid.nearest_index(0.0, 0.0)
        lines.append(f"eta at origin cell = {grid.values['eta'][oi, oj]:.6f}; maximum at origin cell: "
                     f"{'yes' if (oi, oj) == (i, j) else 'no'}")
    images.heatmap(out / "sweep_eta.png", grid.omega_axis, grid.delta_axis, grid.values["eta"], "eta")
    return [table], lines, EXIT_OK, {"argmax": [float(w), float(d)]}


def _density(cfg: RunConfig, out: Path):
    from .design import DENSITY_COLUMNS, density_pump_sweep
    t = _task(cfg, "density")
    tab = density_pump_sweep(cfg.system, t["n_photons"], t["sigma13"], t["sigma12"])
    table = Table.from_dicts("density", tab.rows, DENSITY_COLUMNS)
    eta = tab.column("eta_total")
    lines = [f"{len(tab.rows)} (n_pump, sigma13) points, {sum(1 for r in tab.rows if r['error'])} failed"]
    if np.any(np.isfinite(eta)):
        k = int(np.nanargmax(eta))
        r = tab.rows[k]
        lines.append(f"best eta = {r['eta_total']:.4f} at n_pump = {r['n_pump']:g}, sigma13 = {_hz(r['sigma13_hz'])}, "
                     f"n_a = {r['n_a']:.4g}")
    for s13 in t["sigma13"]:
        sub = [r for r in tab.rows if r["sigma13_hz"] == s13 and math.isfinite(r["eta_total"])]
        if sub:
            best = max(sub, key=lambda r: r["eta_total"])
            lines.append(f"  sigma13 = {_hz(s13)}: peak eta = {best['eta_total']:.4f} at n_pump = {best['n_pump']:g}")
    return [table], lines, EXIT_OK, {}


def cmd_contours(cfg: RunConfig, args, images: ImageEmitter, out: Path):
    from .contours import FAMILIES, ContourWindow, trace_contours
    t = _task(cfg, "contours")
    win = ContourWindow(t["delta_min"], t["delta_max"], t["omega_min"], t["omega_max"], t["n_delta"],
                        t["n_omega"], t["scale_delta"], t["scale_omega"])
    cs = trace_contours(cfg.system, win, t["tolerance"], cfg.n_pump, t["merge_radius"])
    vrows = []
    for fam in FAMILIES:
        for b, line in enumerate(cs.branches(fam)):
            for d, w in line:
                vrows.append({"family": fam, "branch": b, "delta_hz": float(d), "omega_hz": float(w)})
    irows = [{"kind": p.kind, "delta_hz": p.delta, "omega_hz": p.omega, "polished": p.polished,
              "residual": p.residual} for p in cs.intersections]
    tables = [Table.from_dicts("contour_vertices", vrows, ("family", "branch", "delta_hz", "omega_hz")),
              Table.from_dicts("intersections", irows, ("kind", "delta_hz", "omega_hz", "polished", "residual"))]
    lines = [f"branches: optical {len(cs.optical_branches)}, microwave {len(cs.microwave_branches)}, "
             f"matching {len(cs.matching_branches)}",
             f"intersections: {len(cs.intersections)}"]
    for p in cs.intersections:
        lines.append(f"  {p.kind:6s} delta = {_hz(p.delta)}, omega = {_hz(p.omega)}, residual = {p.residual:.2e}")
    images.contours(out / "contours.png", cs)
    return tables, lines, EXIT_OK, {"n_intersections": len(cs.intersections)}


def cmd_optimize(cfg: RunConfig, args, images: ImageEmitter, out: Path):
    from dataclasses import asdict

    from .optimize import optimize_operating_point
    t = _task(cfg, "optimize")
    res = optimize_operating_point(cfg.system, (t["omega_min"], t["omega_max"]), (t["delta_min"], t["delta_max"]),
                                   t["n_coarse"], cfg.n_pump)
    table = Table.from_dicts("optimum", [asdict(res)])
    lines = [f"eta* = {res.eta:.9f} at omega = {_hz(res.omega)}, delta = {_hz(res.delta)}",
             f"coarse best {res.coarse_eta:.9f}; refined: {res.refined}; degenerate: {res.degenerate}"]
    return [table], lines, EXIT_OK, {}


def cmd_budget(cfg: RunConfig, args, images: ImageEmitter, out: Path):
    t = cfg.tasks.get("budget", {"omega": 0.0, "delta": 0.0})
    point = OperatingPoint(t["omega"], t["delta"], cfg.n_pump)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RangeWarning)
        rep = cfg.system.evaluate(point)
    b = rep.budget.as_dict()
    btable = Table("budget", ["line", "value"], [[k, float(v)] for k, v in b.items()])
    s = rep.summary()
    s.update(n_th=cfg.system.n_th(), omega_hz=point.omega, delta_hz=point.delta, n_pump=point.n_pump,
             xi_a_re=rep.xi.xi_a.real, xi_a_im=rep.xi.xi_a.imag, xi_c_re=rep.xi.xi_c.real,
             xi_c_im=rep.xi.xi_c.imag, xi_ac_re=rep.xi.xi_ac.real, xi_ac_im=rep.xi.xi_ac.imag)
    rtable = Table.from_dicts("response", [s])
    lines = [f"operating point omega = {_hz(point.omega)}, delta = {_hz(point.delta)}, n_pump = {point.n_pump:g}"]
    lines += [f"  {k:22s} {v:.6g}" for k, v in b.items()]
    lines += [f"eta = {rep.eta_total:.6f} (internal {rep.eta_internal:.6f}, a {rep.eta_a:.6f}, c {rep.eta_c:.6f})",
              f"C = {rep.cooperativity:.6f}, N_MO = {rep.n_mo:.3e}, N_OM = {rep.n_om:.3e}"]
    return [btable, rtable], lines, EXIT_OK, {}


def _validation_classes(system, max_classes: int):
    from .ensemble import discretize_arrays
    ens = system.ensemble
    if not system.is_gaussian:
        return ens
    n13, n12 = ens.nodes13, ens.nodes12
    while n13 * n12 > max_classes:
        if n13 >= n12:
            n13 = max(1, n13 // 2)
        else:
            n12 = max(1, n12 // 2)
    return discretize_arrays(ens.with_(nodes13=n13, nodes12=n12))


def cmd_validate(cfg: RunConfig, args, images: ImageEmitter, out: Path):
    from .model import CavityMode, susceptibilities
    from .oracle import oracle_agreement, steady_state_efficiency
    from .response import eta_formula
    t = cfg.tasks.get("validate", {"n_draws": 1000, "seed": 20240601, "max_classes": 1024})
    seed = args.seed if args.seed is not None else t["seed"]
    sys_ = cfg.system
    n_p = cfg.n_pump
    classes = _validation_classes(sys_.with_(ensemble=sys_._scaled_ensemble(n_p)), t["max_classes"])
    ka, kc = sys_.noncenter_losses(n_p)
    cav_a = CavityMode(sys_.cav_a.omega_bare, sys_.cav_a.kappa_ex, ka - sys_.cav_a.kappa_ex)
    cav_c = CavityMode(sys_.cav_c.omega_bare, sys_.cav_c.kappa_ex, kc - sys_.cav_c.kappa_ex)
    rows = []
    for w in (0.0, 0.25 * cav_c.kappa_ex):
        for d in (0.0, 0.25 * cav_a.kappa_ex):
            p = OperatingPoint(w, d, n_p)
            xi = susceptibilities(classes, p)
            closed = float(eta_formula(xi.xi_a, xi.xi_c, xi.xi_ac, cav_a.kappa_ex, cav_a.kappa, cav_c.kappa_ex,
                                       cav_c.kappa, w, d))
            e_mw = steady_state_efficiency(classes, cav_a, cav_c, p, "microwave")
            e_op = steady_state_efficiency(classes, cav_a, cav_c, p, "optical")
            scale = max(abs(closed), 1e-300)
            rows.append({"omega_hz": w, "delta_hz": d, "eta_closed_form": closed, "eta_oracle_microwave": e_mw,
                         "eta_oracle_optical": e_op, "rel_deviation": abs(e_mw - closed) / scale,
                         "rel_reciprocity": abs(e_op - e_mw) / max(abs(e_mw), 1e-300)})
    rep = oracle_agreement(t["n_draws"], seed) if t["n_draws"] > 0 else None
    cfg_dev = max(r["rel_deviation"] for r in rows)
    cfg_rec = max(r["rel_reciprocity"] for r in rows)
    lines = [f"config system ({len(classes)} classes, {2 + 2 * len(classes)} unknowns): "
             f"max relative deviation {cfg_dev:.3e}, reciprocity {cfg_rec:.3e}"]
    worst_dev, worst_rec = cfg_dev, cfg_rec
    if rep is not None:
        lines.append(f"{rep.n_draws} random draws (seed {rep.seed}): max relative deviation "
                     f"{rep.max_rel_closed_form:.3e}, reciprocity {rep.max_rel_reciprocity:.3e}")
        worst_dev = max(worst_dev, rep.max_rel_closed_form)
        worst_rec = max(worst_rec, rep.max_rel_reciprocity)
    ok = worst_dev < VALIDATE_RTOL and worst_rec <= RECIPROCITY_RTOL
    lines.append(f"max relative deviation {worst_dev:.3e} (limit {VALIDATE_RTOL:g}), reciprocity {worst_rec:.3e} "
                 f"(limit {RECIPROCITY_RTOL:g}): {'PASS' if ok else 'FAIL'}")
    info = {"max_rel_deviation": worst_dev, "max_rel_reciprocity": worst_rec, "seed": seed}
    return [Table.from_dicts("validate", rows)], lines, EXIT_OK if ok else EXIT_FAIL, info


def cmd_design(cfg: RunConfig, args, images: ImageEmitter, out: Path):
    from .design import solve_matched_design
    free = args.solve or cfg.tasks.get("design", {}).get("free", "omega_p")
    res = solve_matched_design(cfg.system, free, cfg.n_pump)
    table = Table.from_dicts("design", [{"free": res.free, "value": res.value, "success": res.success,
                                         "exact_cooperativity": res.exact_cooperativity, "message": res.message}])
    if not res.success:
        raise DomainError(f"no matched design: {res.message}", free)
    shown = _hz(res.value) if free != "n_a" else f"{res.value:.6g}"
    lines = [f"{free} = {shown} (n_pump = {cfg.n_pump:g})",
             f"exact cooperativity at the solved design: {res.exact_cooperativity:.6f}"]
    return [table], lines, EXIT_OK, {"value": res.value}


HANDLERS = {"sweep": cmd_sweep, "contours": cmd_contours, "optimize": cmd_optimize, "budget": cmd_budget,
            "validate": cmd_validate, "design": cmd_design}


# ----------------------------------------------------------------------------
# argument parsing and dispatch
# ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help=f"config file, or a bundled name: {', '.join(bundled_configs())}")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config value, e.g. --set optical.kappa_ex='0.25 GHz' (repeatable)")
    common.add_argument("--out", help="output directory (default: output.dir from the config)")
    common.add_argument("--threads", type=int, help="kernel threads (default: TRANSDUCE_SIM_THREADS or all)")
    common.add_argument("--seed", type=int, help="seed for randomised checks (validate)")
    common.add_argument("--images", action=argparse.BooleanOptionalAction, default=None,
                        help="render images (default: output.images from the config)")
    common.add_argument("--quiet", action="store_true", help="do not print the summary")

    parser = argparse.ArgumentParser(prog="transduce-sim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="efficiency map over (omega, delta)").add_argument(
        "--density", action="store_true", help="run the density/pump sweep from [task.density] instead")
    sub.add_parser("contours", parents=[common], help="dispersion and matching contours with intersections")
    sub.add_parser("optimize", parents=[common], help="best operating point in a window")
    sub.add_parser("budget", parents=[common], help="itemised loss budget and response at one point")
    sub.add_parser("validate", parents=[common], help="closed form versus the coupled-mode oracle")
    sub.add_parser("design", parents=[common], help="solve the matching condition").add_argument(
        "--solve", choices=("omega_p", "n_a", "kappa_a_ex", "kappa_c_ex"), help="free variable")
    return parser


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        set_threads(args.threads)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.overrides)
        out = Path(args.out or cfg.output["dir"])
        images = ImageEmitter(cfg.output["images"] if args.images is None else args.images)
        out.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        tables, lines, status, info = HANDLERS[args.command](cfg, args, images, out)
        elapsed = time.perf_counter() - t0
        for tab in tables:
            write_table(tab, out, cfg.metadata, cfg.output["formats"])
        header = [f"transduce-sim {__version__} {args.command}: {cfg.name} (config sha256 "
                  f"{cfg.metadata['config_hash'][:16]})"]
        text = "\n".join(header + lines + [f"elapsed {elapsed:.3f} s"]) + "\n"
        (out / f"{args.command}_summary.txt").write_text(text)
        write_run_info(out, args.command, argv, cfg.metadata, {"elapsed_s": elapsed, "exit_status": status, **info})
        if not args.quiet:
            sys.stdout.write(text)
        return status
    except (ConfigError, ConfigurationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"domain error in {exc.parameter or '?'}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except Exception as exc:  # noqa: BLE001 - last-resort categorisation
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
