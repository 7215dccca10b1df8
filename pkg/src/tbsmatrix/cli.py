"""Command-line front end: ``tbsmatrix {sweep,poles,track,validate} --config run.ini``.

Config files are INI. ``[run]`` selects the geometry and energy grid, one
section per geometry holds its parameters, and ``[poles]``, ``[track]`` and
``[validate]`` tune the respective commands. Keys are lower case. Unknown
sections or keys are rejected.

Exit codes: 0 success, 1 usage or config error, 2 numerical failure,
3 validation failure.
"""
from __future__ import annotations

import argparse
import configparser
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import __version__
from .analytic import (
    TwoSiteDotParams,
    chain_rt,
    dot2_transmission,
    point_contact_pole_roots,
    slab_poles,
)
from .coupling import (
    LeadSpec,
    OpenSystem,
    chain_system,
    dot2_system,
    point_contact_system,
    rect_system,
    slab_system,
)
from .errors import InvalidArgumentError, TbsError
from .heff import Mode, build_heff, eigensystem
from .oracle import (
    face_lead,
    oracle_pole_scan,
    point_lead,
    rect_billiard,
    side_lead,
    solve_chain_1d,
    solve_lattice,
)
from .scattering import conductance_sweep, smatrix, smatrix_pole_expansion
from .spectra import rect_eigensystem
from .tracker import classify_crossing, matched_distance, coupling_path, energy_path, trace_poles, trapping_report

__all__ = ["main", "load_config", "RunConfig", "ConfigError"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3
GEOMETRIES = ("chain1d", "dot2", "rect2d", "point-contact", "slab3d")
REQUIRED = object()


class ConfigError(InvalidArgumentError):
    pass


def _choice(*options):
    def parse(s):
        if s not in options:
            raise ValueError(f"expected one of {list(options)}")
        return s

    return parse


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in s.replace(",", " ").split())


SCHEMA: dict[str, dict[str, tuple[Callable[[str], Any], Any]]] = {
    "run": {
        "geometry": (_choice(*GEOMETRIES), REQUIRED),
        "mode": (lambda s: Mode.parse(s).value, Mode.ALL.value),
        "emin": (float, None),
        "emax": (float, None),
        "count": (int, 401),
    },
    "chain1d": {"n": (int, REQUIRED), "v_l": (float, 1.0), "v_r": (float, 1.0)},
    "dot2": {"case": (_choice("A", "B", "C"), "A"), "v_l": (float, 1.0), "v_r": (float, 1.0)},
    "rect2d": {
        "nx": (int, REQUIRED),
        "ny": (int, REQUIRED),
        "left_lo": (int, 0),
        "left_hi": (int, None),
        "right_lo": (int, 0),
        "right_hi": (int, None),
        "v_l": (float, 1.0),
        "v_r": (float, 1.0),
    },
    "point-contact": {
        "nx": (int, REQUIRED),
        "ny": (int, REQUIRED),
        "left_i": (int, 1),
        "left_j": (int, 1),
        "right_i": (int, None),
        "right_j": (int, None),
        "v_l": (float, 1.0),
        "v_r": (float, 1.0),
    },
    "slab3d": {
        "case": (_choice("a", "b"), "b"),
        "nz": (int, 2),
        "v": (float, 1.0),
        "nx": (int, None),
        "ny": (int, None),
        "e_b": (_floats, None),
    },
    "poles": {"energy": (float, 0.0)},
    "track": {
        "parameter": (_choice("coupling", "energy"), "coupling"),
        "start": (float, 0.0),
        "stop": (float, 4.0),
        "count": (int, 401),
        "v_r": (float, None),
        "energy": (float, 1.0),
        "reference": (float, 1.0),
    },
    "validate": {"tolerance_scale": (float, 1.0), "count": (int, 41)},
}


@dataclass(frozen=True)
class RunConfig:
    """Parsed config: every section of SCHEMA with defaults filled in."""

    values: dict[str, dict[str, Any]]

    def __getitem__(self, section: str) -> dict[str, Any]:
        return self.values[section]

    @property
    def geometry(self) -> str:
        return self.values["run"]["geometry"]

    @property
    def mode(self) -> Mode:
        return Mode(self.values["run"]["mode"])

    def sections(self, command: str) -> tuple[str, ...]:
        extra = {"poles": ("poles",), "track": ("track",), "validate": ("validate",)}
        return ("run", self.geometry) + extra.get(command, ())

    def echo(self, command: str) -> list[str]:
        """Sections relevant to ``command``, as 'section.key = value' lines."""
        out = []
        for section in self.sections(command):
            for key in sorted(self.values[section]):
                out.append(f"{section}.{key} = {_echo_value(self.values[section][key])}")
        return out

    def as_dict(self, command: str) -> dict[str, dict[str, Any]]:
        return {s: dict(self.values[s]) for s in self.sections(command)}


def _echo_value(v: Any) -> str:
    if v is None:
        return "default"
    if isinstance(v, float):
        return _fmt(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def load_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in [{section}]")
    values: dict[str, dict[str, Any]] = {}
    for section, fields in SCHEMA.items():
        values[section] = {}
        for key, (conv, default) in fields.items():
            if parser.has_option(section, key):
                raw = parser[section][key].strip()
                try:
                    values[section][key] = conv(raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {section}.{key} = {raw!r}: {exc}") from None
            elif default is REQUIRED:
                if section == "run" or section == values.get("run", {}).get("geometry"):
                    raise ConfigError(f"missing required key {section}.{key}")
                values[section][key] = None
            else:
                values[section][key] = default
    run = values["run"]
    if run["count"] < 2:
        raise ConfigError(f"run.count must be >= 2 for a sweep, got {run['count']}")
    if values["track"]["count"] < 2:
        raise ConfigError("track.count must be >= 2")
    if run["emin"] is not None and run["emax"] is not None and not run["emin"] < run["emax"]:
        raise ConfigError("run.emin must be smaller than run.emax")
    for key in ("v_l", "v_r", "v"):
        g = values[run["geometry"]]
        if key in g and g[key] is not None and g[key] < 0:
            raise ConfigError(f"{run['geometry']}.{key} must be >= 0")
    return RunConfig(values)


# ----------------------------------------------------------------------------
# geometry construction


def build_system(cfg: RunConfig, v_L: float | None = None, v_R: float | None = None) -> OpenSystem:
    """OpenSystem for the configured geometry; v_L / v_R override the config couplings."""
    g = cfg[cfg.geometry]
    vl = g.get("v_l", g.get("v")) if v_L is None else v_L
    vr = g.get("v_r", g.get("v")) if v_R is None else v_R
    geo = cfg.geometry
    if geo == "chain1d":
        return chain_system(g["n"], vl, vr)
    if geo == "dot2":
        return dot2_system(g["case"], vl, vr)
    if geo == "rect2d":
        return rect_system(g["nx"], g["ny"], _rect_leads(g, vl, vr))
    if geo == "point-contact":
        jl, jr = _contacts(g)
        return point_contact_system(g["nx"], g["ny"], jl, jr, vl, vr)
    if geo == "slab3d":
        if g["e_b"] is not None:
            return slab_system(g["case"], g["nz"], vl, E_b=np.array(g["e_b"]))
        if g["nx"] is None or g["ny"] is None:
            raise ConfigError("slab3d needs either e_b or both nx and ny")
        return slab_system(g["case"], g["nz"], vl, Nx=g["nx"], Ny=g["ny"])
    raise ConfigError(f"unknown geometry {geo!r}")


def _rect_leads(g, vl, vr):
    ny = g["ny"]
    lhi = ny + 1 if g["left_hi"] is None else g["left_hi"]
    rhi = ny + 1 if g["right_hi"] is None else g["right_hi"]
    return [LeadSpec("left", g["left_lo"], lhi, vl), LeadSpec("right", g["right_lo"], rhi, vr)]


def _contacts(g):
    jl = (g["left_i"], g["left_j"])
    jr = (
        g["nx"] if g["right_i"] is None else g["right_i"],
        g["ny"] if g["right_j"] is None else g["right_j"],
    )
    return jl, jr


def _energy_grid(cfg: RunConfig, system: OpenSystem, count: int | None = None) -> np.ndarray:
    run = cfg["run"]
    th = system.coupling.thresholds
    lo = float(th.min()) - 2.0 if run["emin"] is None else run["emin"]
    hi = float(th.max()) + 2.0 if run["emax"] is None else run["emax"]
    return np.linspace(lo, hi, run["count"] if count is None else count)


# ----------------------------------------------------------------------------
# tables


def _fmt(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.16e}"
    return str(x)


def _json_value(x: Any) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "null" if not math.isfinite(float(x)) else f"{float(x):.16e}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in x) + "]"
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in x.items()) + "}"
    return json.dumps(str(x))


@dataclass
class Table:
    command: str
    columns: list[str]
    rows: list[list[Any]]
    notes: list[str]

    def render(self, cfg: RunConfig, fmt: str) -> str:
        if fmt == "json":
            doc = {
                "tool": "tbsmatrix",
                "version": __version__,
                "command": self.command,
                "config": cfg.as_dict(self.command),
                "notes": self.notes,
                "columns": self.columns,
                "rows": [dict(zip(self.columns, r)) for r in self.rows],
            }
            return _json_value(doc) + "\n"
        buf = io.StringIO()
        buf.write(f"# tbsmatrix {__version__} {self.command}\n")
        for line in cfg.echo(self.command):
            buf.write(f"# {line}\n")
        for note in self.notes:
            buf.write(f"# {note}\n")
        buf.write(",".join(self.columns) + "\n")
        for r in self.rows:
            buf.write(",".join("" if v is None else _fmt(v) for v in r) + "\n")
        return buf.getvalue()


def _write_atomic(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tbsmatrix-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------------------
# commands


def cmd_sweep(cfg: RunConfig) -> Table:
    """E, k, conductance, per-channel T and arg t of the first lead, open count, flag, closed levels."""
    system = build_system(cfg)
    grid = _energy_grid(cfg, system)
    rows_out = conductance_sweep(grid, system, cfg.mode)
    lead0 = system.coupling.lead_ids[0]
    n_in = sum(1 for c in system.channels if c.lead_id == lead0)
    levels = np.sort(system.energies)
    columns = (
        ["E", "k", "conductance"]
        + [f"T_{p}" for p in range(1, n_in + 1)]
        + [f"arg_t_{p}" for p in range(1, n_in + 1)]
        + ["n_open", "flag", "closed_level"]
    )
    rows = []
    for i, r in enumerate(rows_out):
        level = float(levels[i]) if i < len(levels) else None
        rows.append([r.E, r.k, r.conductance, *r.T, *r.arg_t, r.n_open, r.flag, level])
    return Table("sweep", columns, rows, [])


def cmd_poles(cfg: RunConfig) -> Table:
    """One row per pole; a defective cluster (double pole) is one row with its multiplicity."""
    system = build_system(cfg)
    E = cfg["poles"]["energy"]
    poles = eigensystem(build_heff(system, E, cfg.mode))
    columns = ["index", "E", "re_z", "im_z", "width", "multiplicity", "defective", "self_orthogonality"]
    rows = []
    for group in poles.clusters:
        if poles.defective[list(group)].any():
            members = [list(group)]
        else:
            members = [[i] for i in group]
        for m in members:
            z = complex(np.mean(poles.poles[m]))
            orth = float(np.max(poles.self_orthogonality[m]))
            rows.append([0, E, z.real, z.imag, -2.0 * z.imag, len(m), bool(poles.defective[m].any()), orth])
    rows.sort(key=lambda r: (r[2], r[3]))
    for i, r in enumerate(rows):
        r[0] = i + 1
    return Table("poles", columns, rows, [])


def cmd_track(cfg: RunConfig) -> Table:
    t = cfg["track"]
    values = np.linspace(t["start"], t["stop"], t["count"])
    notes = []
    if t["parameter"] == "coupling":
        fixed = t["v_r"]
        path = [(v, v if fixed is None else fixed) for v in values]
        traj = trace_poles(
            coupling_path(lambda a, b: build_system(cfg, a, b), t["energy"], cfg.mode), path
        )
        ref = int(np.argmin(np.abs(values - t["reference"])))
        rep = trapping_report(traj, ref)
        notes.append(
            f"trapping: reference v_l = {_fmt(float(values[ref]))}, broad = {rep.n_broad}, "
            f"trapped = {rep.n_trapped}, band exits = {int(rep.band_exit.sum())}"
        )
        pcols = ["v_l", "v_r"]
    else:
        traj = trace_poles(energy_path(build_system(cfg), cfg.mode), values)
        if traj.n_branches >= 2:
            notes.append(f"branches 1,2 across the path: {classify_crossing(traj)}")
        pcols = ["E"]
    notes.append(f"trace defect: {_fmt(traj.trace_defect)}")
    flagged = {s for s, _ in traj.flags}
    columns = ["step", *pcols, "branch", "re_z", "im_z", "width", "flagged"]
    rows = []
    for s, p in enumerate(traj.params):
        for b, z in enumerate(traj.branches[s]):
            rows.append([s, *p, b + 1, z.real, z.imag, -2.0 * z.imag, s in flagged])
    return Table("track", columns, rows, notes)


# --- validation


@dataclass
class Check:
    name: str
    tolerance: float
    deviation: float
    status: str  # PASS FAIL SKIP INFO


def _oracle_setup(cfg: RunConfig):
    """(billiard, leads) for the configured geometry, or None when out of oracle scope."""
    g = cfg[cfg.geometry]
    geo = cfg.geometry
    if geo == "chain1d":
        n = g["n"]
        b = rect_billiard(n)
        return b, [point_lead("L", 0, g["v_l"], 0), point_lead("R", n - 1, g["v_r"], n + 1)]
    if geo == "dot2":
        b = rect_billiard(2)
        if g["case"] == "C":
            return b, [point_lead("L", 0, g["v_l"]), point_lead("R", 0, g["v_r"])]
        return b, [point_lead("L", 0, g["v_l"], 0), point_lead("R", 1, g["v_r"], 3)]
    if geo == "rect2d":
        b = rect_billiard(g["nx"], g["ny"])
        leads = _rect_leads(g, g["v_l"], g["v_r"])
        return b, [side_lead(b, l.side, l.wall_lo, l.wall_hi, l.v) for l in leads]
    if geo == "point-contact":
        b = rect_billiard(g["nx"], g["ny"])
        jl, jr = _contacts(g)
        return b, [point_lead("L", b.index(*jl), g["v_l"]), point_lead("R", b.index(*jr), g["v_r"])]
    if geo == "slab3d" and g["e_b"] is None:
        b = rect_billiard(g["nx"], g["ny"], g["nz"])
        if g["case"] == "b":
            return b, [face_lead(b, g["nz"], g["v"])]
        sites = [(i, j) for i in range(1, g["nx"] + 1) for j in range(1, g["ny"] + 1)]
        # lead ids sort like the channel index p = 1..Nx*Ny
        width = len(str(len(sites)))
        return b, [
            point_lead(f"A{p + 1:0{width}d}", b.index(i, j, 1), g["v"]) for p, (i, j) in enumerate(sites)
        ]
    return None


def _usable(E: float, system: OpenSystem) -> bool:
    w = np.abs(E - system.coupling.thresholds)
    return bool((w < 2.0).any()) and bool(np.all(np.abs(w - 2.0) > 1e-6))


def cmd_validate(cfg: RunConfig) -> tuple[Table, bool]:
    scale = cfg["validate"]["tolerance_scale"]
    system = build_system(cfg)
    grid = [E for E in _energy_grid(cfg, system, cfg["validate"]["count"]) if _usable(E, system)]
    mode = cfg.mode
    exact = mode is Mode.ALL
    checks: list[Check] = []

    def add(name, tol, dev, informational=False):
        tol *= scale
        if informational:
            status = "INFO"
        else:
            status = "PASS" if dev <= tol else "FAIL"
        checks.append(Check(name, tol, float(dev), status))

    if not grid:
        checks.append(Check("energy grid", 0.0, float("nan"), "SKIP"))
    results = {E: smatrix(E, system, mode) for E in grid}
    if grid:
        add("pipeline reciprocity |S - S^T|", 1e-10, max(r.reciprocity_defect for r in results.values()))
        add(
            "pipeline unitarity |S S^+ - 1|",
            1e-10,
            max(r.unitarity_defect for r in results.values()),
            informational=not exact,
        )
        dev = 0.0
        for E, r in results.items():
            try:
                dev = max(dev, float(np.abs(smatrix_pole_expansion(E, system, mode=mode).S - r.S).max()))
            except TbsError:
                continue
        add("pole expansion vs resolvent", 1e-8, dev)

    setup = _oracle_setup(cfg)
    if setup is None:
        checks.append(Check("oracle mode matching", 0.0, float("nan"), "SKIP"))
    elif grid:
        billiard, leads = setup
        dev = 0.0
        uni = 0.0
        for E, r in results.items():
            o = solve_lattice(billiard, leads, E)
            dev = max(dev, float(np.abs(o.S - r.S).max()))
            uni = max(uni, o.unitarity_defect)
        add("pipeline vs oracle S", 1e-8, dev, informational=not exact)
        add("oracle unitarity", 1e-10, uni)
        E_mid = grid[len(grid) // 2]
        _pole_scan_check(cfg, system, billiard, leads, E_mid, mode, add)

    _analytic_checks(cfg, system, grid, results, add)
    failed = any(c.status == "FAIL" for c in checks)
    rows = [[c.name, c.tolerance, c.deviation, c.status] for c in checks]
    notes = [f"result: {'FAIL' if failed else 'PASS'}"]
    return Table("validate", ["check", "tolerance", "deviation", "status"], rows, notes), failed


def _pole_scan_check(cfg, system, billiard, leads, E, mode, add):
    if mode is not Mode.ALL or billiard.n_sites > 30:
        return
    poles = eigensystem(build_heff(system, E, mode)).poles
    pad = 0.5
    window = (poles.real.min() - pad, poles.real.max() + pad, poles.imag.min() - pad, max(poles.imag.max(), 0) + 0.01)
    found = oracle_pole_scan(billiard, leads, window, 60, energy=E, seeds=poles)
    scan = np.array([p.z for p in found])
    distinct = []
    for z in poles:
        if not any(abs(z - d) < 1e-6 for d in distinct):
            distinct.append(z)
    if len(scan) == 0:
        add("eigensystem vs oracle pole scan", 1e-8, float("inf"))
        return
    dev = max(float(np.abs(scan - z).min()) for z in distinct)
    add("eigensystem vs oracle pole scan", 1e-8, dev)


def _analytic_checks(cfg, system, grid, results, add):
    g = cfg[cfg.geometry]
    geo = cfg.geometry
    if geo == "chain1d" and grid:
        dev = 0.0
        for E, r in results.items():
            if abs(E) >= 2.0:
                continue
            a = chain_rt(g["n"], g["v_l"], g["v_r"], float(np.arccos(-0.5 * E)))
            dev = max(dev, abs(a.t - r.t[0, 0]), abs(a.r - r.r[0, 0]))
        add("closed-form t, r vs pipeline", 1e-10, dev, informational=cfg.mode is not Mode.ALL)
        dev = 0.0
        for E in grid:
            k = float(np.arccos(-0.5 * E))
            o = solve_chain_1d(g["n"], g["v_l"], g["v_r"], k)
            a = chain_rt(g["n"], g["v_l"], g["v_r"], k)
            dev = max(dev, abs(o.t - a.t), abs(o.r - a.r))
        add("closed-form t, r vs four-unknown oracle", 1e-10, dev)
    elif geo == "dot2" and grid:
        p = TwoSiteDotParams(g["v_l"], g["v_r"], g["case"])
        dev = max(abs(dot2_transmission(p, E) - r.t_standing[0, 0]) for E, r in results.items())
        add("two-site closed form t vs pipeline", 1e-10, dev, informational=cfg.mode is not Mode.ALL)
    elif geo == "point-contact" and grid:
        jl, jr = _contacts(g)
        if jl == jr:
            rect = rect_eigensystem(g["nx"], g["ny"])
            psi0 = rect.eigvecs()[rect.site_index(*jl)]
            E = grid[len(grid) // 2]
            roots = point_contact_pole_roots(rect.energies, psi0, g["v_l"], g["v_r"], E=E).poles
            ev = eigensystem(build_heff(system, E, cfg.mode)).poles
            dev = matched_distance(roots, ev)
            add("secular roots vs eigensystem", 1e-8, dev)
    elif geo == "slab3d" and g["case"] == "b" and g["nz"] == 2:
        E_b = np.array(g["e_b"]) if g["e_b"] is not None else rect_eigensystem(g["nx"], g["ny"]).energies
        E = float(np.mean(E_b))
        ev = eigensystem(build_heff(system, E, Mode.ALL)).poles
        ana = np.array([z for eb in E_b for z in slab_poles(float(eb), g["v"], E)])
        dev = matched_distance(ana, ev)
        add("slab closed-form poles vs eigensystem", 1e-10, dev)


# ----------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tbsmatrix", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"tbsmatrix {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("sweep", "conductance and transmission over the energy grid"),
        ("poles", "poles of the effective Hamiltonian at one energy"),
        ("track", "pole trajectories along a coupling or energy path"),
        ("validate", "pipeline vs oracle vs closed-form checks"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="INI config file")
        s.add_argument("--out", default=None, help="output file (default: stdout)")
        s.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = load_config(fh.read())
    except OSError as exc:
        print(f"tbsmatrix: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"tbsmatrix: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    failed = False
    try:
        if args.command == "sweep":
            table = cmd_sweep(cfg)
        elif args.command == "poles":
            table = cmd_poles(cfg)
        elif args.command == "track":
            table = cmd_track(cfg)
        else:
            table, failed = cmd_validate(cfg)
    except InvalidArgumentError as exc:
        print(f"tbsmatrix: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TbsError, np.linalg.LinAlgError) as exc:
        print(f"tbsmatrix: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_atomic(table.render(cfg, args.format), args.out)
    if failed:
        print("tbsmatrix: validation failed", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
