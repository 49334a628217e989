"""``cmc-lab`` command line front end.

Every run is described by a :class:`RunConfig` (command, parameters, output
directory, grid overrides).  A JSON config file supplies defaults, command
line flags win over it, and ``CMC_LAB_OUT`` overrides the output directory of
the file.  Exit status: 0 success, 1 I/O error, 2 configuration error,
3 numerical certificate failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .errors import CertificateError, CMCLabError, ConfigError

DEFAULT_OUT = "cmc_lab_out"


def _positive(name, v):
    if not v > 0:
        raise ConfigError(f"{name} must be > 0, got {v!r}")


def _at_least(k):
    def check(name, v):
        if v < k:
            raise ConfigError(f"{name} must be >= {k}, got {v!r}")
    return check


def _one_of(*choices):
    def check(name, v):
        if v not in choices:
            raise ConfigError(f"{name} must be one of {list(choices)}, got {v!r}")
    return check


def _surface(name, v):
    parse_surface(v, key=name)


# command -> key -> (type, default, validator, flag help)
SCHEMA = {
    "catenoid": {
        "n_samples": (int, 2001, _at_least(3), "profile samples"),
    },
    "delaunay-sweep": {
        "emin": (float, 0.8, _positive, "smallest eccentricity"),
        "emax": (float, 1.2, _positive, "largest eccentricity"),
        "n": (int, 21, _at_least(2), "number of eccentricities"),
    },
    "nullity": {
        "surface": (str, "critical-catenoid", _surface, "critical-catenoid or delaunay:<e>"),
        "nmax": (int, 5, _at_least(2), "largest mode"),
        "steps": (int, 2000, _at_least(16), "RK4 steps (checked again at twice this)"),
    },
    "foliation-certificate": {
        "samples": (int, 10001, _at_least(3), "dense samples of S0"),
    },
    "disk": {
        "n": (int, 2, _at_least(2), "disk dimension"),
        "resolution": (float, 0.02, _positive, "radial grid spacing (1/resolution integral)"),
        "kmax": (int, 6, _at_least(1), "largest harmonic degree for the nullity scan"),
    },
    "flux": {
        "surface": (str, "critical-catenoid", _surface, "critical-catenoid or delaunay:<e>"),
        "axis": (str, "all", _one_of("all", "x", "y", "z"), "rotation axis"),
        "ns": (int, 2000, _at_least(3), "profile samples"),
        "ntheta": (int, 256, _at_least(8), "angular samples"),
    },
    "extend": {
        "dim": (int, 1, _one_of(1, 2), "tangential dimension"),
        "input": (str, None, None, "CSV grid function (axis columns, value)"),
        "zmax": (float, 0.5, _positive, "slab height"),
        "nz": (int, 20, _at_least(1), "levels above z = 0"),
    },
    "mesh": {
        "surface": (str, "critical-catenoid", _surface, "critical-catenoid or delaunay:<e>"),
        "ns": (int, 201, _at_least(3), "profile samples"),
        "ntheta": (int, 64, _at_least(8), "angular samples"),
        "out": (str, "mesh.obj", None, "OBJ file name inside the output directory"),
    },
}

GRID_KEYS = {"n_samples", "steps", "samples", "resolution", "ns", "ntheta", "nz"}
TOP_KEYS = {"command", "parameters", "output_dir", "grid"}


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = DEFAULT_OUT
    grid: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Defaults, then parameters, then grid overrides, all validated."""
        if self.command not in SCHEMA:
            raise ConfigError(f"command must be one of {sorted(SCHEMA)}, got {self.command!r}")
        schema = SCHEMA[self.command]
        for source, keys in (("parameters", self.parameters), ("grid", self.grid)):
            if not isinstance(keys, dict):
                raise ConfigError(f"{source} must be a mapping")
            for k in keys:
                if k not in schema or (source == "grid" and k not in GRID_KEYS):
                    raise ConfigError(f"unknown key {source}.{k} for command {self.command}")
        out = {k: spec[1] for k, spec in schema.items()}
        out.update(self.parameters)
        out.update(self.grid)
        for k, v in out.items():
            typ, _, check, _ = schema[k]
            if v is None:
                continue
            out[k] = _coerce(k, v, typ)
            if check is not None:
                check(k, out[k])
        if self.command == "delaunay-sweep" and not out["emin"] < out["emax"]:
            raise ConfigError("emin must be smaller than emax")
        return out


def _coerce(key, v, typ):
    if typ is float and isinstance(v, (int, float)) and not isinstance(v, bool):
        if not math.isfinite(v):
            raise ConfigError(f"{key} must be finite")
        return float(v)
    if typ is int and isinstance(v, int) and not isinstance(v, bool):
        return v
    if typ is str and isinstance(v, str):
        return v
    raise ConfigError(f"{key} must be of type {typ.__name__}, got {v!r}")


def parse_surface(name: str, key: str = "surface"):
    """``critical-catenoid`` or ``delaunay:<e>`` -> ``("critical-catenoid", None)`` or ``("delaunay", e)``."""
    if name == "critical-catenoid":
        return name, None
    if isinstance(name, str) and name.startswith("delaunay:"):
        try:
            e = float(name.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"{key}: cannot read an eccentricity from {name!r}") from None
        if not (math.isfinite(e) and e > 0):
            raise ConfigError(f"{key}: eccentricity must be > 0, got {e!r}")
        return "delaunay", e
    raise ConfigError(f"{key} must be 'critical-catenoid' or 'delaunay:<e>', got {name!r}")


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    extra = set(raw) - TOP_KEYS
    if extra:
        raise ConfigError(f"unknown key {sorted(extra)[0]} in {path}")
    if "command" not in raw:
        raise ConfigError(f"{path}: missing key command")
    return RunConfig(command=raw["command"], parameters=raw.get("parameters", {}) or {},
                     output_dir=raw.get("output_dir", DEFAULT_OUT),
                     grid=raw.get("grid", {}) or {})


# ---------------------------------------------------------------------------
# Serialization helpers: every float at 17 significant digits


def _json(obj, indent=0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return f"{v:.17g}" if math.isfinite(v) else "null"
    return json.dumps(str(obj))


def write_json(path: Path, obj) -> None:
    path.write_text(_json(obj) + "\n")


# ---------------------------------------------------------------------------
# Pipelines; each returns (artifact names, tolerances achieved)


def _build_surface(name):
    from .delaunay import annulus, critical_catenoid

    kind, e = parse_surface(name)
    if kind == "critical-catenoid":
        return critical_catenoid()
    return annulus(e)


def _surface_profile(surface, n_samples):
    from .delaunay import CriticalCatenoid

    if isinstance(surface, CriticalCatenoid):
        return surface.profile(n_samples)
    return surface.profile.resample(-surface.s_star, surface.s_star, n_samples)


def _run_catenoid(p, out):
    from .delaunay import critical_catenoid

    cc = critical_catenoid()
    prof = cc.profile(p["n_samples"])
    prof.to_csv(out / "critical_catenoid_profile.csv")
    write_json(out / "critical_catenoid.json",
               {"c": cc.c, "z_c": cc.z_c, "r_c": cc.r_c, "s_star": cc.s_star, "z1": cc.z1})
    defects = cc.as_annulus(p["n_samples"]).invariant_defects()
    tol = {"coth_residual": abs(cc.z1 - 1.0 / math.tanh(cc.z1)),
           "boundary_radius": abs(cc.r_c - 1.0),
           "support_function": defects["support_function"]}
    return ["critical_catenoid.json", "critical_catenoid_profile.csv"], tol


def _run_sweep(p, out):
    from .delaunay import annulus_family_sweep, write_sweep_csv

    rows = annulus_family_sweep(p["emin"], p["emax"], p["n"])
    write_sweep_csv(rows, out / "delaunay_sweep.csv")
    failed = [r for r in rows if r.error]
    if failed:
        raise CertificateError(f"sweep failed at e={failed[0].e:.17g}: {failed[0].error}")
    return ["delaunay_sweep.csv"], {"failed_rows": 0, "root_xtol": 1e-12}


def _run_nullity(p, out):
    from .jacobi import KERNEL_TOL, nullity

    report = nullity(_build_surface(p["surface"]), p["nmax"], p["steps"], name=p["surface"])
    write_json(out / "nullity.json", report.to_dict())
    kern = [abs(m.mismatch) for m in report.modes if m.kernel_dim]
    other = [abs(m.mismatch) for m in report.modes if not m.kernel_dim]
    tol = {"kernel_threshold": KERNEL_TOL,
           "max_kernel_mismatch": max(kern) if kern else None,
           "min_nonkernel_mismatch": min(other) if other else None}
    return ["nullity.json"], tol


def _run_foliation(p, out):
    from .foliation import MARGIN, ROBIN_TOL, catenoid_foliation_certificate

    cert = catenoid_foliation_certificate(p["samples"])
    write_json(out / "foliation_certificate.json", cert.to_dict())
    tol = {"robin_tolerance": ROBIN_TOL, "max_robin_defect": max(cert.robin_defects),
           "negativity_margin": MARGIN, "max_value": cert.max_value}
    return ["foliation_certificate.json"], tol


def _run_disk(p, out):
    from . import disk

    n = p["n"]
    r, u = disk.solve_radial_foliation(n, int(round(1.0 / p["resolution"])))
    disk.write_radial_csv(r, u, out / "disk_radial.csv")
    null = disk.disk_nullity(n, p["kmax"])
    tol = {"radial_solution_error": float(np.max(np.abs(u - disk.foliation_function(r, n)))),
           "radial_robin_defect": float(abs((r[-1] / n) - disk.foliation_function(1.0, n))),
           "min_radial_shooting_defect": min(abs(m["defect"]) for m in null["modes"]
                                             if m["kernel_dim"] == 0)}
    names = ["disk_radial.csv", "disk_summary.json"]
    summary = {"n": n, "psi_min": float(1.0 / (2 * n)), "nullity": null}
    if n == 2:
        grid = disk.disk_grid(p["resolution"])
        psi = disk.disk_foliation_solution(grid)
        lap, bdry = disk.robin_defect(grid, psi)
        disk.write_polar_csv(grid, psi, out / "disk_foliation.csv")
        names.append("disk_foliation.csv")
        tol["interior_residual"] = float(np.max(np.abs(lap - 1.0)))
        tol["boundary_defect"] = float(np.max(np.abs(bdry)))
        summary["psi_min"] = float(psi.min())
    write_json(out / "disk_summary.json", summary)
    return sorted(names), tol


def _run_flux(p, out):
    from .surface import flux_table, revolve, write_flux_csv

    surf = _build_surface(p["surface"])
    mesh = revolve(_surface_profile(surf, p["ns"]), p["ntheta"])
    axes = ("x", "y", "z") if p["axis"] == "all" else (p["axis"],)
    rows = flux_table(mesh, p["surface"], axes)
    write_flux_csv(rows, out / "flux.csv")
    return ["flux.csv"], {"max_abs_flux": max(max(abs(r[2]), abs(r[3])) for r in rows)}


def _run_extend(p, out):
    from .extension import GridFunction, normal_derivative_check, whitney_extend

    if p["input"]:
        try:
            h = GridFunction.from_csv(p["input"])
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"input: {exc}") from None
        if h.ndim != p["dim"]:
            raise ConfigError(f"dim is {p['dim']} but input has {h.ndim} axes")
    elif p["dim"] == 1:
        h = GridFunction.sample(np.sin, [(-2.0, 2.0)], [81], ("x",))
    else:
        h = GridFunction.sample(lambda x, y: np.sin(x) * np.cos(y), [(-1.0, 1.0)] * 2,
                                [41, 41], ("x1", "x2"))
    F = whitney_extend(h, p["zmax"], p["nz"])
    F.to_csv(out / "extension.csv")
    tol = {"boundary_value": float(np.max(np.abs(F.values[..., 0]))),
           "normal_derivative_defect": normal_derivative_check(F, h)}
    return ["extension.csv"], tol


def _run_mesh(p, out):
    from .surface import export_obj, revolve

    name = Path(p["out"]).name
    if name != p["out"] or not name:
        raise ConfigError("out must be a bare file name")
    surf = _build_surface(p["surface"])
    mesh = revolve(_surface_profile(surf, p["ns"]), p["ntheta"])
    export_obj(mesh, out / name)
    lo, hi = mesh.boundary_loops
    radius = np.linalg.norm(mesh.vertices[np.concatenate([lo, hi])], axis=1)
    tol = {"normal_length": float(np.max(np.abs(np.linalg.norm(mesh.normals, axis=1) - 1))),
           "boundary_radius": float(np.max(np.abs(radius - 1.0)))}
    return [name], tol


PIPELINES = {
    "catenoid": _run_catenoid,
    "delaunay-sweep": _run_sweep,
    "nullity": _run_nullity,
    "foliation-certificate": _run_foliation,
    "disk": _run_disk,
    "flux": _run_flux,
    "extend": _run_extend,
    "mesh": _run_mesh,
}


def derived_constants() -> dict:
    from .delaunay import critical_catenoid
    from .foliation import boundary_arclength, c1_constant

    cc = critical_catenoid()
    return {"z1": cc.z1, "c": cc.c, "c1": c1_constant(cc.z1), "s1": boundary_arclength(cc.z1),
            "s_star": cc.s_star, "r_c": cc.r_c}


def run(config: RunConfig) -> int:
    """Execute ``config``; raises :class:`CMCLabError` or ``OSError`` on failure."""
    params = config.resolved()
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    artifacts, tol = PIPELINES[config.command](params, out)
    manifest = {
        "tool": "cmc-lab",
        "version": __version__,
        "command": config.command,
        "parameters": params,
        "grid": config.grid,
        "kernel_backend": _kernels.backend(),
        "derived_constants": derived_constants(),
        "tolerances": tol,
        "artifacts": artifacts,
    }
    write_json(out / "manifest.json", manifest)
    return 0


# ---------------------------------------------------------------------------
# argparse


def build_parser() -> argparse.ArgumentParser:
    def common_options(default):
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--config", default=default, help="JSON run configuration")
        p.add_argument("--output-dir", default=default, help="directory for artifacts")
        return p

    common = common_options(None)
    # SUPPRESS keeps a subcommand from resetting options given before it
    sub_common = common_options(argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="cmc-lab", parents=[common],
                                     description="Free boundary CMC annuli and disks in the unit ball.")
    parser.add_argument("--version", action="version", version=f"cmc-lab {__version__}")
    sub = parser.add_subparsers(dest="command")
    for cmd, schema in SCHEMA.items():
        sp = sub.add_parser(cmd, parents=[sub_common])
        for key, (typ, default, _, help_) in schema.items():
            sp.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ, default=None,
                            help=f"{help_} (default {default})")
    return parser


def config_from_args(args, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    if args.config:
        cfg = load_config(args.config)
        if args.command and args.command != cfg.command:
            raise ConfigError(f"command {args.command!r} conflicts with config command "
                              f"{cfg.command!r}")
    elif args.command:
        cfg = RunConfig(command=args.command)
    else:
        raise ConfigError("no command given (use a subcommand or --config)")
    if environ.get("CMC_LAB_OUT"):
        cfg.output_dir = environ["CMC_LAB_OUT"]
    if args.output_dir:
        cfg.output_dir = args.output_dir
    if cfg.command in SCHEMA:
        overrides = {k: getattr(args, k) for k in SCHEMA[cfg.command]
                     if getattr(args, k, None) is not None}
        cfg.parameters = {**cfg.parameters, **overrides}
        for k in overrides:
            cfg.grid.pop(k, None)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(config_from_args(args))
    except ConfigError as exc:
        print(f"cmc-lab: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cmc-lab: I/O error: {exc}", file=sys.stderr)
        return 1
    except (CertificateError, CMCLabError) as exc:
        print(f"cmc-lab: certificate failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
