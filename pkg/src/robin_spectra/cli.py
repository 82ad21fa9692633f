"""Command line runner: ``robin-spectra <experiment> [--config file.json] [--out path] [flags]``.

Every experiment reads a JSON config (flags override its keys), rejects
unknown fields, and writes a JSON summary plus CSV tables. The summary embeds
a hash of the effective config and the thresholds it checked against; no
timestamps are written, so identical configs give identical files.

Exit codes: 0 all checks pass, 1 numerical failure or failed check, 2 invalid
input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import beta_calculus as bc
from . import mesh as meshmod
from . import potential_calculus as pc
from . import shape_calculus as sc
from .model import DomainRef, Potential, ProblemSpec, SpecError, check_spec
from .radial import RadialGrid, bessel_robin_root, radial_lambda1
from .solver import ConvergenceError, SolverOptions, solve_dirichlet_first, solve_first_eigenpair

log = logging.getLogger("robin_spectra")

EXPERIMENTS = ("mesh", "solve", "dbeta", "sweep-beta", "scaling", "shape-deriv", "hadamard", "potential-check",
               "radial", "convergence-study")

COMMON = {"experiment", "spec", "mesh", "out", "solver"}

# knobs per experiment with their defaults (tolerances are the acceptance thresholds)
KNOBS = {
    "mesh": {},
    "solve": {"dirichlet": False},
    "dbeta": {"h_beta": None, "richardson": False, "beta1": None, "tolerance": None},
    "sweep-beta": {"betas": [0.5, 1, 2, 4, 8, 16, 32], "fd": True, "dirichlet": True, "tolerance": 1e-2},
    "scaling": {"ts": [0.5, 2, 3], "tolerance": 1e-8, "monotonicity_t": 2.0},
    "shape-deriv": {"field": "dilate", "field_file": None, "t0": 1e-3, "richardson": False,
                    "gradient": "triangle", "tolerance": 3e-2},
    "hadamard": {"field": "dilate", "field_file": None, "ts": [1e-3, 5e-4, 2.5e-4], "tolerance": 5e-3,
                 "ratio_range": [3.0, 5.0]},
    "potential-check": {"mode": "shift", "V1": None, "V2": None, "c": 5.0, "pairs": 20, "samples": 200,
                        "seed": 0, "tolerance": 1e-8},
    "radial": {"p": 2.0, "beta": 1.0, "R": 1.0, "n": 2, "V": "const:0", "size": 10_000, "tolerance": 1e-6},
    "convergence-study": {"hs": [0.1, 0.05, 0.025], "reference": "radial", "tolerance": 5e-3},
}

MESH_KEYS = {"path", "shape", "h", "R", "a", "b", "width", "height"}


class ConfigError(ValueError):
    pass


# --- config handling ------------------------------------------------------------

def load_config(experiment: str, path: str | None, overrides: dict) -> dict:
    cfg = {}
    if path:
        try:
            cfg = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    if cfg.get("experiment", experiment) != experiment:
        raise ConfigError(f"config is for {cfg['experiment']!r}, not {experiment!r}")
    cfg = dict(cfg, experiment=experiment)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(cfg) - COMMON - set(KNOBS[experiment])
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    for key, default in KNOBS[experiment].items():
        cfg.setdefault(key, default)
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps({k: v for k, v in cfg.items() if k != "out"}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def build_mesh(cfg: dict):
    m = cfg.get("mesh")
    if m is None:
        raise ConfigError("missing mesh")
    if isinstance(m, str):
        m = {"path": m}
    unknown = set(m) - MESH_KEYS
    if unknown:
        raise ConfigError(f"unknown mesh field(s): {sorted(unknown)}")
    if "path" in m:
        try:
            return meshmod.read_mesh(m["path"])
        except OSError as exc:
            raise ConfigError(f"cannot read mesh: {exc}") from None
    if "shape" not in m or "h" not in m:
        raise ConfigError("mesh needs either a path or shape and h")
    args = {k: m[k] for k in ("R", "a", "b", "width", "height") if k in m}
    return meshmod.generate_mesh(m["shape"], float(m["h"]), **args)


def build_spec(cfg: dict, mesh) -> ProblemSpec:
    raw = cfg.get("spec")
    if raw is None:
        raise ConfigError("missing spec")
    spec = ProblemSpec.from_dict(raw)
    if spec.domain is None and mesh is not None:
        spec = spec.on(mesh)
    check_spec(spec, mesh)
    return spec


def build_options(cfg: dict) -> SolverOptions:
    raw = cfg.get("solver") or {}
    try:
        if "epsilon_schedule" in raw and raw["epsilon_schedule"] is not None:
            raw = dict(raw, epsilon_schedule=tuple(raw["epsilon_schedule"]))
        return SolverOptions(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad solver options: {exc}") from None


def build_field(cfg: dict, mesh) -> meshmod.VectorField:
    name = cfg["field"]
    if name in ("dilate", "dilation"):
        return meshmod.dilation()
    if name in ("translate", "translation"):
        return meshmod.translation()
    if name in ("stretch-x", "stretch_x"):
        return meshmod.stretch_x()
    if name in ("rotate", "rotation"):
        return meshmod.rotation()
    if name == "file":
        if not cfg.get("field_file"):
            raise ConfigError("field 'file' needs field_file")
        vals = np.loadtxt(cfg["field_file"], ndmin=2)
        if vals.shape != mesh.vertices.shape:
            raise ConfigError("field file must have one (vx, vy) row per mesh vertex")
        return meshmod.from_samples(vals)
    raise ConfigError(f"unknown vector field {name!r}; use dilate, translate, stretch-x, rotate or file")


def parse_potential(text) -> Potential:
    """``const:<c>``, ``poly:<c0,c1,...>`` (radial) or a potential JSON object."""
    if isinstance(text, dict):
        return Potential.from_dict(text)
    kind, _, rest = str(text).partition(":")
    try:
        if kind == "const":
            return Potential.constant(float(rest))
        if kind == "poly":
            return Potential.radial_poly([float(c) for c in rest.split(",") if c.strip()])
    except ValueError:
        pass
    raise ConfigError(f"cannot parse potential {text!r}")


# --- output -------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else _fmt(row.get(k))) for k in columns})
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


class Report:
    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.summary = {"experiment": cfg["experiment"], "config_hash": config_hash(cfg),
                        "config": {k: v for k, v in cfg.items() if k != "out"}, "checks": {}}
        self.tables: dict[str, tuple[list, list]] = {}

    def check(self, name: str, passed: bool, **details):
        self.summary["checks"][name] = {"pass": bool(passed), **details}

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.summary["checks"].values())

    def table(self, name: str, rows: list[dict], columns: list[str]):
        self.tables[name] = (rows, columns)

    def write(self, out: str | None, stream=None):
        stream = stream or sys.stdout
        self.summary["pass"] = self.passed
        text = json.dumps(_clean(self.summary), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        if out is None:
            stream.write(text)
            for name, (rows, cols) in self.tables.items():
                stream.write(f"# {name}\n" + csv_text(rows, cols))
            return
        path = Path(out)
        if path.suffix == ".json":
            path.parent.mkdir(parents=True, exist_ok=True)
            json_path, stem = path, path.with_suffix("")
        else:
            path.mkdir(parents=True, exist_ok=True)
            json_path, stem = path / f"{self.cfg['experiment']}.json", path / self.cfg["experiment"]
        json_path.write_text(text, encoding="utf-8")
        for name, (rows, cols) in self.tables.items():
            suffix = "" if len(self.tables) == 1 else f"_{name}"
            Path(f"{stem}{suffix}.csv").write_text(csv_text(rows, cols), encoding="utf-8", newline="")


# --- experiments ------------------------------------------------------------------

def run_mesh(cfg, rep: Report):
    m = build_mesh(cfg)
    m.validate()
    rep.summary["mesh"] = {"n_vertices": m.n_vertices, "n_triangles": len(m.triangles), "area": m.area,
                           "perimeter": m.perimeter, "h_max": m.h_max, "min_angle_deg": math.degrees(m.min_angle)}
    if cfg.get("out"):
        out = Path(cfg["out"])
        target = out if out.suffix == ".txt" else out / "mesh.txt"
        target.parent.mkdir(parents=True, exist_ok=True)
        meshmod.write_mesh(m, target)
        rep.summary["mesh"]["path"] = str(target)
        if out.suffix == ".txt":
            cfg["out"] = str(out.with_suffix(".json"))
    rep.check("valid", True)


def run_solve(cfg, rep: Report):
    m = build_mesh(cfg)
    spec = build_spec(cfg, m)
    solver = solve_dirichlet_first if cfg["dirichlet"] else solve_first_eigenpair
    r = solver(spec, m, build_options(cfg))
    rep.summary.update(r.to_dict())
    rep.summary["message"] = r.message
    rep.check("converged", r.converged, residual=r.residual)
    rep.table("trace", [{"stage": k, "eps": s["eps"], "objective": s["objective"], "residual": s["residual"],
                         "iterations": s["iterations"]} for k, s in enumerate(r.stages)],
              ["stage", "eps", "objective", "residual", "iterations"])


def run_dbeta(cfg, rep: Report):
    m = build_mesh(cfg)
    spec = build_spec(cfg, m)
    opts = build_options(cfg)
    tol = cfg["tolerance"] if cfg["tolerance"] is not None else (2.5e-3 if cfg["richardson"] else 1e-2)
    d = bc.dlambda_dbeta_report(spec, m, opts, cfg["h_beta"], cfg["richardson"])
    beta1 = cfg["beta1"] if cfg["beta1"] is not None else 1.1 * spec.beta
    sw = bc.sandwich_check(spec, m, spec.beta, beta1, opts)
    row = {"beta": spec.beta, "lambda": d.extras["lambda"], "dldb_formula": d.formula_value, "dldb_fd": d.fd_value,
           "rel_err": d.rel_err, "sandwich_lower": sw.lower, "sandwich_upper": sw.upper}
    rep.summary["result"] = dict(d.to_dict(), sandwich=sw.to_dict())
    rep.check("fd_vs_formula", d.rel_err <= tol, rel_err=d.rel_err, threshold=tol)
    rep.check("sandwich", sw.passed, lower_margin=sw.lower_margin, upper_margin=sw.upper_margin)
    rep.table("dbeta", [row], ["beta", "lambda", "dldb_formula", "dldb_fd", "rel_err", "sandwich_lower",
                               "sandwich_upper"])


def run_sweep(cfg, rep: Report):
    m = build_mesh(cfg)
    spec = build_spec(cfg, m)
    betas = [float(b) for b in cfg["betas"]]
    if not betas or betas[0] <= 0 or any(b1 <= b0 for b0, b1 in zip(betas, betas[1:])):
        raise ConfigError("betas must be positive and strictly increasing")
    sw = bc.beta_sweep(spec, m, cfg["betas"], build_options(cfg), cfg["dirichlet"], cfg["fd"])
    rep.summary["lambda_dirichlet"] = sw.lambda_dirichlet
    rep.check("converged", sw.all_converged)
    rep.check("increasing", sw.increasing)
    if sw.lambda_dirichlet is not None:
        rep.check("below_dirichlet", bool(sw.below_dirichlet))
        rep.check("gap_decreasing", bool(sw.gap_decreasing))
    pairs = [r for r in sw.rows if "sandwich_quotient" in r]
    rep.check("sandwich", all(r["sandwich_lower"] <= r["sandwich_quotient"] <= r["sandwich_upper"] for r in pairs))
    if cfg["fd"]:
        worst = max(r.get("rel_err", math.inf) for r in sw.rows)
        rep.check("fd_vs_formula", worst <= cfg["tolerance"], worst_rel_err=worst, threshold=cfg["tolerance"])
    rep.table("sweep", sw.rows, ["beta", "lambda", "dldb_formula", "dldb_fd", "rel_err", "sandwich_lower",
                                 "sandwich_upper", "gap", "converged"])


def run_scaling(cfg, rep: Report):
    m = build_mesh(cfg)
    spec = build_spec(cfg, m)
    opts = build_options(cfg)
    rows = [bc.scaling_identity_check(spec, m, float(t), opts).to_dict() for t in cfg["ts"]]
    worst = max(r["rel_diff"] for r in rows)
    rep.check("scaling_identity", worst <= cfg["tolerance"], worst_rel_diff=worst, threshold=cfg["tolerance"])
    mono = bc.scaled_domain_monotonicity_check(spec, m, float(cfg["monotonicity_t"]), opts)
    rep.summary["monotonicity"] = mono.to_dict()
    rep.check("domain_monotonicity", mono.passed)
    rep.table("scaling", rows, ["t", "lambda_base", "lambda_scaled", "rescaled", "rel_diff"])


def run_shape(cfg, rep: Report):
    m = build_mesh(cfg)
    spec = build_spec(cfg, m)
    v = build_field(cfg, m)
    r = sc.shape_derivative_report(spec, m, v, float(cfg["t0"]), build_options(cfg), cfg["richardson"],
                                   cfg["gradient"])
    row = r.to_dict()
    rep.summary["result"] = row
    tol = cfg["tolerance"]
    if v.kind == "translation":
        lam = r.extras["lambda"]
        rep.check("translation", abs(r.formula_value) <= 1e-3 * abs(lam), formula=r.formula_value)
    else:
        rep.check("fd_vs_formula", r.rel_err <= tol, rel_err=r.rel_err, threshold=tol)
    rep.table("shape", [row], list(sc.TERMS) + ["formula", "alt_form", "fd", "rel_err"])


def run_hadamard(cfg, rep: Report):
    m = build_mesh(cfg)
    v = build_field(cfg, m)
    vol = sc.hadamard_volume_expansion_check(m, v, cfg["ts"])
    sur = sc.hadamard_surface_expansion_check(m, v, cfg["ts"])
    tol = cfg["tolerance"]
    lo, hi = cfg["ratio_range"]
    rep.summary["volume"], rep.summary["surface"] = vol, sur
    rep.check("volume_slope", vol["rel_err"] <= tol or vol["abs_err"] <= 1e-12, rel_err=vol["rel_err"],
              threshold=tol)
    rep.check("surface_slope", sur["rel_err"] <= tol or sur["abs_err"] <= 1e-12, rel_err=sur["rel_err"],
              threshold=tol)
    if max(abs(x) for x in vol["remainders"]) > 1e-13 * m.area:
        rep.check("remainder_order", all(lo <= x <= hi for x in vol["ratios"]), ratios=vol["ratios"])
    rows = [{"quantity": "volume", "t": t, "slope": s, "predicted": vol["predicted"], "remainder": rr}
            for t, s, rr in zip(vol["t"], vol["slopes"], vol["remainders"])]
    rows += [{"quantity": "perimeter", "t": t, "slope": s, "predicted": sur["predicted"], "remainder": s * t - sur[
        "predicted"] * t} for t, s in zip(sur["t"], sur["slopes"])]
    rep.table("hadamard", rows, ["quantity", "t", "slope", "predicted", "remainder"])


def run_potential(cfg, rep: Report):
    m = build_mesh(cfg)
    spec = build_spec(cfg, m)
    opts = build_options(cfg)
    mode = cfg["mode"]
    V1 = parse_potential(cfg["V1"]) if cfg["V1"] is not None else None
    V2 = parse_potential(cfg["V2"]) if cfg["V2"] is not None else None
    if mode in ("mono", "cont"):
        if (V1 is None) != (V2 is None):
            raise ConfigError("give both V1 and V2 or neither")
        if V1 is not None:
            pairs = [(V1, V2)]
        elif mode == "mono":
            pairs = pc.ordered_pairs(int(cfg["pairs"]), int(cfg["seed"]))
        else:
            pairs = pc.lipschitz_pairs(int(cfg["pairs"]), int(cfg["seed"]))
        check = pc.monotonicity_check if mode == "mono" else pc.continuity_check
        rows = []
        for k, (a, b) in enumerate(pairs):
            try:
                res = check(a, b, spec, m, opts)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            rows.append(dict(res.to_dict(), pair=k))
        rep.check("monotonicity" if mode == "mono" else "lipschitz", all(r["pass"] for r in rows))
        rep.table(mode, rows, ["pair", "lambda1", "lambda2", "bound", "slack", "pass"])
    elif mode == "shift":
        res = pc.shift_identity_check(V1 or spec.potential, float(cfg["c"]), spec, m, opts, cfg["tolerance"])
        rep.check("shift_identity", res.passed, error=res.error, threshold=res.tolerance)
        rep.table("shift", [res.to_dict()], ["lambda", "lambda_shifted", "c", "error", "tolerance", "pass"])
    elif mode == "coercive":
        res = pc.coercivity_check(spec, m, int(cfg["samples"]), int(cfg["seed"]), opts)
        rep.check("coercivity", res.passed, violations=res.violations, worst_margin=res.worst_margin)
        rep.table("coercive", [res.to_dict()], ["lambda1", "V_sup", "C", "M", "violations", "worst_margin",
                                                "samples"])
    else:
        raise ConfigError(f"unknown mode {mode!r}")


def run_radial(cfg, rep: Report):
    p, beta, R, n = float(cfg["p"]), float(cfg["beta"]), float(cfg["R"]), int(cfg["n"])
    V = parse_potential(cfg["V"])
    spec = ProblemSpec(p, beta, V, DomainRef("ball", R=R, n=n))
    check_spec(spec)
    grid = RadialGrid.graded(R, n, int(cfg["size"]))
    r = radial_lambda1(p, beta, V, grid, build_options(cfg))
    rep.summary.update(r.to_dict(include_u=False))
    rep.check("converged", r.converged, residual=r.residual)
    if p == 2.0 and n == 2 and R == 1.0 and V.is_zero:
        ref = bessel_robin_root(beta)
        rel = abs(r.lambda_ - ref) / ref
        rep.summary["bessel"] = ref
        rep.check("bessel_oracle", rel <= cfg["tolerance"], rel_err=rel, threshold=cfg["tolerance"])
    rep.table("profile", [{"r": x, "u": y} for x, y in zip(grid.nodes, r.u)], ["r", "u"])


def richardson(hs, lams, order: float | None = None) -> dict:
    """Extrapolated limit from the last levels; order observed from three, else assumed 2."""
    hs, lams = [float(h) for h in hs], [float(x) for x in lams]
    if len(hs) < 2:
        return {"limit": lams[-1] if lams else math.nan, "order": order}
    ratio = hs[-2] / hs[-1]
    if order is None and len(hs) >= 3:
        d1, d2 = lams[-3] - lams[-2], lams[-2] - lams[-1]
        order = math.log(abs(d1 / d2)) / math.log(ratio) if d1 != 0 and d2 != 0 and d1 * d2 > 0 else None
    q = 2.0 if order is None else order
    limit = lams[-1] + (lams[-1] - lams[-2]) / (ratio ** q - 1.0)
    return {"limit": limit, "order": order}


def convergence_study(spec: ProblemSpec, shape: dict, hs, opts=None, reference: float | None = None) -> dict:
    """``lambda(h)`` on generated meshes for decreasing ``hs`` plus the Richardson limit."""
    hs = [float(h) for h in hs]
    if not hs or any(b >= a for a, b in zip(hs, hs[1:])):
        raise ConfigError("h list must be non-empty and strictly decreasing")
    rows = []
    for h in hs:
        m = meshmod.generate_mesh(shape.get("shape", "disk"), h, **{k: shape[k] for k in ("R", "a", "b", "width",
                                                                                           "height") if k in shape})
        r = solve_first_eigenpair(spec.on(m), m, opts)
        if not r.converged:
            raise ConvergenceError(f"solve at h={h} did not converge")
        row = {"h": h, "n_vertices": m.n_vertices, "lambda": r.lambda_}
        if reference is not None:
            row["error"] = r.lambda_ - reference
        rows.append(row)
    ext = richardson(hs, [r["lambda"] for r in rows])
    if reference is not None:
        errs = [abs(r["error"]) for r in rows]
        if any(b >= a for a, b in zip(errs, errs[1:])):
            warnings.warn("error sequence is not monotone under refinement")
    return {"rows": rows, **ext}


def run_convergence(cfg, rep: Report):
    shape = dict(cfg.get("mesh") or {"shape": "disk", "R": 1.0})
    shape.pop("h", None)
    if "path" in shape:
        raise ConfigError("convergence-study generates its own meshes")
    unknown = set(shape) - MESH_KEYS
    if unknown:
        raise ConfigError(f"unknown mesh field(s): {sorted(unknown)}")
    spec = ProblemSpec.from_dict(cfg["spec"]) if cfg.get("spec") else None
    if spec is None:
        raise ConfigError("missing spec")
    hs = cfg["hs"]
    if not hs:
        raise ConfigError("h list must be non-empty and strictly decreasing")
    ref = None
    R = float(shape.get("R", 1.0))
    if cfg["reference"] == "bessel":
        if not (spec.p == 2.0 and spec.potential.is_zero and shape.get("shape", "disk") == "disk" and R == 1.0):
            raise ConfigError("the Bessel reference needs p=2, V=0 on the unit disk")
        ref = bessel_robin_root(spec.beta)
    elif cfg["reference"] == "radial":
        if shape.get("shape", "disk") != "disk" or not spec.potential.is_radial:
            raise ConfigError("the radial reference needs a disk and a radial potential")
        ref = radial_lambda1(spec.p, spec.beta, spec.potential, RadialGrid.graded(R, 2, 10_000),
                             build_options(cfg)).lambda_
    elif cfg["reference"] not in (None, "none"):
        raise ConfigError(f"unknown reference {cfg['reference']!r}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        study = convergence_study(spec.on(meshmod.generate_mesh(shape.get("shape", "disk"), float(hs[0]),
                                                                **{k: shape[k] for k in ("R", "a", "b", "width",
                                                                                         "height") if k in shape})),
                                  shape, hs, build_options(cfg), ref)
    rep.summary.update(limit=study["limit"], order=study["order"], reference=ref,
                       warnings=[str(w.message) for w in caught])
    if ref is not None:
        rel = abs(study["limit"] - ref) / abs(ref)
        rep.check("limit_vs_reference", rel <= cfg["tolerance"], rel_err=rel, threshold=cfg["tolerance"])
    rep.table("convergence", study["rows"], ["h", "n_vertices", "lambda", "error"])


RUNNERS = {"mesh": run_mesh, "solve": run_solve, "dbeta": run_dbeta, "sweep-beta": run_sweep,
           "scaling": run_scaling, "shape-deriv": run_shape, "hadamard": run_hadamard,
           "potential-check": run_potential, "radial": run_radial, "convergence-study": run_convergence}


# --- argument parsing --------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _json_file(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robin-spectra", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="experiment", required=True)

    def add(name, *flags):
        sp = sub.add_parser(name)
        sp.add_argument("--config")
        sp.add_argument("--out")
        sp.add_argument("--spec", help="problem spec JSON file")
        sp.add_argument("--mesh", help="mesh text file")
        for args, kw in flags:
            sp.add_argument(*args, **kw)
        return sp

    bool_ = {"action": argparse.BooleanOptionalAction, "default": None}
    add("mesh", (("--shape",), {"choices": ["disk", "ellipse", "rect"]}), (("--h",), {"type": float}),
        (("--R",), {"type": float}), (("--a",), {"type": float}), (("--b",), {"type": float}),
        (("--width",), {"type": float}), (("--height",), {"type": float}))
    add("solve", (("--dirichlet",), bool_))
    add("dbeta", (("--h-beta",), {"type": float, "dest": "h_beta"}), (("--beta1",), {"type": float}),
        (("--richardson",), bool_), (("--tolerance",), {"type": float}))
    add("sweep-beta", (("--betas",), {"type": _floats}), (("--fd",), bool_), (("--dirichlet",), bool_),
        (("--tolerance",), {"type": float}))
    add("scaling", (("--ts",), {"type": _floats}), (("--tolerance",), {"type": float}))
    add("shape-deriv", (("--field",), {"choices": ["dilate", "translate", "stretch-x", "rotate", "file"]}),
        (("--field-file",), {"dest": "field_file"}), (("--t0",), {"type": float}), (("--richardson",), bool_),
        (("--gradient",), {"choices": ["triangle", "robin"]}), (("--tolerance",), {"type": float}))
    add("hadamard", (("--field",), {"choices": ["dilate", "translate", "stretch-x", "rotate", "file"]}),
        (("--field-file",), {"dest": "field_file"}), (("--ts",), {"type": _floats}))
    add("potential-check", (("--mode",), {"choices": ["mono", "cont", "shift", "coercive"]}),
        (("--seed",), {"type": int}), (("--samples",), {"type": int}), (("--c",), {"type": float}),
        (("--V1",), {}), (("--V2",), {}))
    add("radial", (("--p",), {"type": float}), (("--beta",), {"type": float}), (("--R",), {"type": float}),
        (("--n",), {"type": int}), (("--V",), {}), (("--size",), {"type": int}))
    add("convergence-study", (("--hs",), {"type": _floats}), (("--reference",), {}))
    return parser


def _overrides(ns: argparse.Namespace) -> dict:
    skip = {"config", "experiment", "verbose", "spec", "mesh"}
    out = {k: v for k, v in vars(ns).items() if k not in skip}
    if ns.spec:
        out["spec"] = _json_file(ns.spec)
    if ns.experiment == "mesh":
        shape = {k: out.pop(k) for k in ("shape", "h", "R", "a", "b", "width", "height") if out.get(k) is not None}
        for k in ("shape", "h", "R", "a", "b", "width", "height"):
            out.pop(k, None)
        if shape:
            out["mesh"] = shape
    elif ns.mesh:
        out["mesh"] = {"path": ns.mesh}
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(ns.experiment, ns.config, _overrides(ns))
        if ns.experiment == "mesh" and "mesh" in cfg and isinstance(cfg["mesh"], dict):
            cfg["mesh"] = {k: v for k, v in cfg["mesh"].items() if v is not None}
    except (ConfigError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rep = Report(cfg)
    code = 0
    try:
        RUNNERS[ns.experiment](cfg, rep)
        code = 0 if rep.passed else 1
    except (ConfigError, SpecError, meshmod.MeshError) as exc:
        if isinstance(exc, meshmod.MeshError) and "perturbation" in str(exc):
            rep.summary["error"] = str(exc)
            code = 1
        else:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    except (ConvergenceError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        rep.summary["error"] = f"{type(exc).__name__}: {exc}"
        code = 1
    rep.summary["exit_code"] = code
    rep.write(cfg.get("out"))
    if code:
        print(f"failed: {rep.summary.get('error') or [k for k, c in rep.summary['checks'].items() if not c['pass']]}",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
