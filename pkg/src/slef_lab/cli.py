"""Command-line runner: configuration parsing, experiment dispatch, sweeps,
and reproducible artifact emission.

Configs are INI-style key/value text with [section] nesting (parsed by
configparser).  Every experiment validates its sections against an explicit
schema: unknown keys and out-of-range values are hard errors.  Each run
writes its CSVs, a key: value summary, and a manifest (config echo, version,
per-stage timings, output hashes); the manifest is written even on failure.
Runs are deterministic in serial mode: repeated runs produce identical
output hashes.

    slef-lab <experiment> --config cfg.ini [--out DIR]
    slef-lab sweep --config cfg.ini --axis section.key=v1,v2,... [--jobs N]

Exit codes: 0 success, 2 convergence failure, 3 invalid configuration.
"""

import argparse
import configparser
import hashlib
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    ConfigKeyError,
    ConfigRangeError,
    ConfigSyntaxError,
    ConvergenceError,
    MonotonicityError,
)

EXPERIMENTS = ("spectral", "solve", "ode", "fit", "recursion", "harnack",
               "counterexample", "probe")

CSV_FMT = "{:.17g}"   # round-trip exact for doubles


def _positive(x):
    return x > 0


def _angle(x):
    return 0.0 < x < 2.0 * np.pi


# schema: experiment -> section -> key -> (type, validator or None)
_COMMON_OUTPUT = {"directory": (str, None), "precision": (int, _positive)}
SCHEMA = {
    "spectral": {
        "domain": {"shape": (str, lambda s: s in ("sector", "cap")),
                   "theta": (float, _angle),
                   "alpha": (float, lambda x: 0 < x < np.pi),
                   "nodes": (int, lambda n: n >= 64)},
        "equation": {"gamma": (float, _positive)},
        "output": _COMMON_OUTPUT,
    },
    "solve": {
        "domain": {"shape": (str, lambda s: s in ("flat", "tilted", "bump",
                                                  "sector", "disk")),
                   "slope": (float, None), "radius": (float, _positive),
                   "theta": (float, _angle),
                   "bump_radius": (float, lambda x: x > 1),
                   "i_max": (int, _positive),
                   "x_lo": (float, None), "x_hi": (float, None),
                   "top": (float, None)},
        "equation": {"gamma": (float, _positive), "f": (float, _positive)},
        "mesh": {"h": (float, _positive), "nr": (int, lambda n: n >= 8),
                 "nw": (int, lambda n: n >= 8),
                 "grading": (float, lambda g: 1.0 <= g <= 1.2)},
        "solver": {"newton_tol": (float, _positive),
                   "eps0": (float, _positive),
                   "eps_factor": (float, lambda x: 0 < x < 1),
                   "eps_min": (float, _positive),
                   "polish": (bool, None),
                   "boundary_value": (float, lambda x: x >= 0)},
        "output": _COMMON_OUTPUT,
    },
    "ode": {
        "profile": {"kind": (str, lambda s: s in ("flat", "annulus",
                                                  "angular")),
                    "gamma": (float, _positive), "param": (float, None),
                    "inner_radius": (float, _positive),
                    "slope": (float, _positive),
                    "theta": (float, _angle),
                    "t_max": (float, _positive),
                    "n_samples": (int, lambda n: n >= 16)},
        "output": _COMMON_OUTPUT,
    },
    "fit": {
        "domain": {"theta": (float, _angle), "radius": (float, _positive)},
        "equation": {"gamma": (float, _positive)},
        "mesh": {"nr": (int, lambda n: n >= 8), "nw": (int, lambda n: n >= 8),
                 "grading": (float, lambda g: 1.0 <= g <= 1.2)},
        "window": {"t_min": (float, _positive), "t_max": (float, _positive)},
        "output": _COMMON_OUTPUT,
    },
    "recursion": {
        "sequence": {"kind": (str, lambda s: s in ("ak", "sigma")),
                     "gamma": (float, _positive), "a1": (float, _positive),
                     "q_cap": (float, lambda x: 0 < x <= 1),
                     "q": (float, lambda x: 0 < x < 1),
                     "mode": (str, lambda s: s in ("geometric", "harmonic")),
                     "k_max": (int, lambda k: 1 <= k <= 10**8)},
        "output": _COMMON_OUTPUT,
    },
    "harnack": {
        "domain": {"theta": (float, _angle), "radius": (float, _positive)},
        "equation": {"gamma": (float, _positive)},
        "mesh": {"nr": (int, lambda n: n >= 8), "nw": (int, lambda n: n >= 8),
                 "grading": (float, lambda g: 1.0 <= g <= 1.2)},
        "data": {"outer_1": (float, _positive), "outer_2": (float, _positive)},
        "output": _COMMON_OUTPUT,
    },
    "counterexample": {
        "experiment": {"bump_radius": (float, lambda x: x > 1),
                       "i_max": (int, _positive),
                       "gamma": (float, lambda g: 0 < g < 1),
                       "slope": (float, _positive),
                       "h": (float, _positive),
                       "apex_index": (int, lambda i: i >= 2)},
        "output": _COMMON_OUTPUT,
    },
    "probe": {
        "domain": {"theta": (float, _angle)},
        "equation": {"gamma": (float, lambda g: g >= 0)},
        "caps": {"values": (str, None)},
        "mesh": {"nr": (int, lambda n: n >= 8), "nw": (int, lambda n: n >= 8),
                 "grading": (float, lambda g: 1.0 <= g <= 1.2)},
        "output": _COMMON_OUTPUT,
    },
}


@dataclass
class RunConfig:
    experiment: str
    sections: dict

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)


@dataclass
class RunManifest:
    experiment: str
    config_echo: str
    version: str
    timings: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)   # filename -> sha256
    notes: dict = field(default_factory=dict)     # engine warnings etc.
    error: str = None

    def write(self, path):
        lines = [f"experiment: {self.experiment}",
                 f"version: {self.version}"]
        for stage, dt in self.timings.items():
            lines.append(f"time_{stage}_s: {dt:.3f}")
        for key in sorted(self.notes):
            lines.append(f"note_{key}: {self.notes[key]}")
        for name in sorted(self.outputs):
            lines.append(f"output: {name} sha256={self.outputs[name]}")
        if self.error is not None:
            lines.append(f"error: {self.error}")
        lines.append("config:")
        lines.extend("  " + ln for ln in self.config_echo.splitlines())
        Path(path).write_text("\n".join(lines) + "\n")


def _coerce(raw, typ, section, key):
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except ValueError as exc:
        raise ConfigRangeError(
            f"[{section}] {key} = {raw!r} is not a valid "
            f"{typ.__name__}") from exc


def parse_config(text) -> RunConfig:
    """Parse and fully validate a run configuration document."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigSyntaxError(f"config syntax error: {exc}") from exc
    if not cp.has_section("run") or not cp.has_option("run", "experiment"):
        raise ConfigKeyError("missing [run] experiment = <name>")
    experiment = cp.get("run", "experiment").strip()
    if experiment not in EXPERIMENTS:
        raise ConfigRangeError(
            f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    extra_run = set(cp.options("run")) - {"experiment"}
    if extra_run:
        raise ConfigKeyError(f"unknown key(s) in [run]: {sorted(extra_run)}")
    schema = SCHEMA[experiment]
    sections = {}
    for sec in cp.sections():
        if sec == "run":
            continue
        if sec not in schema:
            raise ConfigKeyError(
                f"unknown section [{sec}] for experiment {experiment}")
        sections[sec] = {}
        for key in cp.options(sec):
            if key not in schema[sec]:
                raise ConfigKeyError(f"unknown key {key!r} in [{sec}]")
            typ, check = schema[sec][key]
            val = _coerce(cp.get(sec, key), typ, sec, key)
            if check is not None and not check(val):
                raise ConfigRangeError(
                    f"[{sec}] {key} = {val} out of range")
            sections[sec][key] = val
    cfg = RunConfig(experiment=experiment, sections=sections)
    _validate_required(cfg)
    return cfg


_REQUIRED = {
    "spectral": [("domain", "shape"), ("equation", "gamma")],
    "solve": [("domain", "shape"), ("equation", "gamma")],
    "ode": [("profile", "kind"), ("profile", "gamma")],
    "fit": [("domain", "theta"), ("equation", "gamma")],
    "recursion": [("sequence", "kind")],
    "harnack": [("domain", "theta"), ("equation", "gamma")],
    "counterexample": [("experiment", "gamma")],
    "probe": [("domain", "theta"), ("equation", "gamma"),
              ("caps", "values")],
}


def _validate_required(cfg):
    for sec, key in _REQUIRED[cfg.experiment]:
        if cfg.get(sec, key) is None:
            raise ConfigKeyError(
                f"experiment {cfg.experiment} requires [{sec}] {key}")
    if cfg.experiment == "spectral":
        shape = cfg.get("domain", "shape")
        needed = "theta" if shape == "sector" else "alpha"
        if cfg.get("domain", needed) is None:
            raise ConfigKeyError(f"spectral {shape} requires [domain] "
                                 f"{needed}")
    if cfg.experiment == "recursion":
        kind = cfg.get("sequence", "kind")
        if kind == "ak" and cfg.get("sequence", "gamma") is None:
            raise ConfigKeyError("ak recursion requires [sequence] gamma")
        if kind == "sigma" and cfg.get("sequence", "q") is None:
            raise ConfigKeyError("sigma recursion requires [sequence] q")


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(
                CSV_FMT.format(c) if isinstance(c, float) else str(c)
                for c in row) + "\n")


def _write_summary(path, pairs):
    with open(path, "w") as fh:
        for k, v in pairs:
            if isinstance(v, float):
                fh.write(f"{k}: {CSV_FMT.format(v)}\n")
            else:
                fh.write(f"{k}: {v}\n")


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# experiment engines


def _run_spectral(cfg, out):
    from .spectral import cap_frequency, classify, sector_frequency
    gamma = cfg.get("equation", "gamma")
    shape = cfg.get("domain", "shape")
    if shape == "sector":
        cone = sector_frequency(cfg.get("domain", "theta"))
        param = cfg.get("domain", "theta")
    else:
        cone = cap_frequency(cfg.get("domain", "alpha"),
                             cfg.get("domain", "nodes", 1024))
        param = cfg.get("domain", "alpha")
    cls = classify(cone, gamma)
    rows = [(shape, param, cone.lambda_sigma, cone.phi_sigma, gamma,
             cls.label, cls.margin)]
    _write_csv(out / "spectral.csv",
               "shape,param,lambda,phi,gamma,class,margin", rows)
    _write_summary(out / "summary.txt", [
        ("shape", shape), ("param", param),
        ("lambda", cone.lambda_sigma), ("phi", cone.phi_sigma),
        ("class", cls.label), ("margin", cls.margin)])


def _build_domain_mesh(cfg):
    from .geometry import BumpCurve, DiskDomain, GraphDomain, SectorDomain
    from .mesh import build_cartesian_mesh, build_polar_mesh
    shape = cfg.get("domain", "shape")
    if shape == "sector":
        sec = SectorDomain(theta=cfg.get("domain", "theta"),
                           radius=cfg.get("domain", "radius", 1.0))
        return build_polar_mesh(sec, cfg.get("mesh", "nr", 64),
                                cfg.get("mesh", "nw", 64),
                                cfg.get("mesh", "grading", 1.0))
    if shape == "disk":
        dom = DiskDomain(cfg.get("domain", "radius", 1.0))
        return build_cartesian_mesh(dom, cfg.get("mesh", "h", 2.0**-5))
    x_lo = cfg.get("domain", "x_lo", -1.0)
    x_hi = cfg.get("domain", "x_hi", 1.0)
    top = cfg.get("domain", "top", 1.0)
    if shape == "flat":
        dom = GraphDomain.flat(x_range=(x_lo, x_hi), top=top)
    elif shape == "tilted":
        dom = GraphDomain.tilted(cfg.get("domain", "slope", 0.5),
                                 x_range=(x_lo, x_hi), top=top)
    else:
        curve = BumpCurve(R=cfg.get("domain", "bump_radius", 2.0),
                          i_max=cfg.get("domain", "i_max", 8))
        dom = GraphDomain.from_bump_curve(curve, x_range=(x_lo, x_hi),
                                          top=top)
    return build_cartesian_mesh(dom, cfg.get("mesh", "h", 2.0**-5))


def _run_solve(cfg, out):
    from .mesh import Field
    from .slef_solver import SleConfig, solve_singular
    mesh = _build_domain_mesh(cfg)
    scfg = SleConfig(gamma=cfg.get("equation", "gamma"),
                     f=cfg.get("equation", "f", 1.0),
                     newton_tol=cfg.get("solver", "newton_tol", 1e-10),
                     eps0=cfg.get("solver", "eps0", 1.0),
                     eps_factor=cfg.get("solver", "eps_factor", 0.5),
                     eps_min=cfg.get("solver", "eps_min"),
                     polish_to_zero=cfg.get("solver", "polish", False))
    bval = cfg.get("solver", "boundary_value", 0.0)
    u, rep = solve_singular(mesh, scfg, Field.from_boundary(mesh, bval))
    u.to_csv(out / "solution.csv")
    trunc_note = rep.cauchy_gap[-1] if rep.cauchy_gap else 0.0
    truncated = bool(trunc_note > 1e-3 * max(abs(u.max()), 1e-30))
    _write_summary(out / "report.txt", [
        ("levels", len(rep.eps_schedule)),
        ("final_residual", rep.final_residual),
        ("monotone_in_eps", rep.monotone_in_eps),
        ("subsolution_ok", rep.subsolution_ok),
        ("last_cauchy_gap", trunc_note),
        ("truncation_warning", truncated),
        ("max_u", u.max()), ("min_u", u.min())])
    if truncated:
        return {"truncation_warning":
                f"last eps Cauchy gap {trunc_note:.3e} not resolved "
                "(eps_min too large for this mesh)"}


def _run_ode(cfg, out):
    from .ode_lab import angular_profile, annulus_profile, flat_profile
    kind = cfg.get("profile", "kind")
    gamma = cfg.get("profile", "gamma")
    n_s = cfg.get("profile", "n_samples", 200)
    if kind == "flat":
        prof = flat_profile(gamma, cfg.get("profile", "param", 1.0),
                            cfg.get("profile", "t_max", 1.0), n_s)
        summary = [("kind", kind), ("t_star", prof.t_star),
                   ("peak", float(np.max(prof.u))),
                   ("t_end", prof.t_end)]
    elif kind == "annulus":
        prof = annulus_profile(gamma, cfg.get("profile", "inner_radius", 1.0),
                               cfg.get("profile", "slope", 1.0),
                               cfg.get("profile", "t_max", 1.0),
                               n_samples=n_s)
        summary = [("kind", kind), ("t_star", prof.t_star),
                   ("peak", float(np.max(prof.u)))]
    else:
        res = angular_profile(gamma, cfg.get("profile", "theta"))
        summary = [("kind", kind), ("status", res.status),
                   ("omega_peak_cap", res.omega_peak_cap)]
        prof = res.profile
        if prof is None:
            _write_summary(out / "summary.txt", summary)
            return
        summary.append(("slope", res.s_star))
    _write_csv(out / "profile.csv", "t,u",
               list(zip(prof.t.tolist(), prof.u.tolist())))
    _write_summary(out / "summary.txt", summary)


def _run_fit(cfg, out):
    from .analysis import fit_growth
    from .mesh import Field
    from .slef_solver import SleConfig, solve_singular
    from .spectral import classify, sector_frequency
    theta = cfg.get("domain", "theta")
    gamma = cfg.get("equation", "gamma")
    radius = cfg.get("domain", "radius", 8.0)
    mesh = _build_domain_mesh(RunConfig("fit", {
        "domain": {"shape": "sector", "theta": theta, "radius": radius},
        "mesh": {"nr": cfg.get("mesh", "nr", 256),
                 "nw": cfg.get("mesh", "nw", 128),
                 "grading": cfg.get("mesh", "grading", 1.03)}}))
    scfg = SleConfig(gamma=gamma, f=1.0, eps0=max(1.0, radius / 8),
                     precond="auto")
    u, _ = solve_singular(mesh, scfg, Field.from_boundary(mesh, 0.0))
    rr = mesh.meta["radii"]
    idx = mesh.meta["interior_index"]
    jmid = mesh.meta["omegas"].size // 2
    col = idx[:, jmid]
    good = col >= 0
    rs = rr[good]
    vals = u.interior[col[good]]
    t_lo = cfg.get("window", "t_min", 2.0**-9)
    t_hi = cfg.get("window", "t_max", 2.0**-3)
    # keep the window above the local resolution (5 cells per spec contract)
    local = np.interp(t_lo, rr[:-1], np.diff(rr))
    t_lo = max(t_lo, 5.0 * local)
    sel = (rs >= t_lo) & (rs <= t_hi)
    t = rs[sel][::-1]
    uu = vals[sel][::-1]
    fit = fit_growth(t, uu, model="pure")
    cone = sector_frequency(theta)
    cls = classify(cone, gamma)
    rows = list(zip(t.tolist(), uu.tolist()))
    _write_csv(out / "ray.csv", "t,u", rows)
    pairs = [("theta", theta), ("gamma", gamma), ("class", cls.label),
             ("alpha", fit.alpha), ("rms", fit.rms)]
    if cls.label == "critical":
        fl = fit_growth(t, uu, model="log_augmented",
                        phi_fixed=2.0 / (1.0 + gamma))
        pairs += [("log_power", fl.log_power), ("rms_log", fl.rms)]
    _write_summary(out / "summary.txt", pairs)


def _run_recursion(cfg, out):
    from .analysis import ak_recursion, sigma_recursion
    kind = cfg.get("sequence", "kind")
    k_max = cfg.get("sequence", "k_max", 10**5)
    if kind == "ak":
        tr = ak_recursion(cfg.get("sequence", "gamma"),
                          cfg.get("sequence", "a1", 10.0), k_max)
    else:
        tr = sigma_recursion(cfg.get("sequence", "q_cap", 1.0),
                             cfg.get("sequence", "q", 0.5),
                             cfg.get("sequence", "mode", "harmonic"), k_max)
    _write_csv(out / "trace.csv", "k,value,scaled",
               list(zip(tr.k.tolist(), tr.values.tolist(),
                        tr.scaled.tolist())))
    _write_summary(out / "summary.txt", [
        ("kind", tr.kind), ("k_max", tr.k_max),
        ("sup_scaled", tr.sup_scaled), ("last_scaled", tr.last_scaled)])


def _run_harnack(cfg, out):
    from .analysis import ratio_probe
    from .mesh import Field
    from .slef_solver import SleConfig, solve_singular
    theta = cfg.get("domain", "theta")
    gamma = cfg.get("equation", "gamma")
    mesh = _build_domain_mesh(RunConfig("harnack", {
        "domain": {"shape": "sector", "theta": theta,
                   "radius": cfg.get("domain", "radius", 1.0)},
        "mesh": {"nr": cfg.get("mesh", "nr", 256),
                 "nw": cfg.get("mesh", "nw", 128),
                 "grading": cfg.get("mesh", "grading", 1.03)}}))
    scfg = SleConfig(gamma=gamma, f=1.0, eps0=0.5)
    fields = []
    for val in (cfg.get("data", "outer_1", 1.0),
                cfg.get("data", "outer_2", 2.0)):
        bnd = Field.from_boundary(mesh, {"outer": val, "side0": 0.0,
                                         "side1": 0.0, "vertex": 0.0})
        fields.append(solve_singular(mesh, scfg, bnd)[0])
    depths = 2.0 ** -np.arange(3, 9)
    path = np.column_stack([depths, np.full(depths.size, theta / 2)])
    probe = ratio_probe(fields[0], fields[1], path, param=depths,
                        R=cfg.get("domain", "radius", 1.0), gamma=gamma)
    _write_csv(out / "ratio.csv", "depth,u,v,ratio",
               list(zip(depths.tolist(), probe.u_vals.tolist(),
                        probe.v_vals.tolist(), probe.ratio.tolist())))
    _write_summary(out / "summary.txt", [
        ("sup", probe.sup), ("inf", probe.inf),
        ("monotone", probe.trend_monotone),
        ("max_rise", probe.trend_max_rise),
        ("c_sup", probe.c_sup), ("c_inf", probe.c_inf)])


def _run_counterexample(cfg, out):
    from .analysis import counterexample_experiment
    rep = counterexample_experiment(
        R=cfg.get("experiment", "bump_radius", 2.0),
        i_max=cfg.get("experiment", "i_max", 8),
        gamma=cfg.get("experiment", "gamma", 0.5),
        k=cfg.get("experiment", "slope", 2.0),
        h=cfg.get("experiment", "h", 2.0**-9),
        apex_index=cfg.get("experiment", "apex_index", 2))
    _write_csv(out / "midline.csv", "depth,ratio",
               list(zip(rep.mid_depths.tolist(), rep.mid_ratio.tolist())))
    _write_csv(out / "apex.csv", "depth,ratio",
               list(zip(rep.apex_depths.tolist(), rep.apex_ratio.tolist())))
    _write_summary(out / "summary.txt",
                   [ln.split(": ") for ln in rep.summary_lines()])


def _run_probe(cfg, out):
    from .analysis import critical_source_probe
    caps = [float(x) for x in cfg.get("caps", "values").split()]
    rep = critical_source_probe(cfg.get("domain", "theta"),
                                cfg.get("equation", "gamma"), caps,
                                Nr=cfg.get("mesh", "nr", 160),
                                Nw=cfg.get("mesh", "nw", 96),
                                grading=cfg.get("mesh", "grading", 1.06))
    _write_csv(out / "trend.csv", "cap,sup_w",
               list(zip(rep["caps"].tolist(), rep["sup_w"].tolist())))
    _write_summary(out / "summary.txt", [
        ("saturating", rep["saturating"]),
        ("quality_caveat", rep["quality_caveat"]),
        ("last_rel_growth",
         float(rep["rel_growth"][-1]) if len(rep["rel_growth"]) else 0.0)])


_ENGINES = {
    "spectral": _run_spectral, "solve": _run_solve, "ode": _run_ode,
    "fit": _run_fit, "recursion": _run_recursion, "harnack": _run_harnack,
    "counterexample": _run_counterexample, "probe": _run_probe,
}


def _echo_config(cfg):
    lines = ["[run]", f"experiment = {cfg.experiment}"]
    for sec in sorted(cfg.sections):
        lines.append(f"[{sec}]")
        for key in sorted(cfg.sections[sec]):
            lines.append(f"{key} = {cfg.sections[sec][key]}")
    return "\n".join(lines)


def run(cfg: RunConfig, out_dir) -> RunManifest:
    """Execute one experiment; always writes manifest.txt in out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(experiment=cfg.experiment,
                           config_echo=_echo_config(cfg),
                           version=__version__)
    t0 = time.perf_counter()
    try:
        notes = _ENGINES[cfg.experiment](cfg, out)
        if notes:
            manifest.notes.update(notes)
        manifest.timings["run"] = time.perf_counter() - t0
    except Exception as exc:
        manifest.timings["run"] = time.perf_counter() - t0
        manifest.error = f"{type(exc).__name__}: {exc}"
        manifest.write(out / "manifest.txt")
        raise
    t1 = time.perf_counter()
    for p in sorted(out.iterdir()):
        if p.name != "manifest.txt" and p.is_file():
            manifest.outputs[p.name] = _sha256(p)
    manifest.timings["hash"] = time.perf_counter() - t1
    manifest.write(out / "manifest.txt")
    return manifest


def _sweep_one(args):
    text, out_dir = args
    try:
        cfg = parse_config(text)
        run(cfg, out_dir)
        return ("ok", out_dir)
    except Exception as exc:
        return (f"failed: {type(exc).__name__}", out_dir)


def sweep(template_text, axis, out_dir, jobs=1) -> RunManifest:
    """Run the template once per axis value (axis = 'section.key=v1,v2,...'),
    each in its own subdirectory, and aggregate one CSV row per run."""
    try:
        key_part, vals_part = axis.split("=", 1)
        section, key = key_part.strip().split(".", 1)
        values = [v.strip() for v in vals_part.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad axis spec {axis!r}; expected "
                          "section.key=v1,v2,...") from exc
    if not values:
        raise ConfigError("empty sweep axis")
    base = parse_config(template_text)  # validates the template early
    if section not in SCHEMA[base.experiment]:
        raise ConfigKeyError(f"unknown sweep section [{section}]")
    if key not in SCHEMA[base.experiment][section]:
        raise ConfigKeyError(f"unknown sweep key {key!r} in [{section}]")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    for i, val in enumerate(values):
        cp = configparser.ConfigParser()
        cp.read_string(template_text)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, val)
        buf = []
        for sec in cp.sections():
            buf.append(f"[{sec}]")
            for k, v in cp.items(sec):
                buf.append(f"{k} = {v}")
        tasks.append(("\n".join(buf), out / f"run_{i:03d}"))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    # aggregate: one row per run from its summary file
    all_keys = []
    rows = []
    summaries = []
    for (status, run_dir), val in zip(results, values):
        summary = {}
        spath = Path(run_dir) / "summary.txt"
        if spath.exists():
            for ln in spath.read_text().splitlines():
                if ": " in ln:
                    k, v = ln.split(": ", 1)
                    summary[k] = v
                    if k not in all_keys:
                        all_keys.append(k)
        summaries.append((val, status, summary))
    with open(out / "sweep.csv", "w") as fh:
        fh.write(",".join([f"{section}.{key}", "status"] + all_keys) + "\n")
        for val, status, summary in summaries:
            row = [val, status] + [summary.get(k, "") for k in all_keys]
            fh.write(",".join(row) + "\n")
    manifest = RunManifest(experiment=f"sweep:{base.experiment}",
                           config_echo=_echo_config(base) +
                           f"\n# axis: {axis}",
                           version=__version__)
    manifest.outputs["sweep.csv"] = _sha256(out / "sweep.csv")
    manifest.write(out / "manifest.txt")
    return manifest


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="slef-lab",
        description="numerical laboratory for -Delta u = f(X) u^-gamma")
    ap.add_argument("command", choices=list(EXPERIMENTS) + ["sweep"])
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default=None)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--axis", default=None,
                    help="sweep axis: section.key=v1,v2,...")
    args = ap.parse_args(argv)
    import os
    out_dir = args.out or os.environ.get("SLEF_LAB_OUT", "slef_out")
    try:
        text = Path(args.config).read_text()
        if args.command == "sweep":
            if not args.axis:
                ap.error("sweep requires --axis")
            sweep(text, args.axis, out_dir, jobs=args.jobs)
        else:
            cfg = parse_config(text)
            if cfg.experiment != args.command:
                raise ConfigRangeError(
                    f"config names experiment {cfg.experiment!r} but the "
                    f"command was {args.command!r}")
            run(cfg, out_dir)
    except ConfigError as exc:
        print(f"slef-lab: invalid config: {exc}", file=sys.stderr)
        return 3
    except (ConvergenceError, MonotonicityError) as exc:
        print(f"slef-lab: convergence failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
