"""Command-line driver: JSON run configs in, CSV tables plus a metadata sidecar out.

Every subcommand reads the same config layout (see ``SCHEMA``).  The
experiment named on the command line overrides the one in the file, so one
config can drive several subcommands.  Exit status is 0 on success, 1 when
``--assert`` finds a failed threshold, 2 for a bad config and 3 for a
numerical failure reported by the library.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .analysis import depletion_measure, fit_decay_rate, quantity_norms
from .discretization import BandedOperator, Grid
from .errors import ConfigError, ShearlabError
from .evolution import evolve_direct, evolve_spectral, initial_data
from .greens import closed_form_error, kernel_identity_routes, symmetry_defect, verify_envelopes
from .profile import make_profile
from .rayleigh import DEFAULT_EPS_SCHEDULE, LapSpectralHit, clip_schedule, lap_probe, solve_rayleigh
from .spectrum import assumption_report

log = logging.getLogger("shearlab")

EXPERIMENTS = ("spectrum-check", "greens-verify", "resolvent", "lap-probe",
               "evolve-direct", "evolve-spectral", "rates", "depletion")

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "profile": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"type": "string"}},
        },
        "k": {"type": "array", "minItems": 1,
              "items": {"type": "integer", "not": {"const": 0}}},
        "n": {"type": "integer", "minimum": 3},
        "eps_schedule": {"type": "array", "minItems": 1,
                         "items": {"type": "number", "exclusiveMinimum": 0}},
        "lambda": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "values": {"type": "array", "items": {"type": "number"}},
                "count": {"type": "integer", "minimum": 1},
                "region": {"enum": ["nondegenerate", "degenerate"]},
            },
        },
        "time": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t_end": {"type": "number"},
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "snapshots": {"oneOf": [
                    {"type": "integer", "minimum": 2},
                    {"type": "array", "items": {"type": "number"}, "minItems": 1},
                ]},
            },
        },
        "initial_data": {"type": "object", "properties": {"kind": {"type": "string"}}},
        "output_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "params": {"type": "object"},
    },
}

DEFAULTS = {
    "profile": {"kind": "quadratic_well"},
    "k": [1],
    "n": 1024,
    "eps_schedule": list(DEFAULT_EPS_SCHEDULE),
    "lambda": {"count": 8, "region": "nondegenerate"},
    "time": {"t_end": 50.0, "dt": 0.01, "snapshots": 11},
    "initial_data": {"kind": "sine"},
    "output_dir": "out",
    "seed": 0,
    "params": {},
}

THRESHOLDS = {
    "greens_error": 1e-5,
    "kernel_identity": 1e-4,
    "symmetry": 1e-6,
    "envelope_drift": 0.25,
    "lap_floor": 1e-3,
    "lap_variation": 0.2,
    "reconstruction": 1e-2,
    "slope_psi": -1.8,
    "slope_ux": -0.9,
    "slope_uy": -1.8,
    "r2": 0.9,
    "alpha": 1.60,
    "beta": 0.775,
}

# frozen column layouts; README documents them
HEADERS = {
    "spectrum": ["config_hash", "k", "kind", "re_lambda", "im_lambda", "metric", "flag"],
    "greens_closed_form": ["config_hash", "check", "k", "lam", "eps", "value", "threshold", "passed"],
    "greens_envelopes": ["config_hash", "k", "lam", "eps", "z", "bound_id", "max_ratio",
                         "refined_ratio", "drift"],
    "resolvent": ["config_hash", "k", "lam", "eps", "iota", "y", "re_psi", "im_psi", "residual"],
    "lap": ["config_hash", "k", "lam", "eps", "norm_flavor", "sigma_min", "variation", "hit"],
    "snapshots": ["config_hash", "method", "k", "t", "y", "re_omega", "im_omega", "re_psi", "im_psi"],
    "rates": ["config_hash", "k", "quantity", "window_lo", "window_hi", "slope", "intercept",
              "r2", "Mk", "samples", "threshold", "passed"],
    "rates_series": ["config_hash", "k", "t", "psi_norm", "ux_norm", "uy_norm"],
    "depletion": ["config_hash", "k", "fit", "exponent", "r2", "window_lo", "window_hi",
                  "threshold", "passed"],
    "depletion_envelope": ["config_hash", "k", "distance", "envelope"],
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    profile: dict
    k: list
    n: int
    eps_schedule: list
    lam: dict
    time: dict
    initial_data: dict
    output_dir: str
    seed: int
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict, experiment: str | None = None) -> "RunConfig":
        raw = dict(raw)
        if experiment:
            raw["experiment"] = experiment
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(map(str, exc.absolute_path)) or "<root>"
            raise ConfigError(f"config invalid at {path}: {exc.message}") from None
        if "experiment" not in raw:
            raise ConfigError("no experiment given")
        merged = {**DEFAULTS, **raw}
        for key in ("time", "params"):
            merged[key] = {**DEFAULTS[key], **raw.get(key, {})}
        return cls(merged["experiment"], merged["profile"], list(merged["k"]), merged["n"],
                   list(merged["eps_schedule"]), merged["lambda"], merged["time"],
                   merged["initial_data"], merged["output_dir"], merged["seed"], merged["params"])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @property
    def hash(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def threshold(self, name: str) -> float:
        return float(self.params.get("thresholds", {}).get(name, THRESHOLDS[name]))


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None


@dataclass
class Outcome:
    tables: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    plot: tuple | None = None

    def check(self, name, passed, detail=""):
        self.checks.append({"name": name, "passed": bool(passed), "detail": detail})


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


# --- shared setup ------------------------------------------------------------------

def _profile(cfg):
    try:
        return make_profile(cfg.profile)
    except ConfigError:
        raise
    except ShearlabError as exc:
        raise ConfigError(f"profile rejected: {exc}") from None


def _lambdas(cfg, p):
    spec = cfg.lam
    if "values" in spec:
        return [float(v) for v in spec["values"]]
    m = int(spec.get("count", 8))
    if spec.get("region", "nondegenerate") == "degenerate":
        top = float(p.b(np.float64(p.y_star + p.delta0)))
        return [p.b_star + j * (top - p.b_star) / (m + 1) for j in range(1, m + 1)]
    lo, hi = p.sigma
    return [lo + j * (hi - lo) / (m + 1) for j in range(1, m + 1)]


def _initial(cfg, grid):
    spec = dict(cfg.initial_data)
    if spec.get("kind") == "file":
        try:
            data = np.loadtxt(spec["path"], dtype=complex, ndmin=1)
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot load initial data: {exc}") from None
        if data.shape != grid.y.shape:
            raise ConfigError(f"initial data file has {data.size} samples, grid needs {grid.y.size}")
        return data
    try:
        return initial_data(grid, spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _snapshots(cfg):
    tm = cfg.time
    s = tm["snapshots"]
    if isinstance(s, list):
        return np.array(sorted(set([0.0] + [float(v) for v in s])))
    return np.linspace(0.0, float(tm["t_end"]), int(s))


def _pool(jobs):
    return ThreadPoolExecutor(max_workers=max(1, jobs))


# --- experiments ----------------------------------------------------------------------

def run_spectrum(cfg, jobs):
    p = _profile(cfg)
    k_max = int(cfg.params.get("k_max", max(abs(k) for k in cfg.k)))
    n = int(cfg.params.get("n", min(cfg.n, 256)))
    rep = assumption_report(p, k_max, Grid(n), jobs=jobs,
                            disable_curvature=bool(cfg.params.get("disable_curvature", False)))
    out = Outcome()
    rows = []
    for h in rep.discrete_hits + rep.spurious:
        rows.append([h.k, "discrete" if h.genuine else "spurious", h.lam.real, h.lam.imag, h.residual, h.genuine])
    hit_set = {(e.k, e.lam) for e in rep.embedded_hits}
    for k, lam, s in rep.embedded_samples:
        rows.append([k, "embedded", lam, 0.0, s, (k, lam) in hit_set])
    rows.append(["", "verdict", "", "", "", rep.verdict])
    out.tables["spectrum"] = rows
    out.meta.update(verdict=rep.verdict, conjugate_paired=rep.conjugate_paired, k_max=k_max, n=n,
                    discrete_hits=len(rep.discrete_hits), embedded_hits=len(rep.embedded_hits))
    out.check("verdict", rep.passed, rep.verdict)
    return out


def run_greens(cfg, jobs):
    p = _profile(cfg)
    grid = Grid(cfg.n)
    out = Outcome()
    rows = []
    ks = cfg.params.get("k_values", [1, 2, 4, 8])
    with _pool(jobs) as pool:
        errs = list(pool.map(lambda k: closed_form_error(k, grid), ks))
    tol = cfg.threshold("greens_error")
    for k, e in zip(ks, errs):
        rows.append(["closed_form", k, "", "", e, tol, e <= tol])
        out.check(f"closed_form k={k}", e <= tol, f"{e:.3e}")
    y = grid.y
    pairs = [(np.sin(np.pi * y), np.cos(2 * np.pi * y)), (y**2, np.exp(y)), (y * (1 - y), np.sin(3 * y))]
    tol = cfg.threshold("kernel_identity")
    for j, (f, g) in enumerate(pairs):
        a, b = kernel_identity_routes(cfg.k[0], f, g, grid)
        rows.append([f"kernel_identity_{j}", cfg.k[0], "", "", abs(a - b), tol, abs(a - b) <= tol])
        out.check(f"kernel identity pair {j}", abs(a - b) <= tol, f"{abs(a - b):.3e}")
    rng = np.random.default_rng(cfg.seed)
    ys, zs = np.sort(rng.uniform(0.05, 0.95, 10)), np.sort(rng.uniform(0.05, 0.95, 10))
    tol = cfg.threshold("symmetry")
    floor = p.eps_floor(grid.h)
    for lam, eps in cfg.params.get("symmetry_points", [[0.01, 0.01], [0.1, 0.004], [0.2, 0.02]]):
        d = symmetry_defect(p, cfg.k[0], lam, max(eps, floor), grid, ys, zs)
        rows.append(["symmetry", cfg.k[0], lam, eps, d, tol, d <= tol])
        out.check(f"symmetry lam={lam}", d <= tol, f"{d:.3e}")
    out.tables["greens_closed_form"] = rows
    cases = cfg.params.get("envelope_cases")
    if cases:
        env = verify_envelopes(p, [tuple(c) for c in cases], n=cfg.n)
        tol = cfg.threshold("envelope_drift")
        out.tables["greens_envelopes"] = [[r.k, r.lam, r.eps, r.z, r.bound_id, r.max_ratio,
                                           r.refined_ratio, r.drift] for r in env]
        worst = max(r.drift for r in env)
        out.check("envelope drift", worst <= tol and all(np.isfinite(r.max_ratio) for r in env),
                  f"max drift {worst:.3f}")
    return out


def run_resolvent(cfg, jobs):
    p = _profile(cfg)
    grid = Grid(cfg.n)
    w0 = _initial(cfg, grid)
    iota = int(cfg.params.get("iota", 1))
    sched = clip_schedule(p, grid, cfg.eps_schedule)
    work = [(k, lam, e) for k in cfg.k for lam in _lambdas(cfg, p) for e in sched]
    with _pool(jobs) as pool:
        sols = list(pool.map(lambda w: solve_rayleigh(p, w[0], w[1], w[2], iota, w0, grid), work))
    rows = []
    for (k, lam, e), s in zip(work, sols):
        rows += [[k, lam, e, iota, yv, v.real, v.imag, s.residual] for yv, v in zip(grid.y, s.psi)]
    out = Outcome(tables={"resolvent": rows})
    out.meta["max_residual"] = max(s.residual for s in sols)
    out.meta["eps_schedule"] = list(sched)
    return out


def run_lap(cfg, jobs):
    p = _profile(cfg)
    grid = Grid(cfg.n)
    flavor = cfg.params.get("norm_flavor", "H1k")
    sched = clip_schedule(p, grid, cfg.eps_schedule)
    work = [(k, lam) for k in cfg.k for lam in _lambdas(cfg, p)]

    def probe(w):
        try:
            return lap_probe(p, w[0], w[1], sched, flavor, grid, raise_on_hit=True), False
        except LapSpectralHit as hit:
            return hit.report, True

    with _pool(jobs) as pool:
        reps = list(pool.map(probe, work))
    out = Outcome()
    rows = []
    floor, var = cfg.threshold("lap_floor"), cfg.threshold("lap_variation")
    for rep, hit in reps:
        for e, s in zip(rep.eps_schedule, rep.sigma_min):
            rows.append([rep.k, rep.lam, e, flavor, s, rep.variation, hit])
        out.check(f"k={rep.k} lam={rep.lam:.6g}", rep.kappa_hat >= floor and rep.variation <= var,
                  f"floor {rep.kappa_hat:.3e}, variation {rep.variation:.3f}")
    out.tables["lap"] = rows
    out.meta["eps_schedule"] = list(sched)
    return out


def _evolve(cfg, p, grid, k, w0, method, jobs, times=None):
    times = _snapshots(cfg) if times is None else times
    params = cfg.params
    if method == "direct":
        return evolve_direct(p, k, w0, grid, float(times[-1]), float(cfg.time["dt"]), times=times,
                             disable_curvature=bool(params.get("disable_curvature", False)))
    return evolve_spectral(p, k, w0, times, grid, method=params.get("method", "contour"),
                           eps_schedule=cfg.eps_schedule,
                           omega_route=params.get("omega_route", "laplacian"),
                           override=bool(params.get("override", False)), jobs=jobs)


def _snapshot_rows(trace):
    rows = []
    for t, om, ps in zip(trace.times, trace.omega, trace.psi):
        rows += [[trace.method, trace.k, t, yv, a.real, a.imag, b.real, b.imag]
                 for yv, a, b in zip(trace.grid.y, om, ps)]
    return rows


def run_evolve(cfg, jobs, method):
    p = _profile(cfg)
    grid = Grid(cfg.n)
    w0 = _initial(cfg, grid)
    out = Outcome()
    rows = []
    for k in cfg.k:
        tr = _evolve(cfg, p, grid, k, w0, method, jobs)
        rows += _snapshot_rows(tr)
        out.meta[f"k={k}"] = dict(tr.meta)
        E = tr.invariant_series
        if E is not None:
            out.meta[f"k={k}"]["energy_drift"] = float(np.max(np.abs(E - E[0])) / E[0])
        if method == "spectral":
            psi0 = -BandedOperator(grid, k).solve(w0[1:-1])
            err = float(np.linalg.norm(tr.psi[0] - psi0) / np.linalg.norm(psi0))
            out.meta[f"k={k}"]["reconstruction_error"] = err
            out.check(f"t=0 reconstruction k={k}", err <= cfg.threshold("reconstruction"), f"{err:.3e}")
        out.plot = ("evolve", tr.times, {f"||psi|| k={k}": quantity_norms(tr, "psi")})
    out.tables["snapshots"] = rows
    return out


def run_rates(cfg, jobs):
    p = _profile(cfg)
    grid = Grid(cfg.n)
    w0 = _initial(cfg, grid)
    window = tuple(cfg.params.get("window", (20.0, 200.0)))
    times = np.linspace(0.0, window[1], int(cfg.params.get("samples", 201)))
    out = Outcome(tables={"rates": [], "rates_series": []})
    series = {}
    for k in cfg.k:
        tr = _evolve(cfg, p, grid, k, w0, cfg.params.get("route", "direct"), jobs, times)
        norms = {q: quantity_norms(tr, q) for q in ("psi", "ux", "uy")}
        out.tables["rates_series"] += [[k, t, a, b, c] for t, a, b, c in
                                       zip(tr.times, norms["psi"], norms["ux"], norms["uy"])]
        for q in ("psi", "ux", "uy"):
            fit = fit_decay_rate(tr, q, window)
            thr = cfg.threshold(f"slope_{q}")
            ok = fit.slope <= thr and fit.r2 >= cfg.threshold("r2")
            out.tables["rates"].append([k, q, window[0], window[1], fit.slope, fit.intercept,
                                        fit.r2, fit.Mk, fit.samples, thr, ok])
            out.check(f"k={k} {q}", ok, f"slope {fit.slope:.3f}, r2 {fit.r2:.3f}")
            series[f"||{q}|| k={k}"] = norms[q]
        out.plot = ("rates", tr.times, series)
    return out


def run_depletion(cfg, jobs):
    p = _profile(cfg)
    grid = Grid(cfg.n)
    w0 = _initial(cfg, grid)
    prm = cfg.params
    T0 = float(prm.get("T0", 20.0))
    t_end = float(prm.get("t_end", 200.0))
    yw = tuple(prm.get("y_window", (0.02, 0.2)))
    times = np.linspace(0.0, t_end, int(prm.get("samples", 201)))
    out = Outcome(tables={"depletion": [], "depletion_envelope": []})
    for k in cfg.k:
        tr = _evolve(cfg, p, grid, k, w0, prm.get("route", "direct"), jobs, times)
        rep = depletion_measure(tr, T0=T0, y_window=yw)
        a_thr, b_thr = cfg.threshold("alpha"), cfg.threshold("beta")
        a_ok = rep.spatial_exponent >= a_thr and rep.spatial.r2 >= cfg.threshold("r2")
        b_ok = rep.temporal_exponent >= b_thr and rep.temporal.r2 >= cfg.threshold("r2")
        out.tables["depletion"] += [
            [k, "spatial", rep.spatial_exponent, rep.spatial.r2, yw[0], yw[1], a_thr, a_ok],
            [k, "temporal", rep.temporal_exponent, rep.temporal.r2, T0, t_end, b_thr, b_ok]]
        dist = np.abs(rep.envelope_y - p.y_star)
        out.tables["depletion_envelope"] += [[k, d, e] for d, e in zip(dist, rep.envelope)]
        out.check(f"k={k} spatial", a_ok, f"alpha {rep.spatial_exponent:.3f}")
        out.check(f"k={k} temporal", b_ok, f"beta {rep.temporal_exponent:.3f}")
        order = np.argsort(dist)
        out.plot = ("depletion", dist[order], {f"envelope k={k}": rep.envelope[order]})
    return out


RUNNERS = {
    "spectrum-check": run_spectrum,
    "greens-verify": run_greens,
    "resolvent": run_resolvent,
    "lap-probe": run_lap,
    "evolve-direct": lambda cfg, jobs: run_evolve(cfg, jobs, "direct"),
    "evolve-spectral": lambda cfg, jobs: run_evolve(cfg, jobs, "spectral"),
    "rates": run_rates,
    "depletion": run_depletion,
}


# --- output ---------------------------------------------------------------------------

def _write_plot(path: Path, plot):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    kind, x, series = plot
    plt.rcParams["svg.hashsalt"] = "shearlab"
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, v in series.items():
        sel = (np.asarray(x) > 0) & (np.asarray(v) > 0)
        ax.loglog(np.asarray(x)[sel], np.asarray(v)[sel], label=label)
    ax.set_xlabel("|y - y*|" if kind == "depletion" else "t")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_outputs(cfg: RunConfig, out: Outcome, plot: bool = False) -> Path:
    d = Path(cfg.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    h = cfg.hash
    stem = cfg.experiment.replace("-", "_")
    for name, rows in out.tables.items():
        with open(d / f"{stem}__{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEADERS[name])
            for r in rows:
                w.writerow([h] + [_fmt(v) for v in r])
    meta = {"config": cfg.to_dict(), "config_hash": h, "version": __version__,
            "results": out.meta, "checks": out.checks}
    with open(d / f"{stem}.meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    if plot and out.plot is not None:
        _write_plot(d / f"{stem}.svg", out.plot)
    return d


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def run(cfg: RunConfig, jobs: int = 1, plot: bool = False) -> Outcome:
    out = RUNNERS[cfg.experiment](cfg, jobs)
    write_outputs(cfg, out, plot)
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shearlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("config", nargs="?", help="JSON run config (defaults apply when omitted)")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--jobs", type=int, default=int(os.environ.get("CLL_JOBS", "1")))
        sp.add_argument("--assert", dest="assert_", action="store_true",
                        help="exit 1 if any acceptance threshold fails")
        sp.add_argument("--plot", action="store_true", help="also write an SVG plot")
        sp.add_argument("--k", help="comma-separated wavenumbers")
        sp.add_argument("--n", type=int, help="interior grid points")
        sp.add_argument("--lambda-grid", help="comma-separated spectral values")
        sp.add_argument("--eps-schedule", help="comma-separated regularisation values")
        sp.add_argument("--omega0", help="initial data kind (sine, sine_mode, bump) or a text file of samples")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def _numbers(text, kind, flag):
    try:
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def apply_overrides(raw: dict, args) -> dict:
    """Fold command-line flags into a raw config dictionary."""
    raw = dict(raw)
    if args.out:
        raw["output_dir"] = args.out
    if args.k:
        raw["k"] = _numbers(args.k, int, "--k")
    if args.n is not None:
        raw["n"] = args.n
    if args.lambda_grid:
        raw["lambda"] = {"values": _numbers(args.lambda_grid, float, "--lambda-grid")}
    if args.eps_schedule:
        raw["eps_schedule"] = _numbers(args.eps_schedule, float, "--eps-schedule")
    if args.omega0:
        if os.path.exists(args.omega0):
            raw["initial_data"] = {"kind": "file", "path": os.path.abspath(args.omega0)}
        else:
            raw["initial_data"] = {"kind": args.omega0}
    return raw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        raw = apply_overrides(load_config(args.config) if args.config else {}, args)
        cfg = RunConfig.from_dict(raw, args.experiment)
        out = run(cfg, args.jobs, args.plot)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ShearlabError as exc:
        print(f"{args.experiment} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    failed = [c for c in out.checks if not c["passed"]]
    for c in out.checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['detail']}")
    if args.assert_ and failed:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
