"""JSON-configured experiments: direct solves, RG flows, certificates, oracle checks, sweeps."""

from __future__ import annotations

import copy
import hashlib
import itertools
import json
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import estimate_A, fit_decay_exponent, profile_distance
from .certificates import basin_check
from .errors import ConfigError, InvalidHypothesis, ParseError, RGFlowError, ValidationError
from .problem import classify_criticality, spec_from_dict
from .rg import fixed_point_profile, original_slice, rg_flow
from .solver import SolverConfig, etd_evolve, evolve_long, linear_solve, oracle_solve
from .spectral import Grid, Profile, bq_norm, sample, to_spectrum

MODES = ("direct", "rg", "certify", "oracle-compare", "sweep")
SWEEP_AXES = ("p", "alpha", "lambda", "q", "a", "beta", "amplitude", "sigma", "L")

DEFAULTS = {
    "grid": {"X": 40.0, "N": 4096},
    "mode": "rg",
    "L": 2.0,
    "steps": 12,
    "solver": {"substeps": 16, "picard_tol": 1e-10, "picard_max_iters": 50, "rho_guard": None},
    "output_dir": "rgflow_out",
    "initial": {"kind": "gaussian", "amplitude": 0.01, "sigma": 1.0, "center": 0.0},
    "t_final": 256.0,
    "fit_window": None,
    "delta": None,
    "rho0": None,
    "strict": False,
    "max_window": 2.0,
    "sweep": None,
    "assertions": [],
}
TOP_KEYS = set(DEFAULTS) | {"spec"}
SOLVER_KEYS = set(DEFAULTS["solver"])
GRID_KEYS = {"X", "N"}
SWEEP_KEYS = {"axes", "mode"}
ASSERT_OPS = {"<": lambda a, b: a < b, "<=": lambda a, b: a <= b, ">": lambda a, b: a > b,
              ">=": lambda a, b: a >= b, "==": lambda a, b: a == b}


@dataclass
class ExperimentConfig:
    raw: dict
    spec: object
    grid: Grid
    solver: SolverConfig
    initial: Profile

    @property
    def mode(self):
        return self.raw["mode"]

    def to_dict(self):
        return copy.deepcopy(self.raw)

    def content_hash(self):
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class RunReport:
    config: dict
    config_hash: str
    mode: str
    payload: dict
    artifacts: list
    wall_time: float
    assertions: list = field(default_factory=list)
    error: str = None

    @property
    def passed(self):
        return self.error is None and all(a["passed"] for a in self.assertions)

    def to_dict(self):
        return {"config": self.config, "config_hash": self.config_hash, "mode": self.mode,
                "payload": self.payload, "artifacts": self.artifacts, "wall_time": self.wall_time,
                "assertions": self.assertions, "passed": self.passed, "error": self.error}


# -- loading -------------------------------------------------------------------------

def _check_keys(d, allowed, prefix):
    if not isinstance(d, dict):
        raise ValidationError(prefix.rstrip("."), "expected an object")
    for k in d:
        if k not in allowed:
            raise ValidationError(prefix + k, "unknown field")


def resolve_config(data):
    """Validate a parsed config document, fill defaults, build typed pieces."""
    _check_keys(data, TOP_KEYS, "")
    if "spec" not in data:
        raise ValidationError("spec", "missing required field")
    raw = copy.deepcopy(DEFAULTS)
    for k, v in data.items():
        if k in ("grid", "solver") and v is not None:
            _check_keys(v, GRID_KEYS if k == "grid" else SOLVER_KEYS, k + ".")
            raw[k].update(v)
        else:
            raw[k] = copy.deepcopy(v)
    if raw["mode"] not in MODES:
        raise ValidationError("mode", f"must be one of {MODES}")
    try:
        spec = spec_from_dict(raw["spec"])
    except InvalidHypothesis as exc:
        fld = exc.field.split(".")[0] if exc.field else None
        raise InvalidHypothesis(exc.label, str(exc).split(": ", 1)[-1], f"spec.{fld}" if fld else "spec") from None
    except (KeyError, TypeError) as exc:
        raise ValidationError("spec", f"malformed spec ({exc})") from None
    try:
        grid = Grid(float(raw["grid"]["X"]), int(raw["grid"]["N"]))
    except ValueError as exc:
        raise ValidationError("grid", str(exc)) from None
    try:
        solver = SolverConfig(**raw["solver"])
    except (TypeError, ValueError) as exc:
        raise ValidationError("solver", str(exc)) from None
    try:
        initial = Profile.from_dict(raw["initial"])
    except (TypeError, ValueError) as exc:
        raise ValidationError("initial", str(exc)) from None
    if not float(raw["L"]) > 1:
        raise ValidationError("L", "must exceed 1")
    if int(raw["steps"]) < 1:
        raise ValidationError("steps", "must be >= 1")
    if raw["mode"] == "sweep":
        sw = raw["sweep"]
        if not sw or "axes" not in sw:
            raise ValidationError("sweep.axes", "sweep mode needs axes")
        _check_keys(sw, SWEEP_KEYS, "sweep.")
        for ax, vals in sw["axes"].items():
            if ax not in SWEEP_AXES:
                raise ValidationError(f"sweep.axes.{ax}", "unknown axis")
            if not isinstance(vals, list) or not vals:
                raise ValidationError(f"sweep.axes.{ax}", "axis must be a non-empty list")
        if sw.get("mode", "direct") not in ("direct", "rg"):
            raise ValidationError("sweep.mode", "must be 'direct' or 'rg'")
    for i, a in enumerate(raw["assertions"]):
        if set(a) != {"metric", "op", "value"} or a["op"] not in ASSERT_OPS:
            raise ValidationError(f"assertions[{i}]", "need metric, op (<,<=,>,>=,==) and value")
    return ExperimentConfig(raw, spec, grid, solver, initial)


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return resolve_config(data)


# -- modes ---------------------------------------------------------------------------

def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x)}")


def _finite(x):
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else x


def _fit_or_none(series, window):
    try:
        return fit_decay_exponent(series, window=None if window is None else tuple(window))
    except RGFlowError:
        return None


def _mode_direct(cfg, out):
    f = sample(cfg.initial, cfg.grid)
    tf = float(cfg.raw["t_final"])
    traj = evolve_long(f, cfg.spec, tf, cfg.solver)
    traj.to_csv(os.path.join(out, "trajectory.csv"))
    fit = _fit_or_none(list(zip(traj.times, traj.sup_abs)), cfg.raw["fit_window"])
    try:
        A = estimate_A(traj)
    except RGFlowError:
        A = float(traj.mass[-1])
    dist = profile_distance(traj.final, tf, cfg.spec.p, A, cfg.spec.q, cfg.grid) if tf > 1 else None
    payload = {"t_final": tf, "final_mass": float(traj.mass[-1]), "A_estimate": A,
               "final_sup": float(traj.sup_abs[-1]), "profile_distance": dist, "final_g_norm": dist,
               "gamma_est": fit.gamma_est if fit else None, "gamma_stderr": fit.stderr if fit else None,
               "fit_window": list(fit.window) if fit else None, "regrids": traj.info["regrids"]}
    if fit:
        fit.plot_csv(list(zip(traj.times, traj.sup_abs)), os.path.join(out, "decay_fit.csv"))
    return payload, ["trajectory.csv"] + (["decay_fit.csv"] if fit else [])


def _mode_rg(cfg, out, strict):
    f = sample(cfg.initial, cfg.grid)
    L = float(cfg.raw["L"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr = rg_flow(f, cfg.spec, L, int(cfg.raw["steps"]), cfg.solver, strict=strict,
                     max_window=float(cfg.raw["max_window"]))
    tr.to_csv(os.path.join(out, "rg_trace.csv"))
    tr.amplitude_csv(os.path.join(out, "amplitude.csv"))
    tr.to_json(os.path.join(out, "rg_trace.json"))
    series = tr.amplitude_series()
    fit = _fit_or_none(series, cfg.raw["fit_window"]) if len(series) >= 8 else None
    try:
        A = estimate_A(tr)
    except RGFlowError:
        A = tr.A_limit_estimate
    last = tr.steps[-1]
    if last.n > 0:
        u_t, t = original_slice(last.f_n, last.n, L, cfg.spec.p)
        dist = profile_distance(u_t, t, cfg.spec.p, last.A_n, cfg.spec.q, cfg.grid)
    else:
        dist = None
    g = tr.g_norms
    payload = {"steps_completed": last.n, "halted": tr.halted, "A_limit_estimate": tr.A_limit_estimate,
               "A_extrapolated": A, "final_g_norm": float(g[-1]), "g_norm": g.tolist(),
               "g_decreasing_from_2": bool(np.all(np.diff(g[2:]) < 0)) if g.size > 3 else None,
               "all_admissible": all(s.admissible for s in tr.steps), "profile_distance": dist,
               "gamma_est": fit.gamma_est if fit else None, "gamma_stderr": fit.stderr if fit else None}
    return payload, ["rg_trace.csv", "amplitude.csv", "rg_trace.json"]


def _mode_certify(cfg, out):
    f = sample(cfg.initial, cfg.grid)
    b = basin_check(f, cfg.spec, float(cfg.raw["L"]), cfg.raw["delta"], cfg.raw["rho0"])
    b.to_json(os.path.join(out, "certificate.json"))
    with open(os.path.join(out, "certificate.txt"), "w") as fh:
        fh.write(b.pretty() + "\n")
    payload = {k: _finite(v) for k, v in b.to_dict().items() if k not in ("eps_n", "G_n")}
    payload["failed"] = b.failed()
    return payload, ["certificate.json", "certificate.txt"]


def _mode_oracle(cfg, out):
    f = sample(cfg.initial, cfg.grid)
    tf = float(cfg.raw["t_final"])
    fine = Grid(cfg.grid.X, 2 * cfg.grid.N)
    spectral = etd_evolve(f, cfg.spec, 1.0, tf, cfg.solver).final
    oracle = oracle_solve(cfg.initial, cfg.spec, tf, fine, cfg=cfg.solver)
    diff = float(np.abs(oracle.values[::2] - spectral.values).max())
    payload = {"t_final": tf, "max_sup_diff": diff, "oracle_mass": oracle.mass, "spectral_mass": spectral.mass}
    if cfg.spec.lam == 0:
        payload["linear_vs_etd"] = float(np.abs(linear_solve(f, cfg.spec, tf).values - spectral.values).max())
    with open(os.path.join(out, "oracle_compare.csv"), "w") as fh:
        fh.write("x,spectral,oracle\n")
        for x, a, b in zip(cfg.grid.x, spectral.values, oracle.values[::2]):
            fh.write(f"{float(x)!r},{float(a)!r},{float(b)!r}\n")
    return payload, ["oracle_compare.csv"]


def _point_raw(base, assignment):
    raw = copy.deepcopy(base)
    spec = raw["spec"]
    spec["exploratory"] = True
    for ax, val in assignment.items():
        if ax in ("p", "lambda", "q"):
            spec[ax] = val
        elif ax == "alpha":
            coeffs = spec["coefficients"]
            lead = coeffs[0][1] if coeffs else 1.0
            spec["coefficients"] = [[val, lead]]
            spec["min_degree"] = None
        elif ax in ("a", "beta"):
            spec["c_form"] = "perturbed_power"
            params = dict(spec.get("c_params") or {"a": 0.0, "beta": 1.0})
            params[ax] = val
            spec["c_params"] = params
        elif ax in ("amplitude", "sigma"):
            raw["initial"][ax] = val
        elif ax == "L":
            raw["L"] = val
    raw["mode"] = base["sweep"].get("mode", "direct")
    raw["sweep"] = None
    raw["assertions"] = []
    return raw


def _mode_sweep(cfg, out, threads, strict):
    axes = cfg.raw["sweep"]["axes"]
    names = list(axes)
    points = [dict(zip(names, combo)) for combo in itertools.product(*(axes[n] for n in names))]

    def one(i_point):
        i, point = i_point
        sub = os.path.join(out, f"point_{i:03d}")
        os.makedirs(sub, exist_ok=True)
        raw = _point_raw(cfg.raw, point)
        raw["output_dir"] = sub
        try:
            pc = resolve_config(raw)
            rep = run(pc, out_dir=sub, strict=strict)
        except Exception as exc:  # isolate every point
            rep = RunReport(raw, "", raw["mode"], {}, [], 0.0, [], f"{type(exc).__name__}: {exc}")
        tag = None
        basin = False
        try:
            pc = resolve_config(raw)
            tag = classify_criticality(pc.spec).tag
            if tag == "Supercritical":
                basin = basin_check(sample(pc.initial, pc.grid), pc.spec, float(raw["L"])).basin_ok
        except (RGFlowError, ValueError):
            pass
        return point, tag, basin, rep

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(one, enumerate(points)))
    rows = []
    for point, tag, basin, rep in results:
        rows.append({**{n: point[n] for n in names}, "criticality": tag,
                     "gamma_est": rep.payload.get("gamma_est"), "final_g_norm": rep.payload.get("final_g_norm"),
                     "basin_ok": basin, "error": rep.error})
    with open(os.path.join(out, "sweep.csv"), "w") as fh:
        cols = names + ["criticality", "gamma_est", "final_g_norm", "basin_ok", "error"]
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(",".join(_csv_cell(r[c]) for c in cols) + "\n")
    payload = {"points": rows, "n_points": len(rows), "n_failed": sum(r["error"] is not None for r in rows)}
    return payload, ["sweep.csv"], [rep for *_, rep in results]


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v).replace(",", ";")


def _evaluate(assertions, payload):
    out = []
    for a in assertions:
        val = payload.get(a["metric"])
        ok = val is not None and bool(ASSERT_OPS[a["op"]](val, a["value"]))
        out.append({**a, "observed": val, "passed": ok})
    return out


def output_dir_for(cfg, override=None):
    """--out beats RGFLOW_OUT beats the config's output_dir."""
    return override or os.environ.get("RGFLOW_OUT") or cfg.raw["output_dir"]


def run(cfg, out_dir=None, strict=None, threads=1, mode=None):
    """Execute one experiment and write its artifacts plus report.json."""
    if mode is not None and mode != cfg.mode:
        raw = dict(cfg.raw, mode=mode)
        cfg = resolve_config(raw)
    strict = bool(cfg.raw["strict"]) if strict is None else strict
    out = output_dir_for(cfg, out_dir)
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    error = None
    sub_reports = None
    try:
        if cfg.mode == "direct":
            payload, files = _mode_direct(cfg, out)
        elif cfg.mode == "rg":
            payload, files = _mode_rg(cfg, out, strict)
        elif cfg.mode == "certify":
            payload, files = _mode_certify(cfg, out)
        elif cfg.mode == "oracle-compare":
            payload, files = _mode_oracle(cfg, out)
        else:
            payload, files, sub_reports = _mode_sweep(cfg, out, threads, strict)
    except RGFlowError as exc:
        payload, files, error = {}, [], f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - t0
    checks = _evaluate(cfg.raw["assertions"], payload) if error is None else []
    rep = RunReport(cfg.to_dict(), cfg.content_hash(), cfg.mode, payload, files, wall, checks, error)
    _write_json(os.path.join(out, "report.json"), rep.to_dict())
    if sub_reports is not None:
        rep.sub_reports = sub_reports
    return rep


def sweep(cfg, out_dir=None, threads=1, strict=None):
    """Run a sweep config and return the per-point reports."""
    if cfg.mode != "sweep":
        raise ConfigError("config mode is not 'sweep'")
    rep = run(cfg, out_dir, strict, threads)
    return getattr(rep, "sub_reports", [])
