"""Seeded experiment runner: configs, instance construction, CSV output and replay."""
from __future__ import annotations

import csv
import hashlib
import io
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .dissipative_core import (format_matrix, parse_matrix, random_dissipative,
                               random_hermitian, random_unitary, trial_rng)
from .errors import (ConfigError, DissipertError, NotApplicable, ReplayCorrupt,
                     ShapeError)
from .function_spaces import (custom_table, freq_bump, log_family,
                              shifted_power, tone)
from .perturbation_lab import (THEOREMS, TOL_BOUND, BoundCheck,
                               PerturbationInstance, bound_check,
                               scaling_exponent)

CSV_COLUMNS = ["theorem_id", "n", "trial", "seed", "lhs", "rhs", "ratio",
               "passed", "slope", "residual"]
SUMMARY_COLUMNS = ["theorem_id", "checks", "passed", "failed", "deferred",
                   "max_ratio", "slope", "expected_slope", "slope_ok"]
SLOPE_TOL = 0.05
LIPSCHITZ_SLOPE_TOL = 0.02
HOLDER_SCALE = 1e8
FUNC_KINDS = ("tone", "freq_bump", "shifted_power", "custom_table", "log")


# ---------------------------------------------------------------------------
# YAML with line numbers
# ---------------------------------------------------------------------------

def _node_lines(node, prefix=(), out=None):
    out = {} if out is None else out
    out[prefix] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _node_lines(v, prefix + (k.value,), out)
            out.setdefault(prefix + (k.value,), k.start_mark.line + 1)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _node_lines(v, prefix + (i,), out)
    return out


def load_yaml(text, path=None):
    """Parse YAML and return (data, {key path: line})."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None, path=path) from exc
    lines = _node_lines(node) if node is not None else {}
    return data, lines


class _Checker:
    def __init__(self, lines, path):
        self.lines, self.path = lines, path

    def fail(self, key, message):
        key = tuple(key)
        while key and key not in self.lines:
            key = key[:-1]
        raise ConfigError(message, line=self.lines.get(key, 1), path=self.path)

    def number(self, data, key, default, positive=False, integer=False):
        val = data.get(key[-1], default) if isinstance(data, dict) else default
        try:
            val = int(val) if integer else float(val)
        except (TypeError, ValueError):
            self.fail(key, f"{'/'.join(map(str, key))} must be a number")
        if positive and val <= 0:
            self.fail(key, f"{'/'.join(map(str, key))} must be positive")
        return val


# ---------------------------------------------------------------------------
# Function specs
# ---------------------------------------------------------------------------

def function_from_spec(spec, check=None, where=("function",)):
    """Build a GridFunction from a mapping with a ``kind`` key."""
    check = check or _Checker({}, None)
    if not isinstance(spec, dict) or "kind" not in spec:
        check.fail(where, "function spec needs a 'kind'")
    kind = spec["kind"]
    grid = {k: spec[k] for k in ("half_width", "n_points") if k in spec}
    if "n_points" in grid:
        grid["n_points"] = int(grid["n_points"])
    if "half_width" in grid:
        grid["half_width"] = float(grid["half_width"])
    try:
        if kind == "tone":
            return tone(float(spec.get("sigma", 1.0)), complex(spec.get("coef", 1.0)), **grid)
        if kind == "freq_bump":
            lo, hi = (float(x) for x in spec.get("band", [0.5, 2.0]))
            return freq_bump(lo, hi, **grid)
        if kind == "shifted_power":
            return shifted_power(float(spec.get("alpha", spec.get("beta", 0.5))), **grid)
        if kind == "log":
            return log_family(float(spec.get("c", 1.0)), **grid)
        if kind == "custom_table":
            xi = [float(x) for x in spec["xi"]]
            vals = [complex(*v) if isinstance(v, (list, tuple)) else complex(v)
                    for v in spec["values"]]
            return custom_table(xi, vals, **grid)
    except KeyError as exc:
        check.fail(where, f"function spec missing key {exc}")
    except (TypeError, ValueError, DissipertError) as exc:
        check.fail(where, f"bad function spec: {exc}")
    check.fail(where + ("kind",), f"unknown function kind {kind!r}; expected one of {FUNC_KINDS}")


def function_spec_of(f):
    """Inverse of function_from_spec for the built-in families."""
    p = f.params
    if "beta" in p:
        return {"kind": "shifted_power", "alpha": float(p["beta"])}
    if "c" in p and "lipschitz" in p:
        return {"kind": "log", "c": float(p["c"])}
    if "band" in p:
        return {"kind": "freq_bump", "band": [float(x) for x in p["band"]]}
    if "sigma" in p:
        return {"kind": "tone", "sigma": float(p["sigma"])}
    raise ValueError(f"cannot serialize function {f.name}")


def load_funcspec(path):
    text = Path(path).read_text()
    data, lines = load_yaml(text, str(path))
    return function_from_spec(data, _Checker(lines, str(path)), ())


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

@dataclass
class SweepSpec:
    points: int = 9
    trials: int = 1
    t_min: float = None
    t_max: float = None
    scale: float = None


@dataclass
class ExperimentConfig:
    suite: list
    sizes: list = field(default_factory=lambda: [4])
    count: int = 16
    seed: int = 0
    kind: str = "strict"
    im_floor: float = 0.1
    function: dict = None
    scale: float = 0.5
    sigmas: list = field(default_factory=lambda: [0.5, 1.0, 4.0])
    a_values: list = field(default_factory=lambda: [0.1, 1.0, 10.0])
    betas: list = field(default_factory=lambda: [0.25, 0.5, 0.75])
    sweep: SweepSpec = None
    output: str = "dissipert_out"
    tol_bound: float = TOL_BOUND
    plots: bool = False
    save_instances: bool = False
    source: str = None


def parse_config(text, path=None, base_dir=None) -> ExperimentConfig:
    data, lines = load_yaml(text, path)
    ck = _Checker(lines, path)
    if not isinstance(data, dict):
        ck.fail((), "config must be a mapping")
    known = {"suite", "seed", "ensemble", "function", "perturbation", "sweep",
             "output", "tolerances", "plots", "save_instances", "families"}
    for key in data:
        if key not in known:
            ck.fail((key,), f"unknown key {key!r}")
    suite = data.get("suite")
    if suite == "all":
        suite = list(THEOREMS)
    if not isinstance(suite, list) or not suite:
        ck.fail(("suite",), "suite must be 'all' or a non-empty list of theorem ids")
    for i, t in enumerate(suite):
        if t not in THEOREMS:
            ck.fail(("suite", i), f"unknown theorem id {t!r}")
    ens = data.get("ensemble", {}) or {}
    if not isinstance(ens, dict):
        ck.fail(("ensemble",), "ensemble must be a mapping")
    sizes = ens.get("n", [4])
    sizes = sizes if isinstance(sizes, list) else [sizes]
    for i, s in enumerate(sizes):
        if not isinstance(s, int) or s < 1:
            ck.fail(("ensemble", "n", i) if isinstance(ens.get("n"), list) else ("ensemble", "n"),
                    "ensemble sizes must be positive integers")
    count = ck.number(ens, ("ensemble", "count"), 16, positive=True, integer=True)
    kind = ens.get("kind", "strict")
    if kind not in ("strict", "mixed", "self_adjoint"):
        ck.fail(("ensemble", "kind"), f"unknown ensemble kind {kind!r}")
    im_floor = ck.number(ens, ("ensemble", "im_floor"), 0.1)
    seed = ck.number(data, ("seed",), 0, integer=True)
    func = data.get("function")
    if func is not None:
        function_from_spec(func, ck, ("function",))
    pert = data.get("perturbation", {}) or {}
    scale = ck.number(pert, ("perturbation", "scale"), 0.5, positive=True)
    fam = data.get("families", {}) or {}
    lists = {}
    for key, default in (("sigmas", [0.5, 1.0, 4.0]), ("a_values", [0.1, 1.0, 10.0]),
                         ("betas", [0.25, 0.5, 0.75])):
        val = fam.get(key, default)
        if not isinstance(val, list) or not val:
            ck.fail(("families", key), f"{key} must be a non-empty list")
        try:
            lists[key] = [float(v) for v in val]
        except (TypeError, ValueError):
            ck.fail(("families", key), f"{key} must hold numbers")
    for b in lists["betas"]:
        if not 0 < b < 1:
            ck.fail(("families", "betas"), "betas must lie in (0, 1)")
    sweep = None
    if "sweep" in data and data["sweep"] is not None:
        sw = data["sweep"]
        if not isinstance(sw, dict):
            ck.fail(("sweep",), "sweep must be a mapping")
        sweep = SweepSpec(
            points=ck.number(sw, ("sweep", "points"), 9, positive=True, integer=True),
            trials=ck.number(sw, ("sweep", "trials"), 1, positive=True, integer=True),
            t_min=sw.get("t_min") and ck.number(sw, ("sweep", "t_min"), None, positive=True),
            t_max=sw.get("t_max") and ck.number(sw, ("sweep", "t_max"), None, positive=True),
            scale=sw.get("scale") and ck.number(sw, ("sweep", "scale"), None, positive=True))
        if sweep.points < 8:
            ck.fail(("sweep", "points"), "a sweep needs at least 8 points")
    tol = data.get("tolerances", {}) or {}
    tol_bound = ck.number(tol, ("tolerances", "tol_bound"), TOL_BOUND, positive=True)
    output = data.get("output", "dissipert_out")
    if base_dir is not None and not os.path.isabs(output):
        output = os.path.join(base_dir, output)
    return ExperimentConfig(suite=list(suite), sizes=sizes, count=count, seed=seed,
                            kind=kind, im_floor=im_floor, function=func, scale=scale,
                            sweep=sweep, output=output, tol_bound=tol_bound,
                            plots=bool(data.get("plots", False)),
                            save_instances=bool(data.get("save_instances", False)),
                            source=path, **lists)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", line=None, path=str(path)) from exc
    return parse_config(text, str(path), base_dir=str(p.parent))


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

_FAMILY_M = {"Kn": 2, "alfam": 2, "Lom": 2, "Spbe": 2, "SpBes": 2}
_P = {"spm": 2.0, "Spa": 2.0, "comSp": 2.0, "chsSp": 3.0, "Spbe": 2.0, "SpBes": 2.0}
_R_THEOREMS = {"sigma", "comH", "modne", "comSp"}
_LIPSCHITZ = {"ex", "sle", "sle_sa", "sigma", "HSLi"}


def _family_function(th, cfg, trial):
    family = THEOREMS[th].family
    if cfg.function is not None:
        f = function_from_spec(cfg.function)
        ok = {"tone": not f.has_smooth and len(f.atoms) == 1,
              "band_limited": f.closure is None and f.bounded and f.support is not None
              and math.isfinite(f.support[1]),
              "holder": "beta" in f.params, "log": "lipschitz" in f.params}[family]
        if ok:
            return f
    if family == "tone":
        return tone(cfg.a_values[trial % len(cfg.a_values)])
    if family == "band_limited":
        s = cfg.sigmas[trial % len(cfg.sigmas)]
        return freq_bump(s / 4, s)
    if family == "holder":
        return shifted_power(cfg.betas[trial % len(cfg.betas)])
    return log_family(1.0 + trial % 2)


def expected_slope(th, inst):
    if th in ("ex", "sle", "sle_sa", "sigma", "HSLi"):
        return 1.0
    if th in ("Kn", "spm", "SpBes"):
        return float(inst.m) if th != "SpBes" else float(inst.alpha or inst.m)
    if th == "chsSp":
        return None
    return float(inst.alpha if inst.alpha is not None else inst.f.params["beta"])


def build_instance(th, n, trial, cfg) -> PerturbationInstance:
    """Deterministic instance for (theorem, n, trial) from the master seed."""
    rng = trial_rng(cfg.seed * 1000003 + n, trial)
    f = _family_function(th, cfg, trial)
    m = _FAMILY_M.get(th, 1)
    p = _P.get(th, 2.0)
    kind = "self_adjoint" if th == "sle_sa" else cfg.kind
    if kind == "mixed" and n < 2:
        kind = "strict"
    L = random_dissipative(rng, n, kind, cfg.im_floor)
    if th in _R_THEOREMS:
        u = random_unitary(rng, n)
        base = u.conj().T @ L @ u
        d = random_hermitian(rng, n)
        d = cfg.scale * d / np.linalg.norm(d, 2)
        R = 2.0 * u
        return PerturbationInstance(L, base + d, f, R=R, m=1, p=p, base=base,
                                    direction=d, seed=cfg.seed, trial=trial)
    k = random_hermitian(rng, n)
    k = cfg.scale * k / np.linalg.norm(k, 2)
    alpha = None
    if th in ("alfam", "Lom", "Spbe"):
        alpha = float(f.params["beta"])
    return PerturbationInstance(L, L + m * k, f, m=m, p=p, alpha=alpha,
                                seed=cfg.seed, trial=trial)


def sweep_parameters(th, inst, spec: SweepSpec):
    """Default t range and direction scale per family."""
    family = THEOREMS[th].family
    if family == "holder":
        t_min, t_max, scale = 1e-4, 1.0, HOLDER_SCALE
        if th in ("Spa", "comSp", "chsSp"):
            t_min = 1e-3
    else:
        t_min, t_max, scale = 1e-4, 1e-1, 1.0
    if spec is not None:
        t_min = spec.t_min or t_min
        t_max = spec.t_max or t_max
        scale = spec.scale or scale
        points = spec.points
    else:
        points = 9
    return np.logspace(math.log10(t_min), math.log10(t_max), points), scale


def sweep_instance(th, inst, spec=None):
    ts, scale = sweep_parameters(th, inst, spec)
    base = inst.L if inst.base is None else inst.base
    direction = (inst.M - inst.L) if inst.direction is None else inst.direction
    direction = scale * direction / np.linalg.norm(direction, 2)
    swept = PerturbationInstance(inst.L, base + direction, inst.f, inst.R, inst.m, inst.p,
                                 inst.alpha, base, direction, inst.seed, inst.trial)
    return scaling_exponent(th, swept, ts)


def slope_tolerance(th):
    return LIPSCHITZ_SLOPE_TOL if th in _LIPSCHITZ else SLOPE_TOL


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _g(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")


def _passed(v):
    return "" if v is None else ("true" if v else "false")


def csv_rows(records):
    buf = io.StringIO(newline="")
    w = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r["theorem_id"], r["n"], r["trial"], r["seed"], _g(r["lhs"]),
                    _g(r["rhs"]), _g(r["ratio"]), _passed(r["passed"]),
                    _g(r.get("slope")), _g(r.get("residual"))])
    return buf.getvalue()


def _sha(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def save_instance(inst, th, directory, tol_bound=TOL_BOUND):
    """Write matrices and a manifest; returns the manifest path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    stem = f"{th}_n{inst.n}_t{inst.trial}".replace("*", "star")
    files = {}
    mats = {"L": inst.L, "M": inst.M}
    if inst.R is not None:
        mats["R"] = inst.R
    for key, a in mats.items():
        p = d / f"{stem}_{key}.txt"
        p.write_text(format_matrix(a))
        files[key] = {"path": p.name, "sha256": _sha(p)}
    manifest = {"theorem_id": th, "n": inst.n, "trial": inst.trial, "seed": inst.seed,
                "m": inst.m, "p": float(inst.p),
                "alpha": None if inst.alpha is None else float(inst.alpha),
                "function": function_spec_of(inst.f), "tol_bound": float(tol_bound),
                "files": files}
    path = d / f"{stem}.yaml"
    path.write_text(yaml.safe_dump(manifest, sort_keys=True))
    return path


def load_instance(path):
    p = Path(path)
    try:
        man = yaml.safe_load(p.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ReplayCorrupt(f"unreadable instance manifest: {exc}") from exc
    if not isinstance(man, dict) or "files" not in man:
        raise ReplayCorrupt("instance manifest lacks a file table")
    mats = {}
    for key, entry in man["files"].items():
        mp = p.parent / entry["path"]
        if not mp.exists() or _sha(mp) != entry["sha256"]:
            raise ReplayCorrupt(f"hash mismatch for matrix {key} ({mp.name})")
        try:
            mats[key] = parse_matrix(mp.read_text())
        except ShapeError as exc:
            raise ReplayCorrupt(f"matrix {key} unreadable: {exc}") from exc
    f = function_from_spec(man["function"])
    inst = PerturbationInstance(mats["L"], mats["M"], f, R=mats.get("R"), m=man["m"],
                                p=man["p"], alpha=man.get("alpha"), seed=man.get("seed"),
                                trial=man.get("trial"))
    return man, inst


def replay(path, tol_bound=None) -> BoundCheck:
    """Recompute a saved check; a tolerance override changes only the verdict."""
    man, inst = load_instance(path)
    tol = man.get("tol_bound", TOL_BOUND) if tol_bound is None else tol_bound
    return bound_check(man["theorem_id"], inst, tol)


def _plot(th, fits, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    for label, fit in fits:
        ax.loglog(fit.ts, fit.lhs, marker="o", label=f"{label}: slope {fit.slope:.3f}")
    ax.set_xlabel("t")
    ax.set_ylabel("lhs")
    ax.set_title(th)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


@dataclass
class RunReport:
    records: list
    summary: list
    failures: list
    output: Path
    sweeps: dict

    @property
    def exit_code(self):
        return 1 if self.failures else 0


def run(cfg: ExperimentConfig, sweep_only=False, log=None) -> RunReport:
    """Run every (theorem, n, trial) cell and write the report bundle."""
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    records, summary, failures, sweeps = [], [], [], {}
    for th in cfg.suite:
        rows, fits = [], []
        slopes = []
        exp_slope = None
        for n in cfg.sizes:
            trials = range(cfg.sweep.trials if (sweep_only and cfg.sweep) else
                           (1 if sweep_only else cfg.count))
            for trial in trials:
                try:
                    inst = build_instance(th, n, trial, cfg)
                except NotApplicable:
                    continue
                if sweep_only:
                    bc = None
                else:
                    try:
                        bc = bound_check(th, inst, cfg.tol_bound)
                    except NotApplicable:
                        continue
                row = {"theorem_id": th, "n": n, "trial": trial, "seed": cfg.seed,
                       "lhs": bc.lhs if bc else None, "rhs": bc.rhs if bc else None,
                       "ratio": bc.ratio if bc else None,
                       "passed": bc.passed if bc else None}
                want_sweep = sweep_only or (cfg.sweep is not None and trial < cfg.sweep.trials)
                if want_sweep:
                    fit = sweep_instance(th, inst, cfg.sweep)
                    row["slope"], row["residual"] = fit.slope, fit.residual
                    slopes.append(fit.slope)
                    exp_slope = expected_slope(th, inst)
                    ok = None if exp_slope is None else abs(fit.slope - exp_slope) <= slope_tolerance(th)
                    fits.append((f"n={n} trial={trial}", fit))
                    sweeps[(th, n, trial)] = (fit, exp_slope, ok)
                rows.append(row)
                if bc is not None and bc.passed is False:
                    man = save_instance(inst, th, out / "failures", cfg.tol_bound)
                    failures.append((bc, man))
                elif cfg.save_instances:
                    save_instance(inst, th, out / "instances", cfg.tol_bound)
                if log:
                    log(th, n, trial, bc)
        (out / f"{th.replace('*', 'star')}.csv").write_text(csv_rows(rows), newline="")
        records.extend(rows)
        ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
        slope_ok = [sweeps[k][2] for k in sweeps if k[0] == th]
        summary.append({
            "theorem_id": th, "checks": len(ratios),
            "passed": sum(r["passed"] is True for r in rows),
            "failed": sum(r["passed"] is False for r in rows),
            "deferred": sum(r["passed"] is None and r["ratio"] is not None for r in rows),
            "max_ratio": max(ratios) if ratios else None,
            "slope": float(np.mean(slopes)) if slopes else None,
            "expected_slope": exp_slope,
            "slope_ok": (None if not slope_ok or any(s is None for s in slope_ok)
                         else all(slope_ok))})
        if cfg.plots and fits:
            _plot(th, fits, out / f"{th.replace('*', 'star')}.svg")
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(SUMMARY_COLUMNS)
    for s in summary:
        w.writerow([s["theorem_id"], s["checks"], s["passed"], s["failed"], s["deferred"],
                    _g(s["max_ratio"]), _g(s["slope"]), _g(s["expected_slope"]),
                    _passed(s["slope_ok"])])
    (out / "summary.csv").write_text(buf.getvalue(), newline="")
    return RunReport(records, summary, failures, out, sweeps)
