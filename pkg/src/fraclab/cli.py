"""Batch front end: ``fraclab <task> [flags]``.

Configuration is a key=value document with bracketed sections; keys before
the first section (or in ``[run]``) are common, the section named after the
task holds task parameters.  Every key has a flag of the same name; flags
override the file, and ``FRACLAB_SEED`` is the lowest-precedence seed.

CSV reports start with ``# fraclab v<version> schema=<task>:<n>``; JSON
reports have the keys task, inputs, outputs, diagnostics and versions.  The
exit status is 0 iff every check of the task is within tolerance.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import platform
import re
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .errors import DivergenceError, DomainError, FraclabError, SingularValue
from .special import FracOrder

TASKS = ("constants", "eval", "kernel", "verify-poly", "verify-identity", "converge", "wos")

SCHEMAS = {
    "constants": (1, ["name", "value"]),
    "eval": (1, ["field", "x", "value", "error_estimate", "diverging", "expected"]),
    "kernel": (1, ["name", "x", "y", "value", "singular"]),
    "verify-poly": (1, ["index", "polynomial", "residual"]),
    "verify-identity": (1, ["which", "lhs", "rhs", "abs_gap", "rel_gap", "constant_mode"]),
    "converge": (1, ["study", "N", "s", "eps", "sup_error", "l1s_error", "fitted_rate"]),
    "wos": (1, ["estimate", "std_error", "mean_steps", "capped_fraction", "reference", "z_score"]),
}
DEFAULT_FORMAT = {
    "constants": "json", "eval": "csv", "kernel": "csv", "verify-poly": "csv",
    "verify-identity": "json", "converge": "csv", "wos": "json",
}


class ConfigError(DomainError):
    """Invalid configuration; ``key`` is the offending key path."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(*options: str) -> Callable[[str], str]:
    def conv(text):
        t = str(text).strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {t!r}")
        return t

    return conv


COMMON: dict[str, tuple[Callable, Any]] = {
    "task": (_choice(*TASKS), None),
    "N": (int, None),
    "s": (float, None),
    "seed": (int, None),
    "jobs": (int, 1),
    "out": (str, None),
    "format": (_choice("csv", "json"), None),
}

PARAMS: dict[str, dict[str, tuple[Callable, Any]]] = {
    "constants": {},
    "eval": {
        "field": (_choice("cos", "P_s", "Q_s", "R_s", "power"), "cos"),
        "xi": (_floats, None),
        "phase": (float, 0.0),
        "power": (float, 1.0),
        "x": (_floats, None),
        "eps": (float, None),
        "R": (float, None),
        "levels": (int, None),
        "method": (_choice("pv", "symmetrized"), "pv"),
        "preset": (_choice("default", "fast"), "default"),
        "tol": (float, 1e-3),
    },
    "kernel": {
        "name": (_choice("green_ball", "green_halfspace", "poisson_ball", "poisson_halfspace", "fundamental_ps", "Q_s", "R_s"), None),
        "x": (_floats, None),
        "y": (_floats, None),
        "r": (float, 1.0),
        "norm-mode": (_choice("paper", "probabilistic"), "probabilistic"),
    },
    "verify-poly": {
        "m": (int, None),
        "eps": (_floats, (0.5, 0.1, 0.01)),
    },
    "verify-identity": {
        "which": (_choice("ps", "qs", "rs"), "ps"),
        "center": (_floats, None),
        "radius": (float, 1.0),
        "kind": (_choice("exponential", "polynomial"), "exponential"),
        "cs-mode": (_choice("derived", "paper", "weak"), "derived"),
        "k-mode": (_choice("paper", "weak"), "paper"),
        "budget": (_choice("default", "small", "refined"), "default"),
    },
    "converge": {
        "study": (_choice("green", "poisson", "layer_mu", "layer_nu"), "green"),
        "grid": (_floats, (1e-1, 1e-2, 1e-3, 1e-4)),
        "lo": (_floats, None),
        "hi": (_floats, None),
        "l1s": (_bool, True),
        "norm-mode": (_choice("paper", "probabilistic"), "paper"),
    },
    "wos": {
        "x": (_floats, None),
        "g": (_choice("const", "box"), "box"),
        "value": (float, 1.0),
        "box-lo": (_floats, None),
        "box-hi": (_floats, None),
        "walks": (int, 100_000),
        "max-steps": (int, 10_000),
    },
}


@dataclass(frozen=True)
class RunConfig:
    task: str
    order: FracOrder | None
    params: dict
    out: str | None
    format: str
    seed: int
    jobs: int
    inputs: dict = field(default_factory=dict)


def _read_document(text: str) -> tuple[dict, dict]:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str  # keys are case sensitive (N vs n)
    body = text if text.lstrip().startswith("[run]") else "[run]\n" + text
    try:
        cp.read_string(body)
    except configparser.Error as exc:
        raise ConfigError("<document>", str(exc)) from None
    common = dict(cp["run"]) if cp.has_section("run") else {}
    sections = {name: dict(cp[name]) for name in cp.sections() if name != "run"}
    return common, sections


def _convert(key: str, conv: Callable, raw) -> Any:
    if raw is None:
        return None
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, f"type mismatch ({exc})") from None


def parse_config(text: str | None = None, flags: dict | None = None, env: dict | None = None) -> RunConfig:
    """Merge a configuration document with flag values into a validated RunConfig."""
    env = os.environ if env is None else env
    common_raw, sections = _read_document(text) if text else ({}, {})
    flags = {k: v for k, v in (flags or {}).items() if v is not None}
    for key in common_raw:
        if key not in COMMON:
            if not any(key in p for p in PARAMS.values()):
                raise ConfigError(f"run.{key}", "unknown key")
    task = flags.get("task") or common_raw.get("task")
    if task is None:
        raise ConfigError("run.task", "missing task")
    task = _convert("run.task", COMMON["task"][0], task)
    for name in sections:
        if name not in PARAMS:
            raise ConfigError(name, "unknown section")
    schema = PARAMS[task]
    file_params = dict(sections.get(task, {}))
    # task keys may also sit at top level of the document
    for key, val in common_raw.items():
        if key in schema:
            file_params.setdefault(key, val)
        elif key not in COMMON:
            raise ConfigError(f"run.{key}", f"unknown key for task {task}")
    for key in file_params:
        if key not in schema:
            raise ConfigError(f"{task}.{key}", "unknown key")
    for key in flags:
        if key not in COMMON and key not in schema:
            raise ConfigError(f"--{key}", f"unknown flag for task {task}")

    def pick(key, conv, default, where):
        if key in flags:
            return _convert(f"--{key}", conv, flags[key])
        if key in where:
            return _convert(f"{task if where is file_params else 'run'}.{key}", conv, where[key])
        return default

    common = {k: pick(k, conv, d, common_raw) for k, (conv, d) in COMMON.items() if k != "task"}
    params = {k: pick(k, conv, d, file_params) for k, (conv, d) in schema.items()}
    seed = common["seed"]
    if seed is None:
        env_seed = env.get("FRACLAB_SEED")
        seed = _convert("FRACLAB_SEED", int, env_seed) if env_seed is not None else 0
    if not 0 <= seed < 2**64:
        raise ConfigError("seed", "must be a 64-bit unsigned integer")
    if common["jobs"] is None or common["jobs"] < 1:
        raise ConfigError("jobs", "must be a positive integer")
    order = _validate(task, common, params)
    fmt = common["format"] or DEFAULT_FORMAT[task]
    inputs = {"task": task, "N": common["N"], "s": common["s"], "seed": seed, **{k: v for k, v in params.items()}}
    return RunConfig(task, order, params, common["out"], fmt, int(seed), int(common["jobs"]), inputs)


def _need(params: dict, key: str, task: str):
    if params.get(key) is None:
        raise ConfigError(f"{task}.{key}", "required")
    return params[key]


def _validate(task: str, common: dict, params: dict) -> FracOrder | None:
    N, s = common["N"], common["s"]
    if task == "verify-poly":
        if N is None:
            raise ConfigError("run.N", "required")
        _need(params, "m", task)
        if params["m"] < 0:
            raise ConfigError(f"{task}.m", "must be nonnegative")
        s = 0.5 if s is None else s
    if N is None:
        raise ConfigError("run.N", "required")
    if s is None:
        raise ConfigError("run.s", "required")
    recurrent = task in ("eval", "verify-poly")
    try:
        order = FracOrder(N, s, allow_log=True, allow_recurrent=recurrent)
    except DomainError as exc:
        raise ConfigError("run.s" if "s " in str(exc) or "s=" in str(exc) else "run.N", str(exc)) from None

    def point(key, required=True):
        v = params.get(key)
        if v is None:
            if required:
                raise ConfigError(f"{task}.{key}", "required")
            return None
        if len(v) != N:
            raise ConfigError(f"{task}.{key}", f"needs {N} components, got {len(v)}")
        return v

    if task == "eval":
        point("x")
        if params["field"] == "cos":
            point("xi")
        if params["eps"] is not None and not 0 < params["eps"] < 1:
            raise ConfigError("eval.eps", "must lie in (0, 1)")
        if params["R"] is not None and not params["R"] > 1:
            raise ConfigError("eval.R", "must exceed 1")
    elif task == "kernel":
        _need(params, "name", task)
        point("x")
        if params["name"] not in ("fundamental_ps", "Q_s", "R_s"):
            point("y")
        if not params["r"] > 0:
            raise ConfigError("kernel.r", "must be positive")
    elif task == "verify-identity":
        if N > 2:
            raise ConfigError("run.N", "identity checks run for N = 1 or 2")
        c = params["center"] if params["center"] is not None else (0.0,) * N
        if len(c) != N:
            raise ConfigError(f"{task}.center", f"needs {N} components")
        params["center"] = tuple(c)
        if not params["radius"] > 0:
            raise ConfigError(f"{task}.radius", "must be positive")
    elif task == "converge":
        g = params["grid"]
        if len(g) < 3 or any(v <= 0 for v in g) or any(a <= b for a, b in zip(g[:-1], g[1:])):
            raise ConfigError("converge.grid", "needs at least three strictly decreasing positive values")
        for key in ("lo", "hi"):
            if params[key] is not None and len(params[key]) != N:
                raise ConfigError(f"converge.{key}", f"needs {N} components")
        if params["lo"] is not None and params["lo"][0] <= 0:
            raise ConfigError("converge.lo", "box must lie in x_1 > 0")
    elif task == "wos":
        x = point("x")
        if x[0] <= 0:
            raise ConfigError("wos.x", "must satisfy x_1 > 0")
        if params["g"] == "box":
            lo, hi = point("box-lo"), point("box-hi")
            if hi[0] > 0 or any(a >= b for a, b in zip(lo, hi)):
                raise ConfigError("wos.box-hi", "box must satisfy lo < hi inside y_1 <= 0")
        if params["walks"] < 2 or params["max-steps"] < 1:
            raise ConfigError("wos.walks", "need at least two walks and one step")
    return order


# ------------------------------------------------------------------ tasks


@dataclass
class TaskResult:
    ok: bool
    outputs: dict
    diagnostics: dict
    rows: list[dict]


def _task_constants(cfg: RunConfig) -> TaskResult:
    from .identities import cs_ratio_numeric
    from .special import boundary_layer_constants, constants_for

    o = cfg.order
    consts = constants_for(o).as_dict()
    outputs = dict(consts)
    diag: dict = {"C_s_paper_over_derived": consts["C_s_paper"] / consts["C_s_derived"]}
    ok = True
    if o.N >= 2:
        ratio = cs_ratio_numeric(o.N, o.s)
        C1, C2 = boundary_layer_constants(o, consts["K_s_paper"])
        outputs.update(C1=C1, C2=C2, cs_ratio_numeric=ratio)
        diag["cs_ratio_minus_derived"] = ratio - consts["C_s_derived"]
        ok = abs(ratio - consts["C_s_derived"]) <= 1e-6
    rows = [{"name": k, "value": v} for k, v in outputs.items()]
    return TaskResult(ok, outputs, diag, rows)


def _task_eval(cfg: RunConfig) -> TaskResult:
    from .pvlap import (
        QuadratureSpec,
        cosine_field,
        power_field,
        profile_field,
        fundamental_field,
        pv_frac_lap,
        symmetrized_frac_lap,
    )

    o, p = cfg.order, cfg.params
    x = np.asarray(p["x"])
    kw = {}
    if p["eps"] is not None:
        kw["eps_inner"] = p["eps"]
    if p["R"] is not None:
        kw["R_outer"] = p["R"]
    if p["levels"] is not None:
        kw["levels"] = p["levels"]
    base = QuadratureSpec.fast() if p["preset"] == "fast" else QuadratureSpec()
    spec = replace(base, tol=min(base.tol, p["tol"]), **kw)
    expected = None
    if p["field"] == "cos":
        xi = np.asarray(p["xi"])
        u = cosine_field(xi, p["phase"])
        expected = float(np.linalg.norm(xi) ** (2 * o.s) * math.cos(float(xi @ x) + p["phase"]))
    elif p["field"] == "P_s":
        u = fundamental_field(o)
        expected = 0.0 if x[0] > 0 else None
    elif p["field"] in ("Q_s", "R_s"):
        u = profile_field(o, p["field"], o.N)
        expected = 0.0 if x[0] > 0 else None
    else:
        u = power_field(o.N, p["power"])
    fn = pv_frac_lap if p["method"] == "pv" else symmetrized_frac_lap
    r = fn(o, u, x, spec)
    diag = {"diverging": r.diverging, "budget": r.budget, "annulus_values": r.annulus_values, "extrapolated": r.extrapolated}
    ok = not r.diverging
    if ok and expected is not None:
        scale = max(abs(expected), abs(float(u(x[None, :])[0])), 1.0) if expected == 0.0 else abs(expected)
        err = abs(r.value - expected) / scale if scale > 0 else abs(r.value)
        diag["relative_error"] = err
        ok = err <= p["tol"]
    row = {"field": u.name, "x": list(x), "value": r.value, "error_estimate": r.error_estimate, "diverging": r.diverging, "expected": expected}
    return TaskResult(ok, {"value": r.value, "error_estimate": r.error_estimate, "expected": expected}, diag, [row])


def _task_kernel(cfg: RunConfig) -> TaskResult:
    from . import kernels as K

    o, p = cfg.order, cfg.params
    x = np.asarray(p["x"])
    y = np.asarray(p["y"]) if p["y"] is not None else None
    name = p["name"]
    mode = K.NormMode.coerce(p["norm-mode"])
    if name == "green_ball":
        v = K.green_ball(o, x, y, p["r"])
    elif name == "green_halfspace":
        v = K.green_halfspace(o, x, y)
    elif name == "poisson_ball":
        v = K.poisson_ball(o, x, y, p["r"], mode)
    elif name == "poisson_halfspace":
        v = K.poisson_halfspace(o, x, y, mode)
    elif name == "fundamental_ps":
        v = K.fundamental_ps(o, x)
    else:
        v = K.boundary_profile(o, x, name)
    singular = isinstance(v, SingularValue)
    diag = {"singular": singular}
    if singular:
        diag["reason"] = v.reason
    value = math.inf if singular else float(v)
    row = {"name": name, "x": list(x), "y": None if y is None else list(y), "value": value, "singular": singular}
    return TaskResult(not singular, {"value": value}, diag, [row])


def _task_verify_poly(cfg: RunConfig) -> TaskResult:
    from .harmonics import annulus_frac_lap_poly, harmonic_basis, harmonic_dim

    o, p = cfg.order, cfg.params
    N, m = o.N, p["m"]
    basis = harmonic_basis(N, m)
    # rational points keep the harmonic residual exact
    pts = [[Fraction(0)] * N, [Fraction(3, 10) - Fraction(i, 4) for i in range(N)],
           [Fraction(-7, 10) + Fraction(9, 10) * i for i in range(N)]]
    rows = []
    worst = 0.0
    for i, poly in enumerate(basis):
        res = max(abs(annulus_frac_lap_poly(o, poly, xx, e)) for xx in pts for e in p["eps"])
        worst = max(worst, res)
        rows.append({"index": i, "polynomial": repr(poly), "residual": res})
    dim_ok = len(basis) == harmonic_dim(N, m)
    ok = dim_ok and worst == 0.0
    outputs = {"basis_size": len(basis), "expected_size": harmonic_dim(N, m), "max_residual": worst}
    return TaskResult(ok, outputs, {"dimension_match": dim_ok}, rows)


def _task_verify_identity(cfg: RunConfig) -> TaskResult:
    from . import identities as I

    o, p = cfg.order, cfg.params
    bump = I.BumpSpec(p["center"], p["radius"], p["kind"])
    phi = I.make_test_function(bump, o.s)
    budget = {"default": I.IdentityBudget(), "small": I.IdentityBudget.small(), "refined": I.IdentityBudget().refined()}[p["budget"]]
    if p["which"] == "ps":
        rep = I.check_identity_ps(o, phi, budget, constant_mode=p["k-mode"])
        ok = rep.rel_gap <= 0.05
    elif p["which"] == "qs":
        rep = I.check_identity_qs(o, phi, p["cs-mode"], budget)
        ok = rep.rel_gap <= 0.05
    else:
        rep = I.check_identity_rs(o, phi, budget)
        ok = rep.abs_gap <= 0.01 * phi.psi_sup
    outputs = {
        "lhs": rep.lhs, "rhs": rep.rhs, "abs_gap": rep.abs_gap, "rel_gap": rep.rel_gap,
        "constant_mode": rep.constant_mode, "alternatives": rep.alternatives,
    }
    diag = dict(rep.budgets)
    diag["xs_check_ok"] = bool(phi.xs_check.ok) if phi.xs_check else None
    row = {"which": p["which"], **{k: outputs[k] for k in ("lhs", "rhs", "abs_gap", "rel_gap", "constant_mode")}}
    return TaskResult(ok and bool(diag["xs_check_ok"]), outputs, diag, [row])


def _task_converge(cfg: RunConfig) -> TaskResult:
    from . import limits as L
    from .kernels import NormMode

    o, p = cfg.order, cfg.params
    box = L.CompactBox(p["lo"], p["hi"]) if p["lo"] is not None and p["hi"] is not None else L.CompactBox.default(o.N)
    study = p["study"]
    if study == "green":
        st = L.green_limit_study(o, p["grid"], box, l1s=p["l1s"])
        expected = o.s
    elif study == "poisson":
        st = L.poisson_limit_study(o, p["grid"], box, l1s=p["l1s"])
        expected = 1.0
    else:
        st = L.boundary_layer_study(o, study.split("_")[1], p["grid"], box, l1s=p["l1s"], norm_mode=NormMode.coerce(p["norm-mode"]))
        expected = 1.0
    ok = abs(st.fitted_rate - expected) <= 0.1
    if p["l1s"]:
        ok = ok and st.l1s_monotone
    outputs = {"fitted_rate": st.fitted_rate, "rate_half_width": st.rate_half_width, "expected_rate": expected, "l1s_rate": st.l1s_rate}
    diag = {"sup_monotone": st.sup_monotone, "l1s_monotone": st.l1s_monotone if p["l1s"] else None, **st.extra}
    return TaskResult(ok, outputs, diag, st.rows())


def _task_wos(cfg: RunConfig) -> TaskResult:
    from .wos import ExteriorData, WalkConfig, wos_estimate

    o, p = cfg.order, cfg.params
    g = ExteriorData.const(p["value"]) if p["g"] == "const" else ExteriorData.box_indicator(p["box-lo"], p["box-hi"])
    wc = WalkConfig(p["walks"], p["max-steps"], cfg.seed, True, cfg.jobs)
    st = wos_estimate(o, p["x"], g, wc)
    ok = (not st.bias_warning) and st.z_score is not None and abs(st.z_score) <= 3.0
    outputs = st.as_dict()
    row = {k: outputs[k] for k in SCHEMAS["wos"][1]}
    return TaskResult(ok, outputs, {"bias_warning": st.bias_warning, "seed": cfg.seed}, [row])


RUNNERS = {
    "constants": _task_constants,
    "eval": _task_eval,
    "kernel": _task_kernel,
    "verify-poly": _task_verify_poly,
    "verify-identity": _task_verify_identity,
    "converge": _task_converge,
    "wos": _task_wos,
}


def _versions() -> dict:
    import scipy

    return {"fraclab": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def _cell(v) -> str:
    if isinstance(v, (list, tuple)):
        return " ".join(repr(float(t)) for t in v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def render_csv(task: str, rows: list[dict]) -> str:
    n, cols = SCHEMAS[task]
    buf = io.StringIO()
    buf.write(f"# fraclab v{__version__} schema={task}:{n}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def render_json(task: str, cfg: RunConfig, res: TaskResult) -> str:
    doc = {
        "task": task,
        "inputs": cfg.inputs,
        "outputs": res.outputs,
        "diagnostics": dict(res.diagnostics, ok=res.ok),
        "versions": _versions(),
    }
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def run_and_report(cfg: RunConfig, stdout=None) -> int:
    """Run the task, write the report, return the exit status."""
    stdout = stdout or sys.stdout
    try:
        res = RUNNERS[cfg.task](cfg)
    except (DivergenceError, DomainError) as exc:
        res = TaskResult(False, {}, {"error": type(exc).__name__, "message": str(exc)}, [])
    text = render_csv(cfg.task, res.rows) if cfg.format == "csv" else render_json(cfg.task, cfg, res)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if not res.ok:
        detail = res.diagnostics.get("message") or "check outside tolerance"
        print(f"fraclab {cfg.task}: FAILED ({detail})", file=sys.stderr)
    return 0 if res.ok else 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--N", type=str)
    p.add_argument("--s", type=str)
    p.add_argument("--seed", type=str)
    p.add_argument("--jobs", type=str)
    p.add_argument("--out", type=str)
    p.add_argument("--format", type=str)


def _add_params(p: argparse.ArgumentParser, task: str) -> None:
    for key in PARAMS[task]:
        p.add_argument(f"--{key}", dest=key.replace("-", "_"), type=str)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraclab", description="Fractional Laplacian toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for task in ("constants", "eval", "kernel", "converge", "wos"):
        p = sub.add_parser(task)
        _add_common(p)
        _add_params(p, task)
        p.set_defaults(task=task)
    verify = sub.add_parser("verify")
    vsub = verify.add_subparsers(dest="what", required=True)
    for what in ("poly", "identity"):
        p = vsub.add_parser(what)
        task = f"verify-{what}"
        _add_common(p)
        _add_params(p, task)
        p.set_defaults(task=task)
    return parser


_NEGATIVE = re.compile(r"^-[0-9.]")


def _join_negative(argv: Sequence[str]) -> list[str]:
    """Turn ``--key -1,2`` into ``--key=-1,2`` so argparse keeps the value."""
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative(argv))
    task = args.task
    flags = {"task": task}
    for key in list(COMMON) + list(PARAMS[task]):
        if key == "task":
            continue
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            flags[key] = val
    text = None
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"fraclab: cannot read config: {exc}", file=sys.stderr)
            return 2
    try:
        cfg = parse_config(text, flags)
    except ConfigError as exc:
        print(f"fraclab: configuration error: {exc}", file=sys.stderr)
        return 2
    except FraclabError as exc:
        print(f"fraclab: {exc}", file=sys.stderr)
        return 2
    return run_and_report(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
