"""JSON experiment configs: default resolution and validation with field paths."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .. import laws
from ..arbfun import DensityRV, MixtureRV
from ..errors import BornFleaError, ConfigError

EXPERIMENTS = ("twostate_born", "doublewell_born", "prop1_oscillator", "equidistribution",
               "splitting_check")
MAX_SEED = 2**64 - 1

PROP1_OBSERVABLES = [
    {"kind": "bump", "x0": 1.0, "p0": 0.0, "rx": 0.8},
    {"kind": "bump", "x0": 0.0, "p0": 1.0, "rx": 0.8},
    {"kind": "bump", "x0": -0.5, "p0": -0.5, "rx": 1.0},
    {"kind": "bump", "x0": 0.7, "p0": -0.7, "rx": 0.6, "rp": 1.0},
    {"kind": "smooth_box", "x_lo": -2.0, "x_hi": 2.0, "p_lo": 0.0, "p_hi": 2.0, "ramp": 0.5},
    {"kind": "smooth_box", "x_lo": 0.2, "x_hi": 2.0, "p_lo": -2.0, "p_hi": 2.0, "ramp": 0.6},
]

DEFAULT_FLEA_LAW = {
    "kind": "flea",
    "amplitude": {"kind": "uniform", "lo": 0.035, "hi": 0.042},
    "center": {"kind": "mixture", "parts": [
        {"weight": 0.7, "law": {"kind": "uniform", "lo": -0.75, "hi": -0.65}},
        {"weight": 0.3, "law": {"kind": "uniform", "lo": 0.65, "hi": 0.75}},
    ]},
    "width": 0.15,
    "sign_weight": 0.5,
}

DEFAULTS: dict[str, dict] = {
    "twostate_born": {
        "model": {"hbar_list": [0.3, 0.2, 0.15, 0.1], "a": 1.0, "lam": 1.0, "mass": 1.0,
                  "alpha2": 0.7, "T": None, "n_nodes": 256},
        "distribution": {"kind": "uniform", "lo": 0.5, "hi": 1.5},
        "n_samples": 0,
    },
    "doublewell_born": {
        "model": {"hbar_list": [0.3, 0.2, 0.15], "a": 1.0, "lam": 1.0, "mass": 1.0,
                  "alpha2": 0.7, "K": 8, "T_factor": 1000.0, "wigner": True, "grid": None},
        "distribution": DEFAULT_FLEA_LAW,
        "n_samples": 200,
    },
    "prop1_oscillator": {
        "model": {"hbar_list": [0.2, 0.1, 0.05], "T_list": [10.0, 100.0, 1000.0], "m_omega": 1.0,
                  "x0": 1.0, "p0": 0.0,
                  "grid": {"x_min": -5.0, "x_max": 5.0, "n_points": 1024},
                  "n_angles": 128, "p_extent": 6.0, "n_p": 256, "observables": PROP1_OBSERVABLES},
        "distribution": {"kind": "uniform", "lo": 1.0, "hi": 2.0},
        "n_samples": 0,
    },
    "equidistribution": {
        "model": {"t_list": [10.0, 100.0, 1000.0, 10000.0], "n_bins": 4096},
        "distribution": {"kind": "family", "lo": 1.0, "hi": 2.0},
        "n_samples": 0,
    },
    "splitting_check": {
        "model": {"hbar_list": [0.5, 0.4, 0.3, 0.25], "a": 1.0, "lam": 1.0, "mass": 1.0},
        "distribution": None,
        "n_samples": 0,
    },
}

LAW_FIELDS = {
    "uniform": {"lo", "hi"},
    "triangle": {"lo", "hi", "mode"},
    "ramp": {"lo", "hi"},
    "gaussian": {"mean", "sd", "lo", "hi"},
    "step": {"edges", "weights"},
    "beta": {"a", "b", "lo", "hi"},
    "mixture": {"parts"},
    "point": {"value"},
    "family": {"lo", "hi"},
    "flea": {"amplitude", "center", "width", "sign_weight"},
}
LAW_OPTIONAL = {"triangle": {"mode"}, "flea": {"sign_weight"}}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    model: dict
    distribution: Any
    n_samples: int
    seed: int
    output: str | None

    def as_dict(self) -> dict:
        return {"experiment": self.experiment, "model": copy.deepcopy(self.model),
                "distribution": copy.deepcopy(self.distribution), "n_samples": self.n_samples,
                "seed": self.seed, "output": self.output}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    def sha256(self) -> str:
        """Hash of the resolved experiment definition (output path excluded)."""
        d = self.as_dict()
        d.pop("output")
        canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return ExperimentConfig(self.experiment, self.model, self.distribution, self.n_samples,
                                seed, self.output)


class _Collector:
    def __init__(self):
        self.violations: list[tuple[str, str]] = []

    def add(self, path: str, msg: str):
        self.violations.append((path, msg))


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and np.isfinite(v)


def _positive(c, path, v):
    if not _is_num(v) or not v > 0:
        c.add(path, f"must be a positive number (got {v!r})")
        return False
    return True


def _positive_list(c, path, v):
    if not isinstance(v, list) or not v:
        c.add(path, "must be a non-empty list of positive numbers")
        return False
    ok = True
    for i, x in enumerate(v):
        ok &= _positive(c, f"{path}[{i}]", x)
    return ok


def build_law(spec: dict):
    """Construct a density law from its JSON description (assumed validated)."""
    kind = spec["kind"]
    if kind == "uniform":
        return laws.uniform(spec["lo"], spec["hi"])
    if kind == "triangle":
        return laws.triangle(spec["lo"], spec["hi"], spec.get("mode"))
    if kind == "ramp":
        return laws.ramp(spec["lo"], spec["hi"])
    if kind == "gaussian":
        return laws.truncated_gaussian(spec["mean"], spec["sd"], spec["lo"], spec["hi"])
    if kind == "step":
        return laws.step(spec["edges"], spec["weights"])
    if kind == "beta":
        return laws.beta(spec["a"], spec["b"], spec["lo"], spec["hi"])
    if kind == "mixture":
        return MixtureRV(tuple((p["weight"], build_law(p["law"])) for p in spec["parts"]))
    raise ValueError(f"law kind {kind!r} has no density")


def _check_law(c: _Collector, path: str, spec, allow=("uniform", "triangle", "ramp", "gaussian",
                                                      "step", "beta", "mixture")) -> bool:
    if not isinstance(spec, dict) or "kind" not in spec:
        c.add(path, "must be an object with a 'kind' field")
        return False
    kind = spec["kind"]
    if kind == "point":
        c.add(path, "a point mass has no density; the method needs absolutely continuous laws")
        return False
    if kind not in allow:
        c.add(f"{path}.kind", f"must be one of {sorted(allow)} (got {kind!r})")
        return False
    fields = LAW_FIELDS[kind]
    for extra in sorted(set(spec) - fields - {"kind"}):
        c.add(f"{path}.{extra}", "unknown field")
    missing = fields - LAW_OPTIONAL.get(kind, set()) - set(spec)
    for m in sorted(missing):
        c.add(f"{path}.{m}", "required field is missing")
    if missing:
        return False
    ok = True
    if kind == "mixture":
        parts = spec["parts"]
        if not isinstance(parts, list) or not parts:
            c.add(f"{path}.parts", "must be a non-empty list")
            return False
        total = 0.0
        for i, p in enumerate(parts):
            pp = f"{path}.parts[{i}]"
            if not isinstance(p, dict) or set(p) != {"weight", "law"}:
                c.add(pp, "must be an object with exactly 'weight' and 'law'")
                ok = False
                continue
            if not _is_num(p["weight"]) or p["weight"] < 0:
                c.add(f"{pp}.weight", "must be a non-negative number")
                ok = False
            else:
                total += p["weight"]
            ok &= _check_law(c, f"{pp}.law", p["law"], allow)
        if ok and abs(total - 1.0) > 1e-12:
            c.add(f"{path}.parts", f"weights must sum to 1 (got {total!r})")
            ok = False
        return ok
    if kind == "family":
        return _check_interval(c, path, spec)
    if kind == "flea":  # component laws are checked by the caller
        return True
    if kind == "step":
        e, w = spec["edges"], spec["weights"]
        if not (isinstance(e, list) and isinstance(w, list) and len(e) == len(w) + 1 and len(w) >= 1
                and all(_is_num(x) for x in e + w)):
            c.add(path, "step needs numeric 'edges' with one more entry than 'weights'")
            return False
        if any(b <= a for a, b in zip(e, e[1:])) or any(x < 0 for x in w) or sum(w) <= 0:
            c.add(path, "step edges must increase and weights be non-negative with positive sum")
            return False
        return True
    for key in fields - {"lo", "hi"}:
        if key in spec and spec[key] is not None and not _is_num(spec[key]):
            c.add(f"{path}.{key}", "must be a number")
            ok = False
    if kind == "gaussian" and ok and not spec["sd"] > 0:
        c.add(f"{path}.sd", "must be positive")
        ok = False
    if kind == "beta" and ok and not (spec["a"] >= 1 and spec["b"] >= 1):
        c.add(path, "beta shape parameters must be >= 1")
        ok = False
    return _check_interval(c, path, spec) and ok


def _check_interval(c, path, spec) -> bool:
    lo, hi = spec.get("lo"), spec.get("hi")
    if not (_is_num(lo) and _is_num(hi)):
        c.add(path, "'lo' and 'hi' must be numbers")
        return False
    if not hi > lo:
        c.add(path, f"needs hi > lo (got [{lo}, {hi}])")
        return False
    if spec.get("kind") == "triangle" and spec.get("mode") is not None and not lo <= spec["mode"] <= hi:
        c.add(f"{path}.mode", "must lie in [lo, hi]")
        return False
    return True


def _law_intervals(spec) -> list[tuple[float, float]]:
    if spec["kind"] == "mixture":
        return [iv for p in spec["parts"] if p["weight"] > 0 for iv in _law_intervals(p["law"])]
    if spec["kind"] == "step":
        return [(spec["edges"][0], spec["edges"][-1])]
    return [(spec["lo"], spec["hi"])]


def _merge(default, given, path, c: _Collector):
    """Overlay ``given`` on ``default``; unknown keys are violations."""
    if not isinstance(given, dict):
        c.add(path or "<root>", "must be a JSON object")
        return copy.deepcopy(default)
    out = copy.deepcopy(default)
    for k, v in given.items():
        if k not in default:
            c.add(f"{path}.{k}" if path else k, "unknown field")
            continue
        out[k] = v
    return out


def _validate_model(c: _Collector, exp: str, m: dict):
    if "hbar_list" in m:
        _positive_list(c, "model.hbar_list", m["hbar_list"])
    for key in ("a", "lam", "mass", "m_omega", "T_factor", "p_extent"):
        if key in m:
            _positive(c, f"model.{key}", m[key])
    if exp == "twostate_born":
        a2 = m["alpha2"]
        if not _is_num(a2) or not 0 <= a2 <= 1:
            c.add("model.alpha2", f"must lie in [0, 1] (got {a2!r})")
        T = m["T"]
        if T is not None and not (_is_num(T) and T > 0) and not isinstance(T, list):
            c.add("model.T", "must be null (diagonal ensemble), a positive number or a list of them")
        elif isinstance(T, list):
            _positive_list(c, "model.T", T)
        if not isinstance(m["n_nodes"], int) or isinstance(m["n_nodes"], bool) or m["n_nodes"] < 8:
            c.add("model.n_nodes", "must be an integer >= 8")
    if exp == "doublewell_born":
        a2 = m["alpha2"]
        if not _is_num(a2) or not 0 < a2 < 1:
            c.add("model.alpha2", f"must lie strictly between 0 and 1 (got {a2!r})")
        K = m["K"]
        if not isinstance(K, int) or isinstance(K, bool) or K < 2:
            c.add("model.K", "must be an integer >= 2")
        if not isinstance(m["wigner"], bool):
            c.add("model.wigner", "must be true or false")
        if m["grid"] is not None:
            _check_grid(c, "model.grid", m["grid"])
    if exp == "prop1_oscillator":
        _positive_list(c, "model.T_list", m["T_list"])
        for key in ("x0", "p0"):
            if not _is_num(m[key]):
                c.add(f"model.{key}", "must be a number")
        grid_ok = _check_grid(c, "model.grid", m["grid"])
        for key in ("n_angles", "n_p"):
            if not isinstance(m[key], int) or isinstance(m[key], bool) or m[key] < 8:
                c.add(f"model.{key}", "must be an integer >= 8")
        if grid_ok and _is_num(m["p_extent"]) and isinstance(m["hbar_list"], list) and \
                all(_is_num(h) and h > 0 for h in m["hbar_list"]) and m["hbar_list"]:
            g = m["grid"]
            dx = (g["x_max"] - g["x_min"]) / (g["n_points"] - 1)
            worst = m["p_extent"] * dx / min(m["hbar_list"])
            if worst >= np.pi:
                c.add("model.p_extent", f"p_extent*dx/hbar = {worst:.3f} >= pi: the momentum grid would alias")
        obs = m["observables"]
        if not isinstance(obs, list) or not obs:
            c.add("model.observables", "must be a non-empty list")
        else:
            for i, o in enumerate(obs):
                _check_observable(c, f"model.observables[{i}]", o)
    if exp == "equidistribution":
        _positive_list(c, "model.t_list", m["t_list"])
        nb = m["n_bins"]
        if not isinstance(nb, int) or isinstance(nb, bool) or nb < 2:
            c.add("model.n_bins", "must be an integer >= 2")


def _check_grid(c, path, g) -> bool:
    if not isinstance(g, dict) or set(g) != {"x_min", "x_max", "n_points"}:
        c.add(path, "must be an object with exactly x_min, x_max, n_points")
        return False
    ok = True
    if not (_is_num(g["x_min"]) and _is_num(g["x_max"]) and g["x_max"] > g["x_min"]):
        c.add(path, "needs numeric x_min < x_max")
        ok = False
    n = g["n_points"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2 or n & (n - 1):
        c.add(f"{path}.n_points", f"must be a power of two >= 2 (got {n!r})")
        ok = False
    return ok


def _check_observable(c, path, o):
    shapes = {"bump": ({"x0", "p0", "rx"}, {"rp"}),
              "smooth_box": ({"x_lo", "x_hi", "p_lo", "p_hi", "ramp"}, set())}
    if not isinstance(o, dict) or o.get("kind") not in shapes:
        c.add(path, "must be an object with kind 'bump' or 'smooth_box'")
        return
    req, opt = shapes[o["kind"]]
    for k in sorted(req - set(o)):
        c.add(f"{path}.{k}", "required field is missing")
    for k in sorted(set(o) - req - opt - {"kind"}):
        c.add(f"{path}.{k}", "unknown field")
    for k in sorted((req | opt) & set(o)):
        if not _is_num(o[k]):
            c.add(f"{path}.{k}", "must be a number")


def _validate_distribution(c: _Collector, exp: str, d, model: dict):
    if exp == "splitting_check":
        if d is not None:
            c.add("distribution", "splitting_check takes no distribution")
        return
    if exp == "equidistribution":
        if isinstance(d, list):
            for i, item in enumerate(d):
                _check_law(c, f"distribution[{i}]", item)
            if not d:
                c.add("distribution", "must not be empty")
            return
        _check_law(c, "distribution", d, allow=tuple(LAW_FIELDS) )
        return
    if exp == "doublewell_born":
        if not isinstance(d, dict) or d.get("kind") != "flea":
            c.add("distribution.kind", "doublewell_born needs a 'flea' distribution")
            return
        if not _check_law(c, "distribution", d, allow=("flea",)):
            return
        ok = _check_law(c, "distribution.amplitude", d["amplitude"])
        ok &= _check_law(c, "distribution.center", d["center"])
        w = d["width"]
        if isinstance(w, dict):
            ok &= _check_law(c, "distribution.width", w)
        else:
            ok &= _positive(c, "distribution.width", w)
        sw = d.get("sign_weight", 0.5)
        if not _is_num(sw) or not 0 <= sw <= 1:
            c.add("distribution.sign_weight", "must lie in [0, 1]")
            ok = False
        if ok:
            try:
                build_flea_distribution(d, model.get("a", 1.0))
            except BornFleaError as exc:
                c.add("distribution", str(exc))
        return
    if not _check_law(c, "distribution", d):
        return
    intervals = _law_intervals(d)
    if exp == "twostate_born":
        if any(lo <= 0 <= hi for lo, hi in intervals):
            c.add("distribution", "flea parameter delta must take real nonzero values: "
                                  "the support of mu contains 0")
    if exp == "prop1_oscillator":
        if any(lo <= 0 for lo, _ in intervals):
            c.add("distribution", "frequency law must be supported on omega > 0")


def build_flea_distribution(d: dict, a: float = 1.0):
    from ..doublewell import FleaDistribution
    width = build_law(d["width"]) if isinstance(d["width"], dict) else float(d["width"])
    return FleaDistribution(build_law(d["amplitude"]), build_law(d["center"]), width,
                            float(d.get("sign_weight", 0.5)), a)


def validate_config(text: str) -> ExperimentConfig:
    """Parse and validate config text; raises ``ConfigError`` listing every violation."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([(f"line {exc.lineno}, column {exc.colno}", f"JSON syntax error: {exc.msg}")])
    c = _Collector()
    if not isinstance(raw, dict):
        raise ConfigError([("<root>", "config must be a JSON object")])
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError([("experiment", f"must be one of {list(EXPERIMENTS)} (got {exp!r})")])
    base = DEFAULTS[exp]
    for k in sorted(set(raw) - {"experiment", "model", "distribution", "n_samples", "seed", "output"}):
        c.add(k, "unknown field")
    model = _merge(base["model"], raw.get("model", {}), "model", c)
    dist = copy.deepcopy(raw["distribution"]) if "distribution" in raw else copy.deepcopy(base["distribution"])
    n_samples = raw.get("n_samples", base["n_samples"])
    seed = raw.get("seed", 0)
    output = raw.get("output")
    _validate_model(c, exp, model)
    _validate_distribution(c, exp, dist, model)
    if not isinstance(n_samples, int) or isinstance(n_samples, bool) or n_samples < 0 or \
            (exp == "doublewell_born" and n_samples < 1):
        c.add("n_samples", "must be a non-negative integer (>= 1 for doublewell_born)")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed <= MAX_SEED:
        c.add("seed", "must be an integer in [0, 2^64 - 1]")
    if output is not None and not isinstance(output, str):
        c.add("output", "must be a path string or null")
    if c.violations:
        raise ConfigError(c.violations)
    return ExperimentConfig(exp, model, dist, n_samples, seed, output)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return validate_config(fh.read())
