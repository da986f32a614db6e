"""One function per experiment: resolved config in, (columns, rows) out."""
from __future__ import annotations

import numpy as np

from .. import laws
from ..arbfun import char_fn_magnitude, pushforward_mod, tv_distance
from ..doublewell import RESULT_COLUMNS, born_experiment, delta_splitting_check
from ..twostate import ModelParams, born_gap_rows, initial_state
from ..wigner import Grid1D, PointMassMixture, bump, coherent_state, prop1_residual, smooth_box
from .config import ExperimentConfig, build_flea_distribution, build_law

SCHEMAS = {
    "twostate_born": ("hbar", "T_or_diag", "A_label", "re", "im", "born_value", "abs_gap"),
    "doublewell_born": RESULT_COLUMNS,
    "prop1_oscillator": ("hbar", "T", "observable", "quantum", "classical", "residual"),
    "equidistribution": ("density", "t", "tv_distance", "char_fn_abs"),
    "splitting_check": ("hbar", "numeric_gap", "asymptotic_gap", "ratio"),
}


def make_observable(spec: dict):
    if spec["kind"] == "bump":
        return bump(spec["x0"], spec["p0"], spec["rx"], spec.get("rp"))
    return smooth_box(spec["x_lo"], spec["x_hi"], spec["p_lo"], spec["p_hi"], spec["ramp"],
                      label=f"box({spec['x_lo']:g},{spec['x_hi']:g};{spec['p_lo']:g},{spec['p_hi']:g})")


def run_twostate_born(cfg: ExperimentConfig, threads: int = 1):
    m = cfg.model
    mu = build_law(cfg.distribution)
    params = ModelParams(m["hbar_list"][0], m["a"], m["lam"], m["mass"])
    state0 = initial_state(m["alpha2"])
    T = m["T"]
    modes = ["diagonal"] if T is None else [("finite_T", float(t)) for t in np.atleast_1d(T)]
    rows = []
    for mode in modes:
        rows += born_gap_rows(state0, mu, params, m["hbar_list"], mode, n_nodes=m["n_nodes"])
    cols = SCHEMAS["twostate_born"]
    return cols, [tuple(r[c] for c in cols) for r in rows]


def run_doublewell_born(cfg: ExperimentConfig, threads: int = 1):
    m = cfg.model
    dist = build_flea_distribution(cfg.distribution, m["a"])
    params = ModelParams(m["hbar_list"][0], m["a"], m["lam"], m["mass"])
    grid = Grid1D(**m["grid"]) if m["grid"] else None
    res = born_experiment(dist, m["alpha2"], m["hbar_list"], cfg.n_samples, cfg.seed, params=params,
                          grid=grid, K=m["K"], T_factor=m["T_factor"], wigner=m["wigner"],
                          threads=threads)
    return RESULT_COLUMNS, [tuple(r[c] for c in RESULT_COLUMNS) for r in res.rows]


def run_prop1_oscillator(cfg: ExperimentConfig, threads: int = 1):
    m = cfg.model
    mu = build_law(cfg.distribution)
    grid = Grid1D(**m["grid"])
    fs = [make_observable(o) for o in m["observables"]]
    limit = PointMassMixture(((m["x0"], m["p0"], 1.0),))
    res = prop1_residual(lambda h: coherent_state(grid, h, m["x0"], m["p0"], m["m_omega"]), mu,
                         m["hbar_list"], m["T_list"], fs, limit, m_omega=m["m_omega"],
                         n_angles=m["n_angles"], p_extent=m["p_extent"], n_p=m["n_p"])
    return SCHEMAS["prop1_oscillator"], [(r.hbar, r.T, r.label, r.quantum, r.classical, r.residual)
                                         for r in res]


def run_equidistribution(cfg: ExperimentConfig, threads: int = 1):
    d = cfg.distribution
    if isinstance(d, dict) and d["kind"] == "family":
        family = laws.standard_family(d["lo"], d["hi"])
    elif isinstance(d, list):
        family = {f"law{i}": build_law(x) for i, x in enumerate(d)}
    else:
        family = {d["kind"]: build_law(d)}
    rows = []
    for name, rv in family.items():
        for t in cfg.model["t_list"]:
            law = pushforward_mod(rv, float(t), n_bins=cfg.model["n_bins"])
            rows.append((name, float(t), tv_distance(law), char_fn_magnitude(rv, float(t))))
    return SCHEMAS["equidistribution"], rows


def run_splitting_check(cfg: ExperimentConfig, threads: int = 1):
    m = cfg.model
    params = ModelParams(m["hbar_list"][0], m["a"], m["lam"], m["mass"])
    rows = delta_splitting_check(params, m["hbar_list"])
    return SCHEMAS["splitting_check"], [(r.hbar, r.numeric, r.asymptotic, r.ratio) for r in rows]


RUNNERS = {
    "twostate_born": run_twostate_born,
    "doublewell_born": run_doublewell_born,
    "prop1_oscillator": run_prop1_oscillator,
    "equidistribution": run_equidistribution,
    "splitting_check": run_splitting_check,
}
