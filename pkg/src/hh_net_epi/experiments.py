"""Experiment commands: one function per CLI subcommand.

Table-producing commands return ``(header, rows)``; JSON-producing commands
return a dict.  Writers emit UTF-8 with LF line endings and shortest
round-trip float formatting, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math

import numpy as np

from hh_net_epi.analytics import (
    DEFAULT_MC_DRAWS,
    critical_lambda_g,
    major_outbreak_prob,
    summarize,
)
from hh_net_epi.config import DEGREE_FAMILIES, ExperimentConfig, make_degree, model_params, parse_grid
from hh_net_epi.errors import ConfigError, NoRootError
from hh_net_epi.infectious_period import Fixed, ZeroOrInfinite
from hh_net_epi.simulator import DEFAULT_CUTOFF, run_batch, simulate, summarize_outcomes, write_outcomes_csv

log = logging.getLogger(__name__)

ANALYTICS_KEYS = ("r_star", "sigma", "xi", "p_major", "z_final", "method_tag")
CRITICAL_HEADER = ["n", "lambda_L", "lambda_L_times_nminus1", "critical_lambda_G"]
SWEEP_HEADER = ["family", "param", "mu_D", "p_major"]
CONVERGENCE_HEADER = ["m", "p_hat", "p_se", "z_hat", "z_se", "p_asymptotic", "z_asymptotic"]


def _mc_settings(cfg: ExperimentConfig, params) -> tuple[int, int]:
    draws = cfg.number("mc_draws", default=DEFAULT_MC_DRAWS, kind=int)
    if isinstance(params.period, (Fixed, ZeroOrInfinite)):
        return draws, cfg.seed or 0
    if cfg.seed is None:
        raise ConfigError("this infectious period uses Monte Carlo PGFs and needs a seed", cfg.where("seed"))
    return draws, cfg.seed


def cmd_analytics(cfg: ExperimentConfig) -> dict:
    params = model_params(cfg)
    draws, seed = _mc_settings(cfg, params)
    record = summarize(params, draws=draws, seed=seed)
    return {k: record[k] for k in ANALYTICS_KEYS}


def cmd_critical_curve(cfg: ExperimentConfig):
    ns = cfg.grid("n", kind=int)
    if cfg.has("lambda_L") == cfg.has("lambda_L_times_nminus1"):
        raise ConfigError("give exactly one of lambda_L / lambda_L_times_nminus1", cfg.where("lambda_l"))
    scaled = cfg.has("lambda_L_times_nminus1")
    grid = cfg.grid("lambda_L_times_nminus1" if scaled else "lambda_L")
    rows = []
    for n in ns:
        if scaled and n == 1 and any(grid):
            raise ConfigError("n = 1 has no household partners; use a lambda_L grid", cfg.where("n"))
        for x in grid:
            lam = (x / (n - 1) if n > 1 else 0.0) if scaled else x
            params = model_params(cfg, n=n, lambda_L=lam, lambda_G=0.0)
            try:
                crit = critical_lambda_g(params)
            except NoRootError as exc:
                log.warning("n=%d lambda_L=%g: %s", n, lam, exc)
                crit = None
            rows.append([n, lam, lam * (n - 1), crit])
    return CRITICAL_HEADER, rows


def _sweep_spec(family: str, text: str, where: str):
    toks = [t for t in text.replace(",", " ").split() if t]
    if len(toks) < 2:
        raise ConfigError("expected '<param> <grid> [key=value ...]'", where)
    name, rest = toks[0].lower(), toks[1:]
    fixed, grid_toks = {}, []
    for t in rest:
        if "=" in t:
            k, v = t.split("=", 1)
            try:
                fixed[k.lower()] = float(v)
            except ValueError:
                raise ConfigError(f"non-numeric value in {t!r}", where) from None
        else:
            grid_toks.append(t)
    try:
        grid = parse_grid(",".join(grid_toks))
    except ValueError as exc:
        raise ConfigError(str(exc), where) from None
    return name, grid, fixed


def cmd_sweep(cfg: ExperimentConfig):
    families = [k for k in cfg.values if k in DEGREE_FAMILIES]
    if not families:
        raise ConfigError(f"no degree family grids given (keys: {', '.join(DEGREE_FAMILIES)})", f"[{cfg.command}]")
    base = model_params(cfg, degree=None)
    draws, seed = _mc_settings(cfg, base)
    rows = []
    for family in families:
        where = cfg.where(family)
        name, grid, fixed = _sweep_spec(family, cfg.raw(family), where)
        for value in grid:
            dist = make_degree(family, {**fixed, name: value}, where)
            p = major_outbreak_prob(base.with_(degree=dist), draws=draws, seed=seed)
            rows.append([family, value, dist.mean, p])
    return SWEEP_HEADER, rows


def _stream_seed(seed: int, m: int) -> int:
    return int(np.random.SeedSequence([seed, m]).generate_state(1)[0])


def cmd_convergence(cfg: ExperimentConfig, workers: int | None = None):
    params = model_params(cfg)
    ms = cfg.grid("m", kind=int)
    replicates = cfg.number("replicates", default=2000, kind=int)
    cutoff = cfg.number("cutoff", default=DEFAULT_CUTOFF)
    workers = workers or cfg.number("workers", default=1, kind=int)
    draws, mc_seed = _mc_settings(cfg, params)
    asym = summarize(params, draws=draws, seed=mc_seed)
    rows = []
    for m in ms:
        s = run_batch(params, m, replicates, cutoff, seed=_stream_seed(cfg.seed, m), workers=workers)
        rows.append([m, s.p_hat, s.p_se, s.z_hat, s.z_se, asym["p_major"], asym["z_final"]])
    return CONVERGENCE_HEADER, rows


def cmd_simulate(cfg: ExperimentConfig, workers: int | None = None, raw_path=None) -> dict:
    params = model_params(cfg)
    m = cfg.number("m", kind=int)
    replicates = cfg.number("replicates", default=2000, kind=int)
    cutoff = cfg.number("cutoff", default=DEFAULT_CUTOFF)
    workers = workers or cfg.number("workers", default=1, kind=int)
    outcomes = simulate(params, m, replicates, seed=cfg.seed, fixed_network=cfg.flag("fixed_network"),
                        workers=workers)
    raw_path = raw_path or cfg.raw("raw_csv")
    if raw_path:
        write_outcomes_csv(outcomes, m, params.n, raw_path, cutoff)
    return summarize_outcomes(outcomes, m, params.n, cutoff).to_dict()


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (np.floating, np.integer)):
        return _clean(value.item())
    return value


def to_json(record: dict) -> str:
    clean = {k: _clean(v) for k, v in record.items()}
    return json.dumps(clean, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _cell(value) -> str:
    value = _clean(value)
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()
