"""Experiment configuration: schema, defaults, file loading, overrides.

A configuration is a nested dict with sections `env`, `run`, `algos`, and
per-algorithm sections (`master`, `policy`, `rr`, `rr_p`, `detector`,
`glr`). Files are JSON; command-line overrides are dotted `a.b=value`
strings applied after the file, with values parsed as JSON literals when
possible. Unknown keys are rejected by name. Two string sentinels defer
resolution to the concrete cell: "1/T" for confidence levels and "auto"
for rates derived from the horizon.
"""
from __future__ import annotations

import copy
import json
from pathlib import Path


class ConfigError(Exception):
    """Invalid configuration; message names the offending key."""


ALGOS = ("master", "rr", "rr_p", "qcd_ucb", "qcd_klucb", "glr_klucb")
DEBUG_ALGOS = ("oracle", "fixed_worst")

# key -> (default, description)
SCHEMA: dict[str, tuple] = {
    "env.T": (10_000, "horizon (steps per trial)"),
    "env.n_arms": (5, "number of arms"),
    "env.problem": ("uniform", "mean dynamics: uniform | worst"),
    "env.cp_model": ("geometric", "change-point process: geometric | deterministic | none"),
    "env.param": (0.5, "xi for geometric (eta = T^-xi); change count for deterministic"),
    "run.trials": (200, "independent trials per cell"),
    "run.master_seed": (0, "root seed; trials derive independent streams from it"),
    "run.output_dir": ("out", "directory for CSV/PNG outputs"),
    "run.thread_count": ("auto", "worker threads, or 'auto' (NSBANDIT_THREADS, then CPU count)"),
    "run.full_traces": (False, "write per-step traces instead of <=1000-point downsampling"),
    "run.figures": (True, "render PNG figures next to the CSVs"),
    "algo": ("master", "algorithm for `run`: " + " | ".join(ALGOS) + " (+ debug: oracle, fixed_worst)"),
    "algos": (list(ALGOS), "algorithm list for `sweep`"),
    "master.rho": ("mab", "regret-rate form: inv_sqrt | mab"),
    "master.base_alg": ("klucb", "base policy inside the scheduler: klucb | ucb1"),
    "master.fixed_n": (True, "keep block order n = floor(log2 T); false grows n per block"),
    "master.delta": ("1/T", "confidence for the restart tests ('1/T' or a real in (0,1))"),
    "master.debug_threshold_scale": (1.0, "multiplies both test thresholds; <1 is debug-only"),
    "policy.klucb_tolerance": (1e-6, "bisection stopping width for the klUCB index"),
    "policy.klucb_c": (0.0, "extra c*ln(ln t) exploration term in the klUCB budget"),
    "rr.eta_r": ("auto", "restart rate; 'auto' = sqrt(eta/ln T) from the env change rate"),
    "rr_p.p": (0.05, "per-step restart probability"),
    "detector.delta": ("1/T", "detector confidence ('1/T' or a real in (0,1); 0 disables)"),
    "detector.stride": (1, "evaluate the detector every stride-th sample"),
    "glr.alpha": ("auto", "forced-exploration rate; 'auto' = sqrt(A*ln T/T); 0 disables"),
}


def default_config() -> dict:
    cfg: dict = {}
    for key, (default, _) in SCHEMA.items():
        _set_dotted(cfg, key, copy.deepcopy(default))
    return cfg


def _set_dotted(cfg: dict, key: str, value) -> None:
    parts = key.split(".")
    node = cfg
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def _get_dotted(cfg: dict, key: str):
    node = cfg
    for p in key.split("."):
        node = node[p]
    return node


def _flatten(node, prefix="") -> dict:
    out = {}
    for k, v in node.items():
        dotted = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, dotted + "."))
        else:
            out[dotted] = v
    return out


def load_config(path: str | Path | None = None, overrides: list[str] | None = None) -> dict:
    """Defaults, then the JSON file (if any), then dotted overrides."""
    cfg = default_config()
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            loaded = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {p} is not valid JSON: {e}") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {p} must hold a JSON object")
        merge_config(cfg, loaded)
    for item in overrides or []:
        apply_override(cfg, item)
    validate_config(cfg)
    return cfg


def merge_config(cfg: dict, incoming: dict) -> None:
    for key, value in _flatten(incoming).items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key: {key}")
        _set_dotted(cfg, key, value)


def apply_override(cfg: dict, item: str) -> None:
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key: {key}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    _set_dotted(cfg, key, value)


def _expect(cond: bool, key: str, why: str) -> None:
    if not cond:
        raise ConfigError(f"config key {key}: {why}")


def validate_config(cfg: dict) -> None:
    flat = _flatten(cfg)
    for key in flat:
        if key != "algos" and key not in SCHEMA:
            raise ConfigError(f"unknown config key: {key}")

    T = flat["env.T"]
    _expect(isinstance(T, int) and T >= 2, "env.T", "must be an integer >= 2")
    _expect(isinstance(flat["env.n_arms"], int) and flat["env.n_arms"] >= 1,
            "env.n_arms", "must be an integer >= 1")
    _expect(flat["env.problem"] in ("uniform", "worst"), "env.problem",
            "must be 'uniform' or 'worst'")
    _expect(flat["env.cp_model"] in ("geometric", "deterministic", "none"),
            "env.cp_model", "must be 'geometric', 'deterministic' or 'none'")
    param = flat["env.param"]
    _expect(isinstance(param, (int, float)), "env.param", "must be numeric")
    if flat["env.cp_model"] == "geometric":
        _expect(0.0 < param < 1.0, "env.param", "xi must lie in (0, 1) for the geometric model")
    elif flat["env.cp_model"] == "deterministic":
        _expect(1 <= param < T, "env.param", "change count must lie in [1, T)")

    _expect(isinstance(flat["run.trials"], int) and flat["run.trials"] >= 1,
            "run.trials", "must be an integer >= 1")
    _expect(isinstance(flat["run.master_seed"], int) and flat["run.master_seed"] >= 0,
            "run.master_seed", "must be a non-negative integer")
    tc = flat["run.thread_count"]
    _expect(tc == "auto" or (isinstance(tc, int) and tc >= 1),
            "run.thread_count", "must be 'auto' or an integer >= 1")
    _expect(isinstance(flat["run.full_traces"], bool), "run.full_traces", "must be a boolean")
    _expect(isinstance(flat["run.figures"], bool), "run.figures", "must be a boolean")

    _expect(flat["algo"] in ALGOS + DEBUG_ALGOS, "algo",
            f"must be one of {ALGOS + DEBUG_ALGOS}")
    algos = cfg["algos"]
    _expect(isinstance(algos, list) and len(algos) >= 1, "algos", "must be a non-empty list")
    for a in algos:
        _expect(a in ALGOS + DEBUG_ALGOS, "algos", f"unknown algorithm {a!r}")

    _expect(flat["master.rho"] in ("inv_sqrt", "mab"), "master.rho",
            "must be 'inv_sqrt' or 'mab'")
    _expect(flat["master.base_alg"] in ("klucb", "ucb1"), "master.base_alg",
            "must be 'klucb' or 'ucb1'")
    _expect(isinstance(flat["master.fixed_n"], bool), "master.fixed_n", "must be a boolean")
    _check_delta(flat["master.delta"], "master.delta", allow_zero=False)
    _expect(isinstance(flat["master.debug_threshold_scale"], (int, float))
            and flat["master.debug_threshold_scale"] > 0,
            "master.debug_threshold_scale", "must be > 0")

    _expect(isinstance(flat["policy.klucb_tolerance"], (int, float))
            and flat["policy.klucb_tolerance"] > 0,
            "policy.klucb_tolerance", "must be > 0")
    _expect(isinstance(flat["policy.klucb_c"], (int, float)) and flat["policy.klucb_c"] >= 0,
            "policy.klucb_c", "must be >= 0")

    er = flat["rr.eta_r"]
    _expect(er == "auto" or (isinstance(er, (int, float)) and 0.0 < er < 1.0),
            "rr.eta_r", "must be 'auto' or a real in (0, 1)")
    _expect(isinstance(flat["rr_p.p"], (int, float)) and 0.0 < flat["rr_p.p"] < 1.0,
            "rr_p.p", "must lie in (0, 1)")
    _check_delta(flat["detector.delta"], "detector.delta", allow_zero=True)
    _expect(isinstance(flat["detector.stride"], int) and flat["detector.stride"] >= 1,
            "detector.stride", "must be an integer >= 1")
    al = flat["glr.alpha"]
    _expect(al == "auto" or (isinstance(al, (int, float)) and 0.0 <= al < 1.0),
            "glr.alpha", "must be 'auto' or a real in [0, 1)")


def _check_delta(value, key: str, allow_zero: bool) -> None:
    if value == "1/T":
        return
    rng = "[0, 1)" if allow_zero else "(0, 1)"
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool), key,
            f"must be '1/T' or a real in {rng}")
    lo_ok = (value >= 0.0) if allow_zero else (value > 0.0)
    _expect(lo_ok and value < 1.0, key, f"must be '1/T' or a real in {rng}")


def resolve_delta(value, T: int) -> float:
    return 1.0 / T if value == "1/T" else float(value)


def config_echo(cfg: dict) -> str:
    """Canonical JSON text of the resolved config (sorted keys, stable)."""
    return json.dumps(cfg, indent=2, sort_keys=True)


def describe_keys() -> str:
    """One line per config key with its default, for CLI help."""
    lines = []
    for key, (default, desc) in SCHEMA.items():
        lines.append(f"  {key:<30} default={json.dumps(default)!s:<12} {desc}")
    return "\n".join(lines)
