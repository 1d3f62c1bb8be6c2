"""Seeded experiment harness: parallel trials, aggregation, CSV outputs.

One trial = one environment realization plus one algorithm run over it.
Trial i derives two independent RNG streams from (master_seed, i): the
environment stream fixes the realization before the algorithm starts, and
the algorithm stream feeds whatever randomness the algorithm itself needs.
Regret is the expectation form: per-step increment is the gap between the
best arm's true mean and the played arm's true mean, so the oracle player
scores exactly zero.

Trials run on a thread pool (the kernels release the GIL); aggregation is
a fold in trial-index order, so results are bit-identical for any thread
count. Wall time covers the algorithm loop only, never environment
generation, and kernels are warmed once per process so compilation never
lands in a measurement.
"""
from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ALGOS, ConfigError, config_echo, resolve_delta, validate_config
from .envs import Realization, build_realization
from .master import MasterConfig, run_master
from .policies import PolicyConfig
from .restarts import auto_alpha, auto_eta_r, run_glrklucb, run_qcd, run_rr, run_rr_p
from .seeds import alg_stream, env_stream


@dataclass
class TrialResult:
    regret_trace: np.ndarray
    final_regret: float
    declared_changes: int
    restarts: int
    wall_seconds: float
    seed: int  # trial index under the run's master_seed

    def __post_init__(self):
        inc = np.diff(self.regret_trace, prepend=0.0)
        if (inc < -1e-9).any() or (inc > 1.0 + 1e-9).any():
            raise AssertionError("regret increments must lie in [0, 1]")
        if abs(self.final_regret - float(self.regret_trace[-1])) > 1e-9:
            raise AssertionError("final_regret must equal the last trace entry")


@dataclass
class AggregateResult:
    algo: str
    problem: str
    cp_model: str
    param: float
    horizon: int
    trials: int
    final_regret_mean: float
    final_regret_std: float
    detections_mean: float
    restarts_mean: float
    wall_mean: float
    wall_std: float
    trace_t: np.ndarray
    trace_mean: np.ndarray
    trace_std: np.ndarray

    @property
    def cell_id(self) -> str:
        return f"{self.problem}_{self.cp_model}_p{self.param:g}_T{self.horizon}"


def _run_algo(algo: str, real: Realization, cfg: dict, T: int, n_arms: int,
              alg_gen: np.random.Generator, trace: np.ndarray):
    policy = PolicyConfig(kind="klucb",
                          klucb_tolerance=cfg["policy"]["klucb_tolerance"],
                          klucb_exploration_c=cfg["policy"]["klucb_c"])
    if algo == "master":
        m = cfg["master"]
        mc = MasterConfig(rho_form=m["rho"], base_alg=m["base_alg"],
                          fixed_n=m["fixed_n"],
                          delta=resolve_delta(m["delta"], T),
                          debug_threshold_scale=m["debug_threshold_scale"],
                          klucb_tolerance=policy.klucb_tolerance,
                          klucb_c=policy.klucb_exploration_c)
        return run_master(real, n_arms, mc, alg_gen, trace)
    if algo == "rr":
        er = cfg["rr"]["eta_r"]
        if er == "auto":
            er = auto_eta_r(T, cfg["env"]["cp_model"], cfg["env"]["param"])
        return run_rr(real, n_arms, policy, float(er), alg_gen, trace)
    if algo == "rr_p":
        return run_rr_p(real, n_arms, policy, cfg["rr_p"]["p"], alg_gen, trace)
    if algo in ("qcd_ucb", "qcd_klucb"):
        pol = PolicyConfig(kind="ucb1" if algo == "qcd_ucb" else "klucb",
                           klucb_tolerance=policy.klucb_tolerance,
                           klucb_exploration_c=policy.klucb_exploration_c)
        return run_qcd(real, n_arms, pol, resolve_delta(cfg["detector"]["delta"], T),
                       cfg["detector"]["stride"], trace)
    if algo == "glr_klucb":
        al = cfg["glr"]["alpha"]
        if al == "auto":
            al = auto_alpha(T, n_arms)
        return run_glrklucb(real, n_arms, policy,
                            resolve_delta(cfg["detector"]["delta"], T),
                            cfg["detector"]["stride"], float(al), trace)
    if algo == "oracle":
        trace[:] = 0.0
        return None
    if algo == "fixed_worst":
        arm = int(np.argmin(real.means[0]))
        np.cumsum(real.best - real.means[:, arm], out=trace)
        return None
    raise ConfigError(f"config key algo: unknown algorithm {algo!r}")


def run_trial(cfg: dict, trial_index: int, algo: str | None = None) -> TrialResult:
    """Run one seeded trial; wall time covers the algorithm loop only."""
    env = cfg["env"]
    T, n_arms = env["T"], env["n_arms"]
    algo = cfg["algo"] if algo is None else algo
    seed = cfg["run"]["master_seed"]
    real = build_realization(T, n_arms, env["problem"], env["cp_model"],
                             env["param"], env_stream(seed, trial_index))
    alg_gen = alg_stream(seed, trial_index)
    trace = np.zeros(T, dtype=np.float64)
    t0 = time.perf_counter()
    res = _run_algo(algo, real, cfg, T, n_arms, alg_gen, trace)
    wall = time.perf_counter() - t0
    return TrialResult(
        regret_trace=trace,
        final_regret=float(trace[-1]),
        declared_changes=0 if res is None else res.declared_changes,
        restarts=0 if res is None else res.restarts,
        wall_seconds=wall,
        seed=trial_index)


def resolve_threads(value) -> int:
    if value == "auto":
        env_val = os.environ.get("NSBANDIT_THREADS")
        if env_val:
            try:
                n = int(env_val)
            except ValueError:
                raise ConfigError("NSBANDIT_THREADS must be an integer") from None
            if n < 1:
                raise ConfigError("NSBANDIT_THREADS must be >= 1")
            return n
        return os.cpu_count() or 1
    return int(value)


def trace_sample_indices(T: int, full: bool = False) -> np.ndarray:
    """1-indexed sample steps: floor(i*T/K) for i=1..K, K=min(T,1000)."""
    if full:
        return np.arange(1, T + 1, dtype=np.int64)
    K = min(T, 1000)
    return (np.arange(1, K + 1, dtype=np.int64) * T) // K


_WARMED: set[str] = set()


def warm_kernels(algos, cfg: dict) -> None:
    """Compile every kernel an algo list needs, outside any timed region."""
    todo = [a for a in algos if a not in _WARMED]
    if not todo:
        return
    warm_cfg = {
        "env": {"T": 64, "n_arms": 2, "problem": "uniform", "cp_model": "none",
                "param": 0.0},
        "run": {"master_seed": 0},
        "algo": "master",
        "master": dict(cfg["master"], delta="1/T"),
        "policy": cfg["policy"],
        "rr": {"eta_r": 0.1},
        "rr_p": cfg["rr_p"],
        "detector": dict(cfg["detector"], delta="1/T"),
        "glr": dict(cfg["glr"], alpha=0.25),
    }
    for algo in todo:
        run_trial(warm_cfg, 0, algo=algo)
        _WARMED.add(algo)


def run_experiment(cfg: dict, algos: list[str] | None = None,
                   log=None) -> list[AggregateResult]:
    """Run every algorithm over one environment cell, trials in parallel."""
    validate_config(cfg)
    algos = list(cfg["algos"] if algos is None else algos)
    run = cfg["run"]
    trials, T = run["trials"], cfg["env"]["T"]
    threads = resolve_threads(run["thread_count"])
    idx = trace_sample_indices(T, run["full_traces"])
    warm_kernels(algos, cfg)
    out = []
    for algo in algos:
        t_cell = time.perf_counter()
        finals = np.zeros(trials)
        declared = np.zeros(trials)
        restarts = np.zeros(trials)
        walls = np.zeros(trials)
        acc = np.zeros(idx.size)
        acc2 = np.zeros(idx.size)

        def one(i: int, algo=algo):
            r = run_trial(cfg, i, algo=algo)
            return i, r.regret_trace[idx - 1], r

        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(one, i): i for i in range(trials)}
            pending: dict[int, np.ndarray] = {}
            next_fold = 0
            for fut in as_completed(futures):
                try:
                    i, vec, r = fut.result()
                except Exception as e:
                    for f in futures:
                        f.cancel()
                    raise RuntimeError(
                        f"trial failed: algo={algo} master_seed={run['master_seed']} "
                        f"trial_index={futures[fut]}; replay with run_trial") from e
                finals[i] = r.final_regret
                declared[i] = r.declared_changes
                restarts[i] = r.restarts
                walls[i] = r.wall_seconds
                pending[i] = vec
                while next_fold in pending:  # fold in trial order: bit-stable sums
                    v = pending.pop(next_fold)
                    acc += v
                    acc2 += v * v
                    next_fold += 1
        mean = acc / trials
        var = np.maximum(acc2 / trials - mean * mean, 0.0)
        tstd = np.sqrt(var * (trials / (trials - 1))) if trials > 1 else np.zeros_like(mean)
        res = AggregateResult(
            algo=algo, problem=cfg["env"]["problem"], cp_model=cfg["env"]["cp_model"],
            param=float(cfg["env"]["param"]), horizon=T, trials=trials,
            final_regret_mean=float(finals.mean()), final_regret_std=_std(finals),
            detections_mean=float(declared.mean()), restarts_mean=float(restarts.mean()),
            wall_mean=float(walls.mean()), wall_std=_std(walls),
            trace_t=idx, trace_mean=mean, trace_std=tstd)
        out.append(res)
        if log is not None:
            log(f"cell algo={algo} T={T} problem={cfg['env']['problem']} "
                f"cp={cfg['env']['cp_model']} param={cfg['env']['param']:g} "
                f"trials={trials} regret={res.final_regret_mean:.6g} "
                f"detections={res.detections_mean:.6g} "
                f"wall={time.perf_counter() - t_cell:.2f}s")
    return out


def _std(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1)) if x.size > 1 else 0.0


def detector_benchmark(streams: int = 1000, n: int = 10_000, fa_delta: float = 1e-5,
                       delay_delta: float = 0.01, qcd_runs: int = 500,
                       qcd_horizon: int = 10_000, seed: int = 0,
                       log=None) -> dict:
    """Monte-Carlo detector suite: false alarms, detection delay, QCD runs.

    Three checks at full scale: (1) fraction of stationary Bernoulli(0.5)
    streams of length n on which the detector ever fires (target <= 2%);
    (2) fraction of 0.2-to-0.8 mean-shift streams detected within 100
    post-change samples (target >= 95%); (3) fraction of stationary
    QCD+klUCB runs declaring no change (target >= 98%).
    """
    from .glr import first_detection

    rng = np.random.default_rng(seed)
    alarms = 0
    for s in range(streams):
        stream = (rng.random(n) < 0.5).astype(np.int64)
        if first_detection(stream, fa_delta) != -1:
            alarms += 1
        if log is not None and (s + 1) % max(1, streams // 10) == 0:
            log(f"false-alarm streams {s + 1}/{streams}")
    fa_rate = alarms / streams

    change_at = 500
    within = 0
    for _ in range(streams):
        pre = (rng.random(change_at) < 0.2).astype(np.int64)
        post = (rng.random(150) < 0.8).astype(np.int64)
        k = first_detection(np.concatenate([pre, post]), delay_delta)
        if k != -1 and k <= change_at + 100:
            within += 1
    delay_rate = within / streams

    cfg = {
        "env": {"T": qcd_horizon, "n_arms": 5, "problem": "uniform",
                "cp_model": "none", "param": 0.0},
        "run": {"master_seed": seed},
        "algo": "qcd_klucb",
        "policy": {"klucb_tolerance": 1e-6, "klucb_c": 0.0},
        "detector": {"delta": "1/T", "stride": 1},
    }
    clean = 0
    for i in range(qcd_runs):
        r = run_trial(cfg, i)
        if r.declared_changes == 0:
            clean += 1
        if log is not None and (i + 1) % max(1, qcd_runs // 10) == 0:
            log(f"stationary QCD runs {i + 1}/{qcd_runs}")
    qcd_rate = clean / qcd_runs

    return {
        "false_alarm": {"streams": streams, "n": n, "delta": fa_delta,
                        "rate": fa_rate, "target": "<= 0.02", "pass": fa_rate <= 0.02},
        "detection_delay": {"streams": streams, "change_at": change_at,
                            "delta": delay_delta, "within_100_rate": delay_rate,
                            "target": ">= 0.95", "pass": delay_rate >= 0.95},
        "stationary_qcd": {"runs": qcd_runs, "horizon": qcd_horizon,
                           "zero_declared_rate": qcd_rate,
                           "target": ">= 0.98", "pass": qcd_rate >= 0.98},
    }


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{v:.6g}"


SUMMARY_COLUMNS = ("algo", "problem", "cp_model", "param", "trials",
                   "final_regret_mean", "final_regret_std", "detections_mean",
                   "restarts_mean", "wall_mean", "wall_std", "horizon")


def write_outputs(results: list[AggregateResult], output_dir: str | Path,
                  cfg: dict | None = None, figures: bool | None = None) -> list[Path]:
    """Write summary.csv, per-cell trace CSVs, robustness.csv, config echo.

    Numbers carry 6 significant digits; files are UTF-8, comma-separated,
    with a header row. The same results always produce the same bytes
    (wall-time columns excepted, being measurements).
    """
    if not results:
        raise ValueError("results must be non-empty")
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    path = outdir / "summary.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in results:
            w.writerow([r.algo, r.problem, r.cp_model, _fmt(r.param), r.trials,
                        _fmt(r.final_regret_mean), _fmt(r.final_regret_std),
                        _fmt(r.detections_mean), _fmt(r.restarts_mean),
                        _fmt(r.wall_mean), _fmt(r.wall_std), r.horizon])
    written.append(path)

    for r in results:
        path = outdir / f"trace_{r.algo}_{r.cell_id}.csv"
        with path.open("w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "regret_mean", "regret_std"])
            for t, m, s in zip(r.trace_t, r.trace_mean, r.trace_std):
                w.writerow([int(t), _fmt(m), _fmt(s)])
        written.append(path)

    path = outdir / "robustness.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algo", "problem", "cp_model", "param", "horizon",
                    "final_regret_mean", "final_regret_std"])
        for r in sorted(results, key=lambda r: (r.algo, r.problem, r.param, r.horizon)):
            w.writerow([r.algo, r.problem, r.cp_model, _fmt(r.param), r.horizon,
                        _fmt(r.final_regret_mean), _fmt(r.final_regret_std)])
    written.append(path)

    if cfg is not None:
        path = outdir / "config_echo.json"
        path.write_text(config_echo(cfg) + "\n", encoding="utf-8")
        written.append(path)

    want_figures = (cfg is not None and cfg["run"]["figures"]) if figures is None else figures
    if want_figures:
        from .figures import render_figures
        written.extend(render_figures(results, outdir))
    return written
