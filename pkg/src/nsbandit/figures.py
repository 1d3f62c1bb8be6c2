"""PNG figures rendered next to the CSV outputs.

Two figure families, matching the two delimited outputs: one regret-trace
plot per environment cell overlaying every algorithm's mean trace with a
shaded +-1 std band, and one robustness plot per problem showing final
regret against the non-stationarity parameter whenever a sweep covers
several parameter values. Rendering is headless (Agg) and deterministic.
"""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_COLORS = {
    "master": "#1f77b4", "rr": "#ff7f0e", "rr_p": "#2ca02c",
    "qcd_ucb": "#d62728", "qcd_klucb": "#9467bd", "glr_klucb": "#8c564b",
    "oracle": "#7f7f7f", "fixed_worst": "#bcbd22",
}


def _color(algo: str) -> str:
    return _COLORS.get(algo, "#17becf")


def render_figures(results, output_dir: str | Path) -> list[Path]:
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    cells = defaultdict(list)
    for r in results:
        cells[r.cell_id].append(r)
    for cell_id, group in sorted(cells.items()):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        for r in sorted(group, key=lambda r: r.algo):
            ax.plot(r.trace_t, r.trace_mean, label=r.algo, color=_color(r.algo), lw=1.5)
            ax.fill_between(r.trace_t, r.trace_mean - r.trace_std,
                            r.trace_mean + r.trace_std, color=_color(r.algo), alpha=0.15)
        g = group[0]
        ax.set_xlabel("t")
        ax.set_ylabel("cumulative dynamic regret")
        ax.set_title(f"{g.problem}, {g.cp_model} (param={g.param:g}), T={g.horizon}, "
                     f"{g.trials} trials")
        ax.legend(loc="upper left", fontsize=9)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = outdir / f"regret_{cell_id}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    by_problem = defaultdict(lambda: defaultdict(list))
    for r in results:
        by_problem[(r.problem, r.horizon)][r.algo].append(r)
    for (problem, horizon), algo_map in sorted(by_problem.items()):
        if max(len({r.param for r in rs}) for rs in algo_map.values()) < 2:
            continue
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        for algo, rs in sorted(algo_map.items()):
            rs = sorted(rs, key=lambda r: r.param)
            ax.errorbar([r.param for r in rs], [r.final_regret_mean for r in rs],
                        yerr=[r.final_regret_std for r in rs], label=algo,
                        color=_color(algo), marker="o", ms=4, lw=1.5, capsize=3)
        ax.set_xlabel("non-stationarity parameter")
        ax.set_ylabel("final dynamic regret")
        ax.set_title(f"{problem}, T={horizon}")
        ax.legend(fontsize=9)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = outdir / f"robustness_{problem}_T{horizon}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
