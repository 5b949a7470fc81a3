"""Figure rendering for benchmark reports.

Takes the report JSON produced by `bench.build_report` and writes PNG
files next to the delimited output: per-strategy solve-time statistics,
solve-rate bars, and a per-constraint speedup strip on a log scale with
the clamped points (pinned / conservative) marked.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_STRATEGY_ORDER = ("naive", "epoch", "hybrid", "alpha-beta", "alpha-beta-table")


def _ordered(names) -> list[str]:
    keyed = {n: i for i, n in enumerate(_STRATEGY_ORDER)}
    return sorted(names, key=lambda n: (keyed.get(n, len(keyed)), n))


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_times(report: dict, path: Path) -> Path:
    """Median/mean solve time per strategy, with stddev whiskers."""
    summary = report["summary"]
    names = _ordered(summary)
    medians = [summary[n]["median_ms"] for n in names]
    means = [summary[n]["mean_ms"] for n in names]
    stds = [summary[n]["stddev_ms"] for n in names]
    x = range(len(names))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar([i - 0.2 for i in x], medians, width=0.4, label="median",
           color="#4878d0")
    ax.bar([i + 0.2 for i in x], means, width=0.4, yerr=stds, capsize=3,
           label="mean ± stddev", color="#ee854a")
    ax.set_xticks(list(x), names, rotation=20, ha="right")
    ax.set_ylabel("solve time (ms)")
    ax.set_title("Per-constraint solve time by strategy")
    ax.legend()
    return _save(fig, path)


def render_solve_rates(report: dict, path: Path) -> Path:
    summary = report["summary"]
    names = _ordered(summary)
    rates = [100 * summary[n]["solve_rate"] for n in names]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(names, rates, color="#6acc64")
    ax.set_ylim(0, 105)
    ax.set_ylabel("solve rate (%)")
    ax.set_title("Constraints decided within the timeout")
    ax.tick_params(axis="x", rotation=20)
    for i, r in enumerate(rates):
        ax.text(i, r + 1, f"{r:.1f}", ha="center", fontsize=8)
    return _save(fig, path)


def render_speedups(report: dict, path: Path) -> Path:
    """Speedup vs naive, one point per constraint, log scale. Clamped
    points keep their annotation as a marker style."""
    ups = report.get("speedups", [])
    names = _ordered({u["strategy"] for u in ups})
    fig, ax = plt.subplots(figsize=(7, 4.5))
    markers = {"": ("o", "#4878d0", "measured"),
               "conservative": ("^", "#ee854a", "conservative (naive timeout)"),
               "pinned": ("v", "#d65f5f", "pinned (strategy timeout)")}
    seen_notes = set()
    for i, name in enumerate(names):
        mine = [u for u in ups if u["strategy"] == name]
        for u in mine:
            marker, color, label = markers[u["annotation"]]
            key = u["annotation"]
            ax.scatter([i], [u["speedup"]], marker=marker, color=color,
                       alpha=0.55,
                       label=label if key not in seen_notes else None)
            seen_notes.add(key)
    medians = report.get("median_speedups", {})
    for i, name in enumerate(names):
        if name in medians:
            ax.hlines(medians[name], i - 0.3, i + 0.3, color="black",
                      linewidth=2,
                      label="median" if i == 0 else None)
    ax.axhline(1.0, color="gray", linestyle=":", linewidth=1)
    ax.set_yscale("log")
    ax.set_xticks(range(len(names)), names, rotation=20, ha="right")
    ax.set_ylabel("speedup over naive (log)")
    ax.set_title("Per-constraint speedup vs naive")
    if ups:
        ax.legend(fontsize=8)
    return _save(fig, path)


def render_report_figures(report: dict, out_dir: str | Path,
                          stem: str = "bench") -> list[Path]:
    """All figures for a report, written as `<stem>_<kind>.png`."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [
        render_times(report, out / f"{stem}_times.png"),
        render_solve_rates(report, out / f"{stem}_solve_rates.png"),
    ]
    if report.get("speedups"):
        paths.append(render_speedups(report, out / f"{stem}_speedups.png"))
    return paths
