"""Figure rendering for experiment reports.

Every experiment renders one PNG next to its CSV: counter trajectories per
arrival, with one line per configuration where the experiment compares
several.  Uses the Agg backend so no display is needed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

COUNTER_STYLES = (
    ("check_calls", "tab:blue"),
    ("step_checks", "tab:orange"),
    ("sat_hits", "tab:green"),
    ("fix_seeds", "tab:red"),
)


def _arrivals(rows, **match):
    out = []
    for row in rows:
        if row.get("row") != "arrival":
            continue
        if all(row.get(k) == v for k, v in match.items()):
            out.append(row)
    return out


def _verdict_marks(ax, arrivals):
    for row in arrivals:
        if row["verdict"] != "inconclusive":
            ax.axvline(row["arrival_index"], color="black", ls=":", lw=1)
            ax.text(
                row["arrival_index"], ax.get_ylim()[1], row["verdict"],
                ha="right", va="top", fontsize=8, rotation=90,
            )


def render_counters(rows, path: str, title: str) -> None:
    arrivals = _arrivals(rows)
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = [r["arrival_index"] for r in arrivals]
    for field, color in COUNTER_STYLES:
        ax.plot(xs, [r[field] for r in arrivals], label=field, color=color)
    ax.set_xlabel("arrival")
    ax.set_ylabel("count per arrival")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _verdict_marks(ax, arrivals)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_config_comparison(rows, path: str, title: str,
                             field: str = "check_calls") -> None:
    configs = []
    for row in rows:
        name = row.get("config")
        if name and name not in configs:
            configs.append(name)
    fig, ax = plt.subplots(figsize=(7, 4))
    for name in configs:
        arrivals = _arrivals(rows, config=name)
        xs = [r["arrival_index"] for r in arrivals]
        ax.plot(xs, [r[field] for r in arrivals], label=name)
    ax.set_xlabel("arrival")
    ax.set_ylabel(f"{field} per arrival")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_experiment(name: str, rows, path: str) -> None:
    if name == "grouping":
        render_config_comparison(rows, path, "optimization comparison")
    else:
        render_counters(rows, path, name)
