"""Figure rendering for the command-line report paths.

Each CSV-producing subcommand can render a companion figure next to its
delimited output.  Everything goes through the Agg backend so the
commands work headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_attack_rows(rows, path: str) -> None:
    """Advantage and bounds against the per-phase query count q."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_nm: dict = {}
    for r in rows:
        by_nm.setdefault((r["n"], r["m"]), []).append(r)
    for (n, m), group in sorted(by_nm.items()):
        group = sorted(group, key=lambda r: r["q"])
        qs = [r["q"] for r in group]
        ax.plot(qs, [r["exact_adv"] for r in group], "o-", label=f"exact n={n}, m={m}")
        ax.plot(qs, [r["lower_bound"] for r in group], "--", color="gray")
        ax.plot(qs, [r["upper_bound"] for r in group], ":", color="gray")
        mc = [r["mc_adv"] for r in group]
        if any(v == v and v is not None for v in mc):
            ax.errorbar(qs, mc, yerr=[r["mc_ci"] for r in group], fmt="x", capsize=3,
                        label=f"sampled n={n}, m={m}")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=2)
    ax.set_xlabel("queries per phase q")
    ax.set_ylabel("distinguishing advantage")
    ax.legend(fontsize=8)
    ax.set_title("single-point reprogramming distinguisher")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_supo_rows(rows, path: str) -> None:
    """Purified-vs-averaged trace distances and disturbance slack."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    idx = [r["circuit"] for r in rows]
    ax1.semilogy(idx, [max(r["trace_distance"], 1e-18) for r in rows], "o")
    ax1.axhline(1e-9, color="red", linestyle="--", label="tolerance")
    ax1.set_xlabel("circuit")
    ax1.set_ylabel("trace distance")
    ax1.set_title("purified vs averaged classical")
    ax1.legend(fontsize=8)
    ax2.plot(idx, [r["bound1_slack"] for r in rows], "s")
    ax2.axhline(0.0, color="red", linestyle="--")
    ax2.set_xlabel("circuit")
    ax2.set_ylabel("mean overlap - (1 - q/2^n)")
    ax2.set_title("disturbance-bound slack")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_bounds_rows(rows, path: str, sweep_param: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if sweep_param and rows:
        xs = [r[sweep_param] for r in rows]
        ax.plot(xs, [r["log2_value"] for r in rows], "o-")
        ax.set_xlabel(f"{sweep_param} (log2)")
    else:
        ax.plot(range(len(rows)), [r["log2_value"] for r in rows], "o-")
        ax.set_xlabel("row")
    ax.set_ylabel("log2(bound)")
    ax.set_title(rows[0]["bound"] if rows else "bound sweep")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_game_rows(rows, path: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    outcomes = [r["outcome"] for r in rows]
    ax.plot(range(len(outcomes)), outcomes, ".", markersize=3)
    rate = sum(outcomes) / len(outcomes) if outcomes else 0.0
    ax.axhline(rate, color="red", linestyle="--", label=f"win rate {rate:.3f}")
    ax.set_xlabel("episode")
    ax.set_ylabel("outcome")
    ax.set_ylim(-0.1, 1.1)
    ax.legend(fontsize=8)
    ax.set_title(rows[0]["game"] if rows else "episodes")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
