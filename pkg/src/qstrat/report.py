"""Batch report rendering: CSV summaries plus matplotlib figures.

Every renderer writes its delimited summary and PNG figures into a target
directory and returns the file names, leaving stdout free for the CLI's JSON
payloads.
"""

from __future__ import annotations

import csv
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .games import CoinFlipReport, GameValueResult  # noqa: E402
from .interaction import OutcomeDistribution  # noqa: E402


def _save(fig, out_dir: str, name: str) -> str:
    path = os.path.join(out_dir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return name


def render_interact(dists: dict[str, OutcomeDistribution], out_dir: str) -> list[str]:
    """Joint-distribution bars (one group per outcome pair, one bar per
    method) plus a CSV of the entries."""
    os.makedirs(out_dir, exist_ok=True)
    methods = sorted(dists)
    pairs = sorted({p for d in dists.values() for p in d.pairs()})
    written = []

    with open(os.path.join(out_dir, "interaction.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["outcome_a", "outcome_b"] + methods)
        for a, b in pairs:
            writer.writerow([a, b] + [f"{dists[m].entries.get((a, b), 0.0):.12g}"
                                      for m in methods])
    written.append("interaction.csv")

    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(pairs)), 3.2))
    width = 0.8 / max(1, len(methods))
    for i, m in enumerate(methods):
        xs = [k + i * width for k in range(len(pairs))]
        ax.bar(xs, [dists[m].entries.get(p, 0.0) for p in pairs], width, label=m)
    ax.set_xticks([k + 0.4 - width / 2 for k in range(len(pairs))])
    ax.set_xticklabels([f"({a},{b})" for a, b in pairs], rotation=45, ha="right")
    ax.set_ylabel("probability")
    ax.legend()
    written.append(_save(fig, out_dir, "interaction.png"))
    return written


def render_coinflip(report: CoinFlipReport, out_dir: str) -> list[str]:
    """Honest agreement and forcing probabilities against the 1/sqrt(2) and
    1/2 floors, plus a CSV of every reported number."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    doc = report.to_json_dict()

    with open(os.path.join(out_dir, "coinflip.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for b, p in doc["agreement"].items():
            writer.writerow([f"agreement_{b}", f"{p:.12g}"])
        writer.writerow(["abort_probability", f"{doc['abort_probability']:.12g}"])
        for b, f in doc["forcing"].items():
            for key in ("alice_forced", "bob_forced", "max_forced", "product"):
                writer.writerow([f"forcing_{b}_{key}", f"{f[key]:.12g}"])
    written.append("coinflip.csv")

    outcomes = sorted(report.forcing)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.bar(range(len(outcomes)), [report.agreement[b] for b in outcomes], 0.5)
    ax1.axhline(0.5, color="gray", ls="--", lw=1)
    ax1.set_xticks(range(len(outcomes)))
    ax1.set_xticklabels(outcomes)
    ax1.set_title("honest agreement")
    ax1.set_ylim(0, 1)

    width = 0.35
    alice = [report.forcing[b].alice_forced for b in outcomes]
    bob = [report.forcing[b].bob_forced for b in outcomes]
    ax2.bar([k - width / 2 for k in range(len(outcomes))], alice, width, label="force Alice")
    ax2.bar([k + width / 2 for k in range(len(outcomes))], bob, width, label="force Bob")
    ax2.axhline(1 / math.sqrt(2), color="crimson", ls="--", lw=1, label="1/sqrt(2)")
    ax2.axhline(0.5, color="gray", ls=":", lw=1)
    ax2.set_xticks(range(len(outcomes)))
    ax2.set_xticklabels(outcomes)
    ax2.set_title("optimal forcing")
    ax2.set_ylim(0, 1.05)
    ax2.legend(fontsize=8)
    written.append(_save(fig, out_dir, "coinflip.png"))
    return written


def render_game(result: GameValueResult, out_dir: str,
                minmax: tuple[float, float] | None = None) -> list[str]:
    """Game value (and the seat-swapped check when present) with solver
    diagnostics in the CSV."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    with open(os.path.join(out_dir, "game.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerow(["value", f"{result.value:.12g}"])
        writer.writerow(["duality_gap", f"{result.duality_gap:.12g}"])
        writer.writerow(["status", result.solution.status])
        if minmax is not None:
            writer.writerow(["maximin", f"{minmax[0]:.12g}"])
            writer.writerow(["minimax", f"{minmax[1]:.12g}"])
    written.append("game.csv")

    labels = ["value"]
    values = [result.value]
    if minmax is not None:
        labels = ["maximin", "minimax"]
        values = list(minmax)
    fig, ax = plt.subplots(figsize=(3.6, 3.2))
    ax.bar(range(len(values)), values, 0.5)
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels)
    ax.set_ylabel("expected payoff")
    ax.set_title("game value")
    written.append(_save(fig, out_dir, "game.png"))
    return written
