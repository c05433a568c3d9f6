"""Figure rendering for sweep outputs.

Figures are a visual aid rendered next to the delimited output; the CSV
stays the primary product.  The Agg backend keeps rendering headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .channel import binary_entropy

__all__ = ["render_rd_sweep", "render_bler_sweep"]


def render_rd_sweep(rows: list[tuple], path: Path) -> Path:
    """Measured distortion vs rate per blocklength, against the ideal curve.

    ``rows`` are ``(n, N, rate, target_D, measured_D, stderr, trials,
    seed)`` tuples as written to the CSV.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    grid = np.linspace(1e-4, 0.5, 400)
    ax.plot(
        1.0 - np.array([binary_entropy(d) for d in grid]),
        grid,
        "k--",
        linewidth=1,
        label="ideal rate-distortion limit",
    )
    for n in sorted({row[0] for row in rows}):
        pts = sorted((r[2], r[4], r[5]) for r in rows if r[0] == n)
        rates = [p[0] for p in pts]
        measured = [p[1] for p in pts]
        err = [p[2] for p in pts]
        ax.errorbar(
            rates, measured, yerr=err, marker="o", capsize=3,
            label=f"N = {1 << n}",
        )
    ax.set_xlabel("rate (bits/symbol)")
    ax.set_ylabel("mean distortion")
    ax.set_title("Lossy compression of a uniform binary source")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_bler_sweep(rows: list[tuple], path: Path) -> Path:
    """Measured block error rate vs rate, with the union bound dashed.

    ``rows`` are ``(n, rate, bler, union_bound, trials)`` tuples as
    written to the CSV.  Zero rates are clipped to the plot floor so the
    log axis stays usable.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    floor = 1e-6
    for n in sorted({row[0] for row in rows}):
        pts = sorted((r[1], r[2], r[3]) for r in rows if r[0] == n)
        rates = [p[0] for p in pts]
        bler = [max(p[1], floor) for p in pts]
        bound = [max(min(p[2], 1.0), floor) for p in pts]
        (line,) = ax.semilogy(rates, bler, marker="o", label=f"N = {1 << n}")
        ax.semilogy(
            rates, bound, linestyle="--", color=line.get_color(),
            label=f"N = {1 << n} union bound",
        )
    ax.set_xlabel("rate (bits/symbol)")
    ax.set_ylabel("block error rate")
    ax.set_title("SC decoding vs the reliability union bound")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
