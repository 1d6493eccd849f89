"""PNG figures rendered from experiment records (optional, ``--figures``).

The CSV remains the authoritative output; these plots are a convenience
written next to it, one file per panel family.
"""
from __future__ import annotations

import os
from collections import defaultdict
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..rmt_theory import semicircle_pdf  # noqa: E402

plt.rcParams.update({"figure.dpi": 110, "axes.grid": True, "grid.alpha": 0.3, "font.size": 9})


def _modes(rows):
    return sorted({r["mode"] for r in rows})


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_esd(rows: Sequence[dict], stem: str) -> list[str]:
    """Histogram of the first trial per mode with the semicircle, plus spike alignments over all trials."""
    modes = _modes(rows)
    first = min(r["trial"] for r in rows)
    fig, axes = plt.subplots(2, len(modes), figsize=(3.2 * len(modes), 5.4), squeeze=False)
    grid = np.linspace(-2.2, 2.2, 400)
    for c, mode in enumerate(modes):
        ax = axes[0, c]
        hist = [r for r in rows if r["mode"] == mode and r["kind"] == "hist" and r["trial"] == first]
        xs = np.array([r["x"] for r in hist])
        width = xs[1] - xs[0] if len(xs) > 1 else 1.0
        ax.bar(xs, [r["empirical"] for r in hist], width=width, alpha=0.5, label="empirical")
        ax.plot(grid, semicircle_pdf(grid), "k-", lw=1, label="semicircle")
        spikes = [r for r in rows if r["mode"] == mode and r["kind"] == "spike_position" and r["trial"] == first]
        for r in spikes:
            ax.axvline(r["empirical"], color="C3", lw=0.8)
            if r["theoretical"] is not None:
                ax.axvline(r["theoretical"], color="k", ls=":", lw=0.8)
        ax.set_title(f"mode {mode}")
        ax.set_xlabel("centered, scaled eigenvalue")

        ax = axes[1, c]
        al = [r for r in rows if r["mode"] == mode and r["kind"] == "spike_alignment"]
        ax.scatter([r["rho"] for r in al], [r["empirical"] for r in al], s=10, label="simulation")
        rho = np.linspace(0.5, max(r["rho"] for r in al) * 1.05, 200)
        ax.plot(rho, np.clip(1 - rho ** -2.0, 0, None), "k-", lw=1, label="theory")
        ax.set_xlabel("rho")
        ax.set_ylabel("squared alignment")
    axes[0, 0].legend(fontsize=7)
    axes[1, 0].legend(fontsize=7)
    return [_save(fig, f"{stem}_esd.png")]


def plot_alignment_sweep(rows: Sequence[dict], stem: str) -> list[str]:
    modes = _modes(rows)
    fig, axes = plt.subplots(1, len(modes), figsize=(3.4 * len(modes), 3.2), squeeze=False)
    for c, mode in enumerate(modes):
        ax = axes[0, c]
        for est, style in (("mlsvd", "o"), ("hooi", "s")):
            sel = [r for r in rows if r["mode"] == mode and r["estimator"] == est]
            ax.errorbar([r["omega"] for r in sel], [r["mean"] for r in sel], yerr=[r["std"] for r in sel],
                        fmt=style, ms=3, capsize=2, label=est)
        th = [r for r in rows if r["mode"] == mode and r["estimator"] == "mlsvd"]
        ax.plot([r["omega"] for r in th], [r["theoretical"] for r in th], "k-", lw=1, label="theory")
        ax.set_title(f"mode {mode}")
        ax.set_xlabel("omega")
        ax.set_ylim(-0.02, 1.02)
    axes[0, 0].set_ylabel("mean alignment")
    axes[0, 0].legend(fontsize=7)
    return [_save(fig, f"{stem}_alignment_sweep.png")]


def plot_hooi_scaling(rows: Sequence[dict], stem: str) -> list[str]:
    modes = _modes(rows)
    acc = defaultdict(lambda: defaultdict(list))
    for r in rows:
        acc[r["mode"]][r["n_param"]].append(r)
    fig, axes = plt.subplots(1, 2, figsize=(7.5, 3.2))
    for mode in modes:
        ns = sorted(acc[mode])
        a0 = [np.mean([r["align_init"] for r in acc[mode][n]]) for n in ns]
        th = [np.mean([r["align_init_theory"] for r in acc[mode][n]]) for n in ns]
        a1 = [np.mean([r["align_iter1"] for r in acc[mode][n]]) for n in ns]
        gap = [np.mean([r["rescaled_gap"] for r in acc[mode][n]]) for n in ns]
        line, = axes[0].plot(ns, a0, "o--", ms=3, label=f"mode {mode}, t=0")
        axes[0].plot(ns, th, ":", color=line.get_color())
        axes[0].plot(ns, a1, "s-", ms=3, color=line.get_color(), label=f"mode {mode}, t=1")
        axes[1].plot(ns, gap, "o-", ms=3, color=line.get_color(), label=f"mode {mode}")
    axes[0].set_xlabel("N")
    axes[0].set_ylabel("mean alignment")
    axes[1].set_xlabel("N")
    axes[1].set_ylabel("(1 - alignment after 1 iteration) sqrt(sigma)")
    for ax in axes:
        ax.set_xscale("log")
        ax.legend(fontsize=6)
    return [_save(fig, f"{stem}_hooi_scaling.png")]


PLOTTERS = {
    "esd": plot_esd,
    "alignment_sweep": plot_alignment_sweep,
    "hooi_scaling": plot_hooi_scaling,
}


def render(experiment: str, rows: Sequence[dict], out_path: str) -> list[str]:
    """Write figures for ``experiment`` next to ``out_path``; returns the written paths."""
    plotter = PLOTTERS.get(experiment)
    if plotter is None or not rows:
        return []
    stem = os.path.splitext(out_path)[0]
    return plotter(rows, stem)
