"""Figure rendering for experiment reports (PNG files next to the CSVs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_fidelity_figure(build, report, path, title=""):
    """Per-pair optimized fidelities (dots), their per-input average (line),
    and the library-applied fidelities (band), against the classical bound."""
    fig, ax = plt.subplots(figsize=(7, 4))
    pos = {(inp.point.theta, inp.point.phi): i for i, inp in enumerate(build.inputs)}
    ax.plot(
        [p.input_index for p in build.pairs],
        [p.fidelity for p in build.pairs],
        ".", color="crimson", ms=2, alpha=0.25, label="optimized (per pair)", zorder=1,
    )
    lib_x = [pos[(p.point.theta, p.point.phi)] for p in report.pairs]
    ax.plot(
        lib_x,
        [p.fidelity for p in report.pairs],
        ".", color="royalblue", ms=2, alpha=0.35, label="library (per pair)", zorder=2,
    )
    # probability-weighted average of the optimized fidelities per input
    acc = np.zeros(len(build.inputs))
    mass = np.zeros(len(build.inputs))
    for p in build.pairs:
        acc[p.input_index] += p.probability * p.fidelity
        mass[p.input_index] += p.probability
    ax.plot(np.arange(len(acc)), acc / np.maximum(mass, 1e-300), "k-", lw=1,
            label="optimized (input average)", zorder=3)
    if report.benchmark is not None:
        ax.axhline(report.benchmark, ls="--", color="gray", lw=1, label="classical bound")
    ax.set_xlabel("input state index (theta-major grid order)")
    ax.set_ylabel("fidelity")
    ax.set_ylim(0, 1.02)
    ax.set_title(title)
    ax.legend(loc="lower left", fontsize=8)
    _save(fig, path)


def render_per_input_figure(report, path, title=""):
    """Per-input mean fidelity across the grid with the classical bound."""
    fig, ax = plt.subplots(figsize=(7, 4))
    thetas = [pt.theta for pt in report.points]
    ax.plot(thetas, report.per_input_mean, ".", ms=3, color="royalblue",
            label="per-input mean")
    if report.benchmark is not None:
        ax.axhline(report.benchmark, ls="--", color="gray", lw=1, label="classical bound")
    ax.set_xlabel("theta")
    ax.set_ylabel("fidelity")
    ax.set_ylim(0, 1.02)
    ax.set_title(title)
    ax.legend(loc="lower left", fontsize=8)
    _save(fig, path)


def render_prior_sweep_figure(rows_by_scheme, path, title="prior sweep"):
    """Grand mean vs mean occupation per scheme, with the classical curve."""
    fig, ax = plt.subplots(figsize=(6, 4))
    fcl_drawn = False
    for scheme, rows in rows_by_scheme.items():
        xs = [r["mean_n"] for r in rows]
        ax.plot(xs, [r["grand_mean"] for r in rows], "o-", ms=4, label=scheme)
        if not fcl_drawn:
            ax.plot(xs, [r["f_cl"] for r in rows], "--", color="gray", label="classical")
            fcl_drawn = True
    ax.set_xlabel("mean occupation")
    ax.set_ylabel("mean fidelity")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def render_unequal_figure(varied, values, grand_means, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(values, grand_means, "o-", ms=5)
    ax.set_xlabel(f"N_{varied.upper()}")
    ax.set_ylabel("grand mean fidelity")
    ax.set_xticks(values)
    ax.set_title("robustness to particle-number imbalance")
    _save(fig, path)


def render_dicke_figure(profiles, benchmarks, path):
    """Per-theta mean fidelity per excitation level vs its classical bound."""
    fig, ax = plt.subplots(figsize=(6, 4))
    colors = plt.cm.viridis(np.linspace(0, 0.8, len(profiles)))
    for (level, thetas, means), color in zip(profiles, colors):
        ax.plot(thetas, means, ".", ms=3, color=color, label=f"n = {level}")
        ax.axhline(benchmarks[level], ls="--", color=color, lw=1)
    ax.set_xlabel("theta")
    ax.set_ylabel("fidelity")
    ax.set_ylim(0, 1.02)
    ax.set_title("rotated Dicke states through the coherent-built library")
    ax.legend(fontsize=8)
    _save(fig, path)


def render_benchmark_figure(curve, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(curve.abscissa, curve.values, "o-", ms=4)
    ax.set_xlabel(curve.abscissa_name)
    ax.set_ylabel("classical fidelity")
    ax.set_title(f"classical bound ({curve.kind})")
    _save(fig, path)
