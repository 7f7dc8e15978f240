"""Figures for experiment reports (requires matplotlib).

Figures are written next to the CSV files; they are derived from the same
data and carry no information the CSVs lack.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .estimation import synthesize  # noqa: E402


def plot_reconstruction_1d(path, x, truth, sample_x, samples, recon, title=""):
    """Real parts of truth, samples and reconstruction; pointwise log10 error below."""
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(7, 5.5), sharex=True, gridspec_kw={"height_ratios": [2, 1]})
    if truth is not None:
        ax0.plot(x, truth.real, "k-", lw=1.2, label="true")
    ax0.plot(sample_x, samples.real, "o", ms=3, mfc="none", color="tab:red", label="samples")
    ax0.plot(x, recon.real, "-", lw=1.0, color="tab:blue", label="reconstruction")
    ax0.set_ylabel("real part")
    ax0.legend(loc="upper right", fontsize=8)
    if title:
        ax0.set_title(title)
    if truth is not None:
        err = np.abs(recon - truth)
        ax1.semilogy(x, np.maximum(err, 1e-17), color="tab:blue")
        ax1.set_ylabel("|error|")
    ax1.set_xlabel("x")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_error_vs_snr(path, aggregates, title=""):
    """Median frequency error against SNR."""
    rows = [r for r in aggregates if "freq_err_max_median" in r and math.isfinite(r["snr_db"])]
    fig, ax = plt.subplots(figsize=(6, 4))
    if rows:
        snr = [r["snr_db"] for r in rows]
        ax.semilogy(snr, [r["freq_err_max_median"] for r in rows], "o-", label="fixed point (median)")
        ax.fill_between(
            snr,
            [max(r["freq_err_max_median"] - r["freq_err_max_std"], 1e-16) for r in rows],
            [r["freq_err_max_median"] + r["freq_err_max_std"] for r in rows],
            alpha=0.2,
        )
        ax.legend()
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("max frequency error")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_esprit_comparison(path, trials):
    """ESPRIT error minus fixed-point error per trial; positive favours the fixed point."""
    rows = [r for r in trials if "esprit_minus_fp" in r and math.isfinite(r["snr_db"])]
    fig, ax = plt.subplots(figsize=(6, 4))
    if rows:
        ax.scatter([r["snr_db"] for r in rows], [r["esprit_minus_fp"] for r in rows], s=8)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("ESPRIT error - fixed-point error")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_curve_2d(path, model, estimate, X, samples, n=128):
    """True and reconstructed real parts on the unit square, with the sampling curve."""
    g = np.linspace(0.0, 1.0, n)
    P = np.stack(np.meshgrid(g, g, indexing="xy"), axis=-1).reshape(-1, 2)
    panels = []
    if model is not None:
        panels.append(("true", synthesize(model, P).reshape(n, n)))
    if estimate is not None:
        panels.append(("reconstruction", synthesize(estimate, P).reshape(n, n)))
    if len(panels) == 2:
        panels.append(("error", panels[1][1] - panels[0][1]))
    fig, axes = plt.subplots(1, len(panels) + 1, figsize=(4 * (len(panels) + 1), 3.8))
    axes = np.atleast_1d(axes)
    sc = axes[0].scatter(X[:, 0], X[:, 1], c=samples.real, s=4, cmap="coolwarm")
    axes[0].set_title("samples (real part)")
    fig.colorbar(sc, ax=axes[0], shrink=0.8)
    for ax, (name, Z) in zip(axes[1:], panels):
        im = ax.imshow(Z.real, origin="lower", extent=(0, 1, 0, 1), cmap="coolwarm")
        ax.plot(X[:, 0], X[:, 1], "k-", lw=0.6)
        ax.set_title(name)
        fig.colorbar(im, ax=ax, shrink=0.8)
    for ax in axes:
        ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def report_figures(report, cfg, out_dir) -> dict:
    """Render the figures appropriate to an experiment; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    prob = report.artifacts["problem"]
    details = report.artifacts["details"]
    if not details:
        return files
    first = details[0]
    title = f"{cfg.experiment}, trial 0"
    if prob.smap.dim == 1:
        obs = prob.observed
        files["fig_reconstruction"] = out / "reconstruction.png"
        plot_reconstruction_1d(
            files["fig_reconstruction"],
            prob.nodes[:, 0],
            prob.truth_nodes,
            prob.points[obs, 0],
            first["samples"][obs],
            first["result"].generator,
            title,
        )
    else:
        files["fig_curve"] = out / "curve.png"
        plot_curve_2d(files["fig_curve"], cfg.model, first["estimate"], prob.points, first["samples"])
    if len(report.aggregates) > 1:
        files["fig_error_vs_snr"] = out / "error_vs_snr.png"
        plot_error_vs_snr(files["fig_error_vs_snr"], report.aggregates, cfg.experiment)
    if any("esprit_minus_fp" in r for r in report.trials):
        files["fig_esprit"] = out / "esprit_comparison.png"
        plot_esprit_comparison(files["fig_esprit"], report.trials)
    return files
