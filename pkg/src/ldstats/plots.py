"""Figure rendering for the CLI report paths.

Figures are written straight to files (Agg backend); the delimited
tables remain the canonical output, figures are an optional companion.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_histogram_figure(rows: list[tuple[str, int]], path: str, title: str | None = None):
    """Bar chart of the log10 class counts produced by the hist command."""
    labels = [r[0] for r in rows]
    counts = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(np.arange(len(rows)), counts, color="#4878b0", edgecolor="black", linewidth=0.4)
    ax.set_xticks(np.arange(len(rows)))
    ax.set_xticklabels(labels, rotation=0)
    ax.set_xlabel("count class (zero, then $10^n \\leq X < 10^{n+1}$)")
    ax.set_ylabel("cultures")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_ellipse_figure(result, inference, path: str, truth=None):
    """Confidence ellipse for (alpha, rho) with marginal interval bars."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    ell = inference.ellipse
    if ell is not None:
        pts = ell.points(256)
        ax.plot(pts[:, 0], pts[:, 1], color="#b04848",
                label=f"{inference.level:.0%} region")
    ax.plot([result.alpha_hat], [result.rho_hat], "o", color="black", label="estimate")
    if inference.ci_alpha is not None:
        ax.plot(inference.ci_alpha, [result.rho_hat] * 2, color="#4878b0", lw=1.5)
    if inference.ci_rho is not None:
        ax.plot([result.alpha_hat] * 2, inference.ci_rho, color="#4878b0", lw=1.5)
    if truth is not None:
        ax.plot([truth[0]], [truth[1]], "x", color="green", label="reference")
    ax.set_xlabel(r"$\alpha$ (expected mutations)")
    ax.set_ylabel(r"$\rho$ (relative fitness)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_mse_figure(rows: list[dict], path: str):
    """Grouped bars of MSE(alpha) and MSE(rho) per grid cell and method."""
    cells = sorted({(r["alpha"], r["rho"]) for r in rows})
    methods = sorted({r["method"] for r in rows})
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    width = 0.8 / max(len(methods), 1)
    x = np.arange(len(cells))
    for panel, key in zip(axes, ("mse_alpha", "mse_rho")):
        for j, method in enumerate(methods):
            vals = []
            for cell in cells:
                match = [r for r in rows
                         if (r["alpha"], r["rho"]) == cell and r["method"] == method]
                v = match[0][key] if match else float("nan")
                vals.append(v if v is not None else float("nan"))
            panel.bar(x + j * width, vals, width, label=method)
        panel.set_xticks(x + 0.4 - width / 2)
        panel.set_xticklabels([f"({a:g},{r:g})" for a, r in cells], rotation=45)
        panel.set_ylabel(key.replace("_", " "))
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
