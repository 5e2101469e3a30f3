"""Figure rendering for report files (headless matplotlib, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_spectrum(eigenvalues, zero_tolerance, path, title=""):
    """Low eigenvalues with the zero-classification band."""
    w = np.asarray(eigenvalues, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.axhspan(-zero_tolerance, zero_tolerance, color="0.85", zorder=0,
               label=f"zero band (tol = {zero_tolerance:.2e})")
    ax.plot(np.arange(w.size), w, "o", ms=5)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("eigenvalue number")
    ax.set_ylabel("pencil eigenvalue")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_steklov(computed, analytic, path, title=""):
    """Computed boundary spectrum against the analytic integers."""
    fig, ax = plt.subplots(figsize=(6, 4))
    n = np.arange(len(computed))
    ax.plot(n, analytic, "k--", lw=1, label="analytic")
    ax.plot(n, computed, "o", ms=5, label="computed")
    ax.set_xlabel("mode number")
    ax.set_ylabel("Steklov eigenvalue")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_convergence(h_values, series, path, title=""):
    """Log-log residual/eigenvalue magnitudes against h, with an h^2 guide."""
    h = np.asarray(h_values, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, vals in series.items():
        vals = np.asarray(vals, dtype=float)
        keep = vals > 0
        if keep.any():
            ax.loglog(h[keep], vals[keep], "o-", label=name)
    ref = min(v[0] for v in (np.asarray(v, float) for v in series.values())
              if np.all(np.asarray(v) > 0)) if series else 1.0
    ax.loglog(h, ref * (h / h[0]) ** 2, "k:", lw=1, label="order 2")
    ax.set_xlabel("mesh size h")
    ax.set_ylabel("magnitude")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_mesh(ymesh, path, title=""):
    """Parameter-domain triangulations of every face, side by side."""
    n = len(ymesh.faces)
    fig, axes = plt.subplots(1, n, figsize=(4 * n, 4), squeeze=False)
    for ax, fm in zip(axes[0], ymesh.faces):
        ax.triplot(fm.vertices[:, 0], fm.vertices[:, 1], fm.triangles,
                   lw=0.4, color="0.4")
        for edges, color in ((fm.sigma_edges, "tab:blue"), (fm.gamma_edges, "tab:red")):
            for a, b in edges:
                ax.plot(fm.vertices[[a, b], 0], fm.vertices[[a, b], 1],
                        color=color, lw=1.2)
        ax.set_aspect("equal")
        ax.set_title(f"{fm.kind} ({fm.n_vertices} vertices)", fontsize=9)
    fig.suptitle(title)
    return _save(fig, path)


def plot_hopf(hopf, r, theta, path, title=""):
    """|H| and Im H over the punctured parameter disk."""
    R, T = np.meshgrid(r, theta, indexing="ij")
    X, Y = R * np.cos(T), R * np.sin(T)
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for ax, field, label in ((axes[0], np.abs(hopf.H), "|H|"),
                             (axes[1], hopf.H.imag, "Im H")):
        pc = ax.pcolormesh(X, Y, field, shading="gouraud")
        fig.colorbar(pc, ax=ax, shrink=0.8)
        ax.set_aspect("equal")
        ax.set_title(label, fontsize=9)
    fig.suptitle(title)
    return _save(fig, path)
