"""Static matplotlib figures written next to the CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import OutputError  # noqa: E402


def _save(fig, path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, dpi=120, bbox_inches="tight")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    finally:
        plt.close(fig)
    return path


def plot_profiles(cols, table, path, title="", exact=None):
    """Density, velocity and pressure of a 1D snapshot; ``exact`` is an optional (x, V) pair."""
    x = table[:, cols.index("x")]
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.8))
    for ax, name, k in zip(axes, ("rho", "v1", "p"), range(3)):
        ax.plot(x, table[:, cols.index(name)], "o", ms=2.5, mfc="none", label="numerical")
        if exact is not None:
            ax.plot(exact[0], exact[1][:, k], "k-", lw=0.9, label="exact")
        ax.set_xlabel("x")
        ax.set_title(name)
        if name != "v1" and np.all(table[:, cols.index(name)] > 0):
            vals = table[:, cols.index(name)]
            if vals.max() / vals.min() > 1e3:
                ax.set_yscale("log")
    if exact is not None:
        axes[0].legend(fontsize=8)
    fig.suptitle(title)
    return _save(fig, path)


def plot_field_2d(cols, table, storage_shape, path, title="", quantity="ln_rho", levels=30):
    """Contours of ln(rho) (or another column) for a 2D snapshot."""
    ny, nx = storage_shape
    a, b = cols[0], cols[1]
    X = table[:, 0].reshape(ny, nx)
    Y = table[:, 1].reshape(ny, nx)
    if quantity == "ln_rho":
        Z = np.log(table[:, cols.index("rho")]).reshape(ny, nx)
    else:
        Z = table[:, cols.index(quantity)].reshape(ny, nx)
    span = (X.max() - X.min(), Y.max() - Y.min())
    scale = 6.0 / max(span)
    fig, ax = plt.subplots(figsize=(max(3.0, span[0] * scale) + 1.5, max(3.0, span[1] * scale)))
    cs = ax.contourf(X, Y, Z, levels=levels, cmap="viridis")
    ax.contour(X, Y, Z, levels=levels, colors="k", linewidths=0.25)
    fig.colorbar(cs, ax=ax, label=quantity)
    ax.set_aspect("equal")
    ax.set_xlabel(a)
    ax.set_ylabel(b)
    ax.set_title(title)
    return _save(fig, path)


def plot_convergence(report, path, title=""):
    """Log-log l1 and l-infinity errors against the cell count."""
    N = np.asarray(report.resolutions, dtype=float)
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    ax.loglog(N, report.l1, "o-", label="l1")
    ax.loglog(N, report.linf, "s-", label="linf")
    ax.set_xlabel("N")
    ax.set_ylabel("error in rho")
    ax.grid(True, which="both", lw=0.3)
    ax.legend()
    ax.set_title(title)
    return _save(fig, path)
