"""Report figures, rendered off-screen with the Agg canvas."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .decay import DecayFit, tail_profile
from .grid import VectorField

COLORS = ("#268bd2", "#dc322f", "#859900", "#d33682", "#b58900")


def _figure(w=6.0, h=3.5):
    fig = Figure(figsize=(w, h), dpi=120)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    return Path(path)


def plot_profile(u: VectorField, path, title="ground state"):
    g = u.grid
    if g.dim == 1:
        fig = _figure()
        ax = fig.add_subplot()
        x = g.axes()[0]
        for i, row in enumerate(u.values):
            ax.plot(x, row, color=COLORS[i % len(COLORS)], lw=1.2, label=f"$u_{i + 1}$")
        ax.set_xlabel("$x$")
        ax.legend(frameon=False)
    else:
        fig = _figure(5.0, 4.2)
        ax = fig.add_subplot()
        amp = u.pointwise_norm().reshape(g.shape)
        im = ax.imshow(amp.T, origin="lower", extent=(0, g.box_lengths[0], 0, g.box_lengths[1]), cmap="viridis")
        fig.colorbar(im, ax=ax, label="$|u|$")
        ax.set_xlabel("$x$")
        ax.set_ylabel("$y$")
    ax.set_title(title)
    return _save(fig, path)


def plot_history(history, path):
    fig = _figure()
    ax1 = fig.add_subplot(1, 2, 1)
    ax2 = fig.add_subplot(1, 2, 2)
    h = np.asarray(history, dtype=float)
    it = np.arange(len(h))
    gap = h[:, 0] - h[:, 0].min()
    ax1.semilogy(it, np.maximum(gap, 1e-16), color=COLORS[0])
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("$J - \\min J$")
    ax2.semilogy(it, h[:, 1], color=COLORS[1])
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("Cerami metric")
    return _save(fig, path)


def plot_decay(u: VectorField, fit: DecayFit, path):
    fig = _figure()
    ax = fig.add_subplot()
    r, env = tail_profile(u)
    keep = env > 0
    ax.semilogy(r[keep], env[keep], ".", ms=2, color=COLORS[0], label="envelope")
    rr = np.linspace(*fit.fit_window, 50)
    ax.semilogy(rr, fit.C * np.exp(-fit.alpha * rr), color=COLORS[1], label=f"fit, $\\alpha$={fit.alpha:.4f}")
    ax.axvspan(*fit.fit_window, color="0.9", zorder=0)
    ax.axhline(fit.tail_floor, color="0.5", lw=0.8, ls="--")
    ax.set_xlabel("distance to center")
    ax.set_ylabel("$|u|$")
    ax.legend(frameon=False)
    return _save(fig, path)
