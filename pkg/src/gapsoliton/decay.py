"""
Exponential tail fits and a spectral smoothness proxy for computed solutions.

The tail is summarized by its monotone upper envelope
``E(r) = max_{|x - x_c| >= r} |u(x)|``, which is what a bound of the form
|u(x)| <= C exp(-alpha |x|) constrains, and which ignores the oscillating
Bloch modulation of gap solitons.  ``log E`` is fitted by least squares
against r over a window that skips the core and everything below the noise
floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoDecay, TailTooShort
from .grid import VectorField

MIN_WINDOW_SAMPLES = 16
EDGE_FACTOR = 10.0


@dataclass(frozen=True)
class DecayFit:
    alpha: float
    C: float
    fit_window: tuple[float, float]
    r2: float
    sigma: float | None
    sigma_bound: tuple[float, float] | None  # (sqrt(Sigma), sqrt(2 Sigma)), None when Sigma <= 0
    tail_floor: float  # effective floor used for the window
    samples: int

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "C": self.C,
            "fit_window": list(self.fit_window),
            "r2": self.r2,
            "sigma": self.sigma,
            "sqrt_sigma": None if self.sigma_bound is None else self.sigma_bound[0],
            "sqrt_2sigma": None if self.sigma_bound is None else self.sigma_bound[1],
            "tail_floor": self.tail_floor,
            "samples": self.samples,
        }


def _suffix_max(a):
    return np.maximum.accumulate(a[::-1])[::-1]


def tail_profile(u: VectorField) -> tuple[np.ndarray, np.ndarray]:
    """(distance, envelope) measured from the box center node."""
    g = u.grid
    amp = u.pointwise_norm().reshape(g.shape)
    if g.dim == 1:
        n = g.points[0]
        c = n // 2
        h = g.spacing[0]
        m = min(c, n - 1 - c)
        right = _suffix_max(amp[c : c + m + 1])
        left = _suffix_max(amp[c - m : c + 1][::-1])
        with np.errstate(divide="ignore"):
            env = np.exp(0.5 * (np.log(right) + np.log(left)))
        return np.arange(m + 1) * h, env
    centers = [np.arange(n) * h - (n // 2) * h for n, h in zip(g.points, g.spacing)]
    X, Y = np.meshgrid(*centers, indexing="ij")
    r = np.hypot(X, Y)
    half = min(L / 2 for L in g.box_lengths)
    dr = max(g.spacing)
    edges = np.arange(0.0, half + dr, dr)
    bins = np.digitize(r.ravel(), edges) - 1
    shell = np.zeros(len(edges))
    np.maximum.at(shell, bins, amp.ravel())
    keep = edges < half
    return edges[keep], _suffix_max(shell[keep])


def fit_decay(
    u: VectorField,
    tail_floor: float = 1e-12,
    core_fraction: float = 0.25,
    sigma: float | None = None,
) -> DecayFit:
    """Fit log|u| ~ log C - alpha r on the tail of a centered field."""
    peak = float(u.pointwise_norm().max())
    if peak <= 100 * tail_floor:
        raise TailTooShort(f"peak {peak:.3e} is not above 100 x tail_floor")
    r, env = tail_profile(u)
    R = r[-1]
    # the envelope at the box edge measures solver noise plus periodic wraparound
    floor = tail_floor
    start = float(env[np.searchsorted(r, core_fraction * R)])
    if EDGE_FACTOR * float(env[-1]) < start:
        floor = max(tail_floor, EDGE_FACTOR * float(env[-1]))
    window = (r >= core_fraction * R) & (env > floor)
    # stop at the first sub-floor sample so the window is one interval
    below = np.nonzero((env <= floor) & (r >= core_fraction * R))[0]
    if below.size:
        window &= r < r[below[0]]
    if window.sum() < MIN_WINDOW_SAMPLES:
        raise TailTooShort(f"only {int(window.sum())} usable samples in the fit window")
    x, y = r[window], np.log(env[window])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    if slope >= 0:
        raise NoDecay(f"tail does not decay (slope {slope:.3e})", r2=r2)
    bound = None
    if sigma is not None and sigma > 0:
        bound = (float(np.sqrt(sigma)), float(np.sqrt(2 * sigma)))
    return DecayFit(
        alpha=float(-slope),
        C=float(np.exp(intercept)),
        fit_window=(float(x[0]), float(x[-1])),
        r2=r2,
        sigma=sigma,
        sigma_bound=bound,
        tail_floor=floor,
        samples=int(window.sum()),
    )


def smoothness_proxy(u: VectorField, top_fraction: float = 0.1) -> float:
    """Share of spectral energy carried by the highest ``top_fraction`` of modes."""
    g = u.grid
    axes = tuple(range(1, g.dim + 1))
    power = np.abs(np.fft.fftn(u.reshaped(), axes=axes)) ** 2
    total = power.sum()
    if total == 0:
        return 0.0
    ksq = g.k_squared().ravel()
    order = np.argsort(ksq, kind="stable")
    n_top = int(np.ceil(top_fraction * ksq.size))
    top = order[-n_top:]
    return float(power.reshape(u.components, -1)[:, top].sum() / total)


def decay_csv_rows(u: VectorField):
    """(distance, log envelope) rows for external plotting."""
    r, env = tail_profile(u)
    with np.errstate(divide="ignore"):
        return list(zip(r.tolist(), np.log(env).tolist()))
