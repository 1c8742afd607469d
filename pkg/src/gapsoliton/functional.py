"""
Energy functional, its gradient and Nehari-Pankov diagnostics.

    J(u) = 1/2 sum_i <H_i u_i, u_i>_{L^2} - int F(x, u) dx
         = 1/2 ||u^+||^2 - 1/2 ||u~||^2 - int F(x, u) dx

Gradients are L^2 Riesz representatives (node values of H_i u_i - f_i); norms
of gradients are taken in the dual of the split norm, i.e. by dividing the
eigen-coefficients by |lambda|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch
from .grid import VectorField, integrate, laplacian
from .nonlinearity import NonlinearityModel
from .spectral import SpectralSplit


@dataclass(frozen=True)
class EnergyContext:
    split: SpectralSplit
    model: NonlinearityModel

    def __post_init__(self):
        if self.model.components != self.split.components:
            raise GridMismatch(
                f"nonlinearity has K={self.model.components}, operators have K={self.split.components}"
            )
        if self.model.sites is not None and self.model.sites != self.split.grid.size:
            raise GridMismatch("nonlinearity coefficients are sampled on a different grid")

    @property
    def grid(self):
        return self.split.grid

    def density(self, values: np.ndarray) -> np.ndarray:
        return self.model.density(values)

    def force(self, values: np.ndarray) -> np.ndarray:
        return self.model.force(values)


@dataclass(frozen=True)
class NehariResiduals:
    r_self: float
    r_tilde: float
    in_P: bool
    cerami: float
    grad_norm: float
    norm: float

    def to_dict(self):
        return {
            "r_self": self.r_self,
            "r_tilde": self.r_tilde,
            "in_P": self.in_P,
            "cerami": self.cerami,
            "grad_norm": self.grad_norm,
            "norm": self.norm,
        }


def energy_parts(ctx: EnergyContext, u: VectorField) -> tuple[float, float]:
    """(quadratic part 1/2 sum <H u, u>, nonlinear part int F)."""
    c = ctx.split.coefficients(u)
    quad = 0.5 * float(np.sum(ctx.split.eigenvalues() * c**2))
    return quad, integrate(ctx.grid, ctx.density(u.values))


def energy(ctx: EnergyContext, u: VectorField) -> float:
    quad, nl = energy_parts(ctx, u)
    return quad - nl


def apply_operator(ctx: EnergyContext, u: VectorField) -> np.ndarray:
    """Node values of H_i u_i."""
    return -laplacian(u).values + ctx.split.potential.values * u.values


def gradient(ctx: EnergyContext, u: VectorField) -> VectorField:
    return u.with_values(apply_operator(ctx, u) - ctx.force(u.values))


def derivative(ctx: EnergyContext, u: VectorField, h: VectorField) -> float:
    """J'(u)(h)."""
    g = gradient(ctx, u)
    return float(np.sum(g.values * h.values) * ctx.grid.weight)


def _dual_parts(ctx, u):
    g = gradient(ctx, u)
    gc = ctx.split.coefficients(g)
    lam = np.abs(ctx.split.eigenvalues())
    neg = ctx.split.neg_mask()
    w2 = gc**2 / lam
    return g, float(np.sum(w2[~neg])), float(np.sum(w2[neg]))


def gradient_dual_norm(ctx: EnergyContext, u: VectorField) -> float:
    """||J'(u)|| measured in the dual split norm."""
    _, p, m = _dual_parts(ctx, u)
    return float(np.sqrt(p + m))


def nehari_residuals(ctx: EnergyContext, u: VectorField, plus_tol: float = 1e-12) -> NehariResiduals:
    split = ctx.split
    g, pos2, neg2 = _dual_parts(ctx, u)
    w = ctx.grid.weight
    r_self = float(np.sum(g.values * u.values) * w)
    c = split.coefficients(u)
    lam = split.eigenvalues()
    neg = split.neg_mask()
    plus2 = float(np.sum(np.abs(lam[~neg]) * c[~neg] ** 2))
    tilde2 = float(np.sum(np.abs(lam[neg]) * c[neg] ** 2))
    norm = float(np.sqrt(plus2 + tilde2))
    fu = float(np.sum(ctx.force(u.values) * u.values) * w)
    in_P = bool(plus2 > plus_tol**2 * max(1.0, norm**2) and tilde2 + fu > 0)
    grad_norm = float(np.sqrt(pos2 + neg2))
    return NehariResiduals(
        r_self=r_self,
        r_tilde=float(np.sqrt(neg2)),
        in_P=in_P,
        cerami=(1.0 + norm) * grad_norm,
        grad_norm=grad_norm,
        norm=norm,
    )


def fiber_margin(ctx: EnergyContext, u: VectorField, t: float, v: VectorField, plus_tol: float = 1e-10) -> float:
    """J(u) - J(tu + v) + J'(u)((t^2 - 1)/2 u + t v) for v in the negative subspace.

    Nonnegative for every admissible nonlinearity.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    vp = ctx.split.project_plus(v)
    scale = max(1.0, float(np.max(np.abs(v.values))))
    if float(np.max(np.abs(vp.values))) > plus_tol * scale:
        raise ValueError("v has a nonzero component in the positive subspace")
    z = u * (0.5 * (t * t - 1.0)) + v * t
    return energy(ctx, u) - energy(ctx, u * t + v) + derivative(ctx, u, z)
