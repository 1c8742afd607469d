"""
Nonlinearities F(x, u) with f = grad_u F, and sampling-based assumption checks.

Models evaluate on batches: ``u`` has shape (K, P) and ``idx`` (length P)
selects the spatial node of each sample for models with x-dependent
coefficients.  With ``idx=None`` the batch is taken to be the full grid in
node order.

Three families ship:

* :class:`PowerSum`: ``F = sum_j |Gamma_j(x) u|^{p_j} / p_j``
* :class:`GrossPitaevskii`: ``F = 1/4 sum_{jk} beta_jk u_j^2 u_k^2``
* :class:`RadialW`: ``F = Gamma(x) W(|M u|^2)``

plus :class:`Combination` for positive linear combinations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InadmissibleModel

SUBCRITICAL_CAP = 6.0


def _rows(coef, idx, n_batch):
    """Pick per-sample coefficients from a node field, or broadcast a constant."""
    if idx is None:
        if coef.shape[0] != n_batch:
            raise ValueError(f"coefficient field has {coef.shape[0]} nodes, batch has {n_batch}")
        return coef
    return coef[np.asarray(idx)]


class NonlinearityModel:
    """Common interface.  Subclasses implement ``density`` and ``force``."""

    family: str = ""
    components: int
    growth_exponent: float
    growth_constant: float

    #: number of sampled coefficient sites, or None if F does not depend on x
    sites: int | None = None

    def density(self, u, idx=None) -> np.ndarray:
        raise NotImplementedError

    def force(self, u, idx=None) -> np.ndarray:
        raise NotImplementedError

    def force_jacobian(self, u, idx=None) -> np.ndarray:
        """d f_i / d u_j at every node, shape (K, K, M), by central differences."""
        u = np.asarray(u, dtype=float)
        h = 1e-5 * (1.0 + np.sqrt(np.sum(u * u, axis=0)))
        jac = np.empty((u.shape[0],) + u.shape)
        for j in range(u.shape[0]):
            up, um = u.copy(), u.copy()
            up[j] += h
            um[j] -= h
            jac[:, j] = (self.force(up, idx) - self.force(um, idx)) / (2 * h)
        return jac

    def to_config(self) -> dict:
        raise NotImplementedError


class PowerSum(NonlinearityModel):
    """``F(x,u) = sum_j (1/p_j) |Gamma_j(x) u|^{p_j}``.

    Each ``gamma`` entry is a constant (K, K) matrix or an (M, K, K) sampled
    periodic field.
    """

    family = "power_sum"

    def __init__(self, exponents: Sequence[float], gammas: Sequence[np.ndarray]):
        if len(exponents) != len(gammas) or not exponents:
            raise InadmissibleModel("need one gamma per exponent")
        order = np.argsort(exponents, kind="stable")
        self.exponents = [float(exponents[j]) for j in order]
        gs = [np.asarray(gammas[j], dtype=float) for j in order]
        if not (2 < self.exponents[0] and self.exponents[-1] < SUBCRITICAL_CAP):
            raise InadmissibleModel(
                f"exponents must satisfy 2 < p_1 <= ... <= p_m < {SUBCRITICAL_CAP}, got {self.exponents}"
            )
        K = gs[0].shape[-1]
        sites = None
        for g in gs:
            if g.ndim == 0:
                raise InadmissibleModel("gamma must be a K x K matrix")
            if g.shape[-2:] != (K, K) or g.ndim not in (2, 3):
                raise InadmissibleModel(f"gamma of shape {g.shape} is not (K,K) or (M,K,K)")
            mats = g.reshape(-1, K, K)
            svals = np.linalg.svd(mats, compute_uv=False)
            if np.any(svals[:, -1] <= 1e-12 * svals[:, 0]):
                raise InadmissibleModel("gamma must be invertible with bounded inverse")
            if g.ndim == 3:
                if sites is not None and sites != g.shape[0]:
                    raise InadmissibleModel("sampled gamma fields have inconsistent sizes")
                sites = g.shape[0]
        self.gammas = gs
        self.components = K
        self.sites = sites
        self.growth_exponent = self.exponents[-1]
        self.growth_constant = float(
            sum(np.linalg.norm(g.reshape(-1, K, K), ord=2, axis=(1, 2)).max() ** p for g, p in zip(gs, self.exponents))
        )

    @classmethod
    def isotropic(cls, p: float, K: int = 1, scale: float = 1.0) -> "PowerSum":
        return cls([p], [scale * np.eye(K)])

    def _apply(self, g, u, idx):
        if g.ndim == 2:
            return g @ u
        return np.einsum("pij,jp->ip", _rows(g, idx, u.shape[1]), u)

    def _apply_t(self, g, w, idx):
        if g.ndim == 2:
            return g.T @ w
        return np.einsum("pji,jp->ip", _rows(g, idx, w.shape[1]), w)

    def density(self, u, idx=None):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape[1])
        for p, g in zip(self.exponents, self.gammas):
            r = np.sqrt(np.sum(self._apply(g, u, idx) ** 2, axis=0))
            out += r**p / p
        return out

    def force(self, u, idx=None):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for p, g in zip(self.exponents, self.gammas):
            w = self._apply(g, u, idx)
            r = np.sqrt(np.sum(w**2, axis=0))
            out += self._apply_t(g, r ** (p - 2) * w, idx)
        return out

    def to_config(self):
        terms = []
        for p, g in zip(self.exponents, self.gammas):
            if g.ndim == 3:
                raise ValueError("sampled gamma fields are not serializable; rebuild from the modulation config")
            terms.append({"p": p, "gamma": g.tolist()})
        return {"family": self.family, "terms": terms}


class GrossPitaevskii(NonlinearityModel):
    """``F(u) = 1/4 sum_{j,k} beta_jk u_j^2 u_k^2``, so f_j = (sum_k beta_jk u_k^2) u_j."""

    family = "gross_pitaevskii"

    def __init__(self, beta):
        beta = np.atleast_2d(np.asarray(beta, dtype=float))
        if beta.shape[0] != beta.shape[1]:
            raise InadmissibleModel("beta must be square")
        if not np.allclose(beta, beta.T, rtol=0, atol=1e-12):
            raise InadmissibleModel("beta must be symmetric")
        if np.any(beta < 0):
            raise InadmissibleModel(
                "sign-indefinite coupling is not admissible: beta must have nonnegative entries"
            )
        if np.any(np.diag(beta) <= 0):
            raise InadmissibleModel("beta must have a positive diagonal")
        self.beta = 0.5 * (beta + beta.T)
        self.components = beta.shape[0]
        self.growth_exponent = 4.0
        self.growth_constant = float(np.linalg.norm(self.beta, ord=2))

    def density(self, u, idx=None):
        u2 = np.asarray(u, dtype=float) ** 2
        return 0.25 * np.einsum("jp,jk,kp->p", u2, self.beta, u2)

    def force(self, u, idx=None):
        u = np.asarray(u, dtype=float)
        return (self.beta @ u**2) * u

    def to_config(self):
        return {"family": self.family, "beta": self.beta.tolist()}


@dataclass(frozen=True)
class PowerProfile:
    """``W(t) = sum c_j t^{q_j}`` for t >= 0."""

    terms: tuple[tuple[float, float], ...]

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return sum(c * t**q for c, q in self.terms)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, q in self.terms:
            if q == 1:
                out = out + c
            else:
                with np.errstate(divide="ignore"):
                    out = out + c * q * np.where(t > 0, t ** (q - 1), 0.0 if q > 1 else np.inf)
        return out

    @property
    def top_power(self) -> float:
        return max(q for _, q in self.terms)

    def deriv_bound(self, mnorm2: float) -> float:
        return sum(abs(c) * q * mnorm2**q for c, q in self.terms)

    def to_config(self):
        return {"kind": "power_terms", "terms": [[c, q] for c, q in self.terms]}


@dataclass(frozen=True)
class SaturatingProfile:
    """``W(t) = c (t - log(1 + t))``: W' = c t/(1+t) is bounded, so F/|u|^2 stays bounded."""

    coef: float = 1.0

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return self.coef * (t - np.log1p(t))

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        return self.coef * t / (1.0 + t)

    @property
    def top_power(self) -> float:
        return 1.0

    def deriv_bound(self, mnorm2: float) -> float:
        return self.coef * mnorm2

    def to_config(self):
        return {"kind": "saturating", "coef": self.coef}


class RadialW(NonlinearityModel):
    """``F(x,u) = Gamma(x) W(|M u|^2)`` with Gamma > 0 and M invertible.

    With ``strict=True`` (the default) the profile must have W' >= 0 and
    nondecreasing on sampled t > 0; ``strict=False`` admits any profile so
    that deliberately inadmissible models can be handed to the checkers.
    """

    family = "radial_w"

    def __init__(self, profile, matrix=None, weight=1.0, p: float | None = None, strict: bool = True):
        self.profile = profile
        weight = np.asarray(weight, dtype=float)
        if np.any(weight <= 0) or not np.all(np.isfinite(weight)):
            raise InadmissibleModel("Gamma(x) must be positive and bounded away from 0")
        self.weight = weight
        self.sites = weight.shape[0] if weight.ndim == 1 else None
        if matrix is None:
            raise InadmissibleModel("matrix M is required")
        M = np.atleast_2d(np.asarray(matrix, dtype=float))
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-1] <= 1e-12 * sv[0]:
            raise InadmissibleModel("M must be invertible")
        self.matrix = M
        self.gram = M.T @ M
        self.components = M.shape[0]
        self.strict = strict
        if strict:
            ts = np.logspace(-12, 12, 481)
            wp = profile.deriv(ts)
            if np.any(wp < 0) or np.any(np.diff(wp) < -1e-12 * np.abs(wp[1:])):
                raise InadmissibleModel("W' must be nonnegative and nondecreasing on (0, inf)")
        self.growth_exponent = float(p) if p is not None else max(2.0 * profile.top_power, 3.0)
        self.growth_constant = float(2.0 * weight.max() * profile.deriv_bound(sv[0] ** 2))

    def _weight(self, idx, n):
        if self.weight.ndim == 0:
            return float(self.weight)
        return _rows(self.weight, idx, n)

    def density(self, u, idx=None):
        u = np.asarray(u, dtype=float)
        s = np.einsum("ip,ij,jp->p", u, self.gram, u)
        return self._weight(idx, u.shape[1]) * self.profile.value(s)

    def force(self, u, idx=None):
        u = np.asarray(u, dtype=float)
        s = np.einsum("ip,ij,jp->p", u, self.gram, u)
        return 2.0 * self._weight(idx, u.shape[1]) * self.profile.deriv(s) * (self.gram @ u)

    def to_config(self):
        if self.weight.ndim:
            raise ValueError("sampled weights are not serializable; rebuild from the modulation config")
        return {
            "family": self.family,
            "profile": self.profile.to_config(),
            "M": self.matrix.tolist(),
            "gamma": float(self.weight),
            "p": self.growth_exponent,
            "strict": self.strict,
        }


class Combination(NonlinearityModel):
    """Positive linear combination; densities and forces add with the weights."""

    family = "combination"

    def __init__(self, models: Sequence[NonlinearityModel], weights: Sequence[float]):
        if not models or len(models) != len(weights):
            raise ValueError("need one weight per model")
        if any(not (w > 0) for w in weights):
            raise ValueError("combination weights must be positive")
        Ks = {m.components for m in models}
        if len(Ks) != 1:
            raise ValueError(f"models have mismatched component counts {sorted(Ks)}")
        sites = {m.sites for m in models if m.sites is not None}
        if len(sites) > 1:
            raise ValueError("models are sampled on different grids")
        self.models = list(models)
        self.weights = [float(w) for w in weights]
        self.components = Ks.pop()
        self.sites = sites.pop() if sites else None
        self.growth_exponent = max(m.growth_exponent for m in models)
        self.growth_constant = sum(w * m.growth_constant for m, w in zip(models, self.weights))

    def density(self, u, idx=None):
        out = self.weights[0] * self.models[0].density(u, idx)
        for m, w in zip(self.models[1:], self.weights[1:]):
            out = out + w * m.density(u, idx)
        return out

    def force(self, u, idx=None):
        out = self.weights[0] * self.models[0].force(u, idx)
        for m, w in zip(self.models[1:], self.weights[1:]):
            out = out + w * m.force(u, idx)
        return out

    def to_config(self):
        return {
            "family": self.family,
            "models": [m.to_config() for m in self.models],
            "weights": list(self.weights),
        }


def combine(models: Sequence[NonlinearityModel], weights: Sequence[float]) -> NonlinearityModel:
    if len(models) == 1 and weights[0] == 1:
        return models[0]
    return Combination(models, weights)


def eval_F(model: NonlinearityModel, x_index, u) -> float:
    u = np.asarray(u, dtype=float).reshape(-1, 1)
    idx = None if model.sites is None else np.array([x_index])
    return float(model.density(u, idx)[0])


def eval_f(model: NonlinearityModel, x_index, u) -> np.ndarray:
    u = np.asarray(u, dtype=float).reshape(-1, 1)
    idx = None if model.sites is None else np.array([x_index])
    return model.force(u, idx)[:, 0]


# --------------------------------------------------------------------------
# assumption checks


@dataclass
class Verdict:
    status: str  # "pass" | "fail" | "inconclusive"
    detail: str = ""
    witness: dict | None = None
    worst_margin: float | None = None
    sampling_based: bool = True

    def to_dict(self):
        return {
            "status": self.status,
            "detail": self.detail,
            "witness": self.witness,
            "worst_margin": self.worst_margin,
            "sampling_based": self.sampling_based,
        }


@dataclass
class CheckerReport:
    verdicts: dict[str, Verdict] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.status != "fail" for v in self.verdicts.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.verdicts.items() if v.status == "fail"]

    def __getitem__(self, key) -> Verdict:
        return self.verdicts[key]

    def to_dict(self):
        return {"passed": self.passed, "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()}}


@dataclass
class SamplerConfig:
    """Sample counts and magnitude ranges for :func:`check_assumptions`."""

    shell_samples: int = 200
    small_range: tuple[float, float] = (1e-6, 1e-2)
    large_range: tuple[float, float] = (1e2, 1e6)
    shells: int = 9
    bulk_samples: int = 2000
    f6_pairs: int = 400
    neq_samples: int = 100_000
    seed: int = 0


@dataclass
class NeqSamples:
    """Pointwise samples (x_index, u, v, t) for the fiber inequality phi <= 0."""

    idx: np.ndarray | None
    u: np.ndarray
    v: np.ndarray
    t: np.ndarray

    def __len__(self):
        return self.t.shape[0]


def _directions(rng, K, n):
    d = rng.standard_normal((K, n))
    return d / np.linalg.norm(d, axis=0)


def _indices(model, rng, n):
    return None if model.sites is None else rng.integers(0, model.sites, n)


def _witness(model, idx, j, **arrays):
    out = {"x_index": None if idx is None else int(idx[j])}
    for k, a in arrays.items():
        a = np.asarray(a)
        out[k] = a[:, j].tolist() if a.ndim == 2 else float(a[j])
    return out


def structured_samples(model: NonlinearityModel, n: int, seed: int = 0) -> NeqSamples:
    """Samples covering several magnitude decades, t in [0, 4] with t=0,1 and u=0 slices."""
    rng = np.random.default_rng(seed)
    K = model.components
    ru = 10.0 ** rng.uniform(-3, 1, n)
    rv = 10.0 ** rng.uniform(-3, 1, n)
    u = _directions(rng, K, n) * ru
    v = _directions(rng, K, n) * rv
    t = rng.uniform(0.0, 4.0, n)
    kind = rng.integers(0, 8, n)
    t[kind == 0] = 0.0
    t[kind == 1] = 1.0
    u[:, kind == 2] = 0.0
    par = kind == 3
    v[:, par] = u[:, par] * rng.uniform(-2, 2, par.sum())
    # the substitution v -> -t u + v used to recover the pointwise monotonicity condition
    sub = kind == 4
    v[:, sub] = -t[sub] * u[:, sub] + v[:, sub]
    return NeqSamples(_indices(model, rng, n), u, v, t)


def neq_margin(model: NonlinearityModel, s: NeqSamples) -> np.ndarray:
    """phi = f(u).((t^2-1)/2 u + t v) + F(u) - F(tu + v), per sample."""
    fu = model.force(s.u, s.idx)
    z = 0.5 * (s.t**2 - 1.0) * s.u + s.t * s.v
    return np.sum(fu * z, axis=0) + model.density(s.u, s.idx) - model.density(s.t * s.u + s.v, s.idx)


def check_neqF6(model: NonlinearityModel, samples: NeqSamples | int = 100_000, seed: int = 0, rel_tol: float = 1e-10):
    """Sample the pointwise inequality phi <= tol with tol = rel_tol (1 + |u|^p + |v|^p)."""
    if isinstance(samples, (int, np.integer)):
        samples = structured_samples(model, int(samples), seed)
    phi = neq_margin(model, samples)
    p = model.growth_exponent
    scale = 1.0 + np.linalg.norm(samples.u, axis=0) ** p + np.linalg.norm(samples.v, axis=0) ** p
    excess = phi - rel_tol * scale
    j = int(np.argmax(phi / scale))
    worst = float(np.max(phi / scale))
    report = CheckerReport()
    wit = _witness(model, samples.idx, j, u=samples.u, v=samples.v, t=samples.t, phi=phi)
    if np.any(excess > 0):
        j = int(np.argmax(excess))
        wit = _witness(model, samples.idx, j, u=samples.u, v=samples.v, t=samples.t, phi=phi)
        report.verdicts["neqF6"] = Verdict(
            "fail", f"phi = {phi[j]:.3e} > 0 at {int(np.sum(excess > 0))} of {len(samples)} samples", wit, worst
        )
    else:
        report.verdicts["neqF6"] = Verdict("pass", f"max phi/scale = {worst:.3e} over {len(samples)} samples", wit, worst)
    return report


def _shell_points(model, rng, radii, n):
    K = model.components
    pts, rs = [], []
    for r in radii:
        pts.append(_directions(rng, K, n) * r)
        rs.append(np.full(n, r))
    return np.concatenate(pts, axis=1), np.concatenate(rs)


def _log_slope(radii, vals):
    ok = vals > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(radii[ok]), np.log(vals[ok]), 1)[0])


SLOPE_TOL = 1e-3


def _check_f1(model, rng, n):
    K = model.components
    u = _directions(rng, K, n) * 10.0 ** rng.uniform(-2, 1, n)
    idx = _indices(model, rng, n)
    f = model.force(u, idx)
    h = 1e-5 * (1.0 + np.linalg.norm(u, axis=0))
    fd = np.empty_like(u)
    for i in range(K):
        e = np.zeros_like(u)
        e[i] = h
        fd[i] = (model.density(u + e, idx) - model.density(u - e, idx)) / (2 * h)
    err = np.linalg.norm(fd - f, axis=0) / (1.0 + np.linalg.norm(f, axis=0))
    j = int(np.argmax(err))
    wit = _witness(model, idx, j, u=u, relative_error=err)
    if err[j] > 1e-6:
        return Verdict("fail", f"f differs from the finite-difference gradient of F by {err[j]:.2e}", wit, float(err[j]))
    return Verdict("pass", f"finite-difference gradient agrees to {err[j]:.2e}", wit, float(err[j]))


def _check_f2(model, rng, cfg):
    p, a = model.growth_exponent, model.growth_constant
    radii = np.logspace(math.log10(cfg.small_range[0]), math.log10(cfg.large_range[1]), 4 * cfg.shells)
    u, r = _shell_points(model, rng, radii, cfg.shell_samples)
    idx = _indices(model, rng, u.shape[1])
    ratio = np.linalg.norm(model.force(u, idx), axis=0) / (1.0 + r ** (p - 1))
    j = int(np.argmax(ratio))
    wit = _witness(model, idx, j, u=u, ratio=ratio)
    if not (2 < p < SUBCRITICAL_CAP):
        return Verdict("fail", f"growth exponent p = {p} outside (2, {SUBCRITICAL_CAP})", {"p": p}, p)
    if ratio[j] > a * (1 + 1e-10):
        return Verdict("fail", f"|f|/(1+|u|^(p-1)) = {ratio[j]:.3e} exceeds a = {a:.3e}", wit, float(ratio[j] - a))
    return Verdict("pass", f"|f| <= a(1+|u|^(p-1)) with p={p:g}, a={a:.4g} on shells 1e-6..1e6", wit, float(ratio[j] - a))


def _check_f3(model, rng, cfg):
    radii = np.logspace(math.log10(cfg.small_range[0]), math.log10(cfg.small_range[1]), cfg.shells)
    u, r = _shell_points(model, rng, radii, cfg.shell_samples)
    idx = _indices(model, rng, u.shape[1])
    ratio = np.linalg.norm(model.force(u, idx), axis=0) / r
    shell_max = ratio.reshape(cfg.shells, -1).max(axis=1)
    slope = _log_slope(radii, shell_max)
    first = int(np.argmax(ratio[: cfg.shell_samples]))
    wit = _witness(model, idx, first, u=u, ratio=ratio)
    wit["shell_max"] = shell_max.tolist()
    if np.all(shell_max == 0):
        return Verdict("pass", "f vanishes on all small shells", wit, 0.0)
    monotone = np.all(np.diff(shell_max) >= -1e-12 * shell_max[1:])
    if slope > SLOPE_TOL and monotone:
        return Verdict(
            "pass", f"max |f|/|u| decreases toward 0 (log-log slope {slope:.3g}); no violation found", wit, float(shell_max[0])
        )
    return Verdict(
        "fail", f"max |f|/|u| = {shell_max[0]:.3e} at |u| = {radii[0]:.0e} does not tend to 0 (slope {slope:.3g})", wit, float(shell_max[0])
    )


def _check_f4(model, rng, cfg):
    n = cfg.bulk_samples
    radii = 10.0 ** rng.uniform(math.log10(cfg.small_range[0]), math.log10(cfg.large_range[1]), n)
    u = _directions(rng, model.components, n) * radii
    idx = _indices(model, rng, n)
    F = model.density(u, idx)
    fu = np.sum(model.force(u, idx) * u, axis=0)
    scale = 1.0 + radii**model.growth_exponent
    m1 = (fu - 2 * F) / scale
    m2 = F / scale
    worst = np.minimum(m1, m2)
    j = int(np.argmin(worst))
    wit = _witness(model, idx, j, u=u, F=F, fu=fu)
    if worst[j] < -1e-12:
        which = "f(u)u < 2F(u)" if m1[j] <= m2[j] else "F(u) < 0"
        return Verdict("fail", f"{which} by {worst[j] * scale[j]:.3e}", wit, float(worst[j]))
    return Verdict("pass", f"f(u)u >= 2F(u) >= 0 on {n} samples", wit, float(worst[j]))


def _check_f5(model, rng, cfg):
    radii = np.logspace(math.log10(cfg.large_range[0]), math.log10(cfg.large_range[1]), cfg.shells)
    u, r = _shell_points(model, rng, radii, cfg.shell_samples)
    idx = _indices(model, rng, u.shape[1])
    ratio = model.density(u, idx) / r**2
    shell_min = ratio.reshape(cfg.shells, -1).min(axis=1)
    slope = _log_slope(radii, shell_min)
    last = (cfg.shells - 1) * cfg.shell_samples + int(np.argmin(ratio[-cfg.shell_samples :]))
    wit = _witness(model, idx, last, u=u, ratio=ratio)
    wit["shell_min"] = shell_min.tolist()
    monotone = np.all(np.diff(shell_min) >= -1e-12 * np.abs(shell_min[1:]))
    if slope > SLOPE_TOL and monotone:
        return Verdict(
            "pass", f"min F/|u|^2 grows on shells 1e2..1e6 (log-log slope {slope:.3g}); no violation found", wit, float(shell_min[-1])
        )
    return Verdict(
        "fail", f"min F/|u|^2 = {shell_min[-1]:.3e} at |u| = {radii[-1]:.0e} stays bounded (slope {slope:.3g})", wit, float(shell_min[-1])
    )


def _check_f6_direct(model, rng, cfg):
    """Construct pairs with f(u).v = f(v).u > 0 by root finding along random rays v = s d."""
    K = model.components
    n = cfg.f6_pairs
    found = 0
    worst = -np.inf
    wit = None
    for _ in range(n):
        u = _directions(rng, K, 1) * 10.0 ** rng.uniform(-2, 1)
        idx = _indices(model, rng, 1)
        fu = model.force(u, idx)[:, 0]
        if not np.any(fu):
            continue
        d = _directions(rng, K, 1)[:, 0]
        if fu @ d < 0:
            d = -d

        def g(s):
            return s * (fu @ d) - float(model.force((s * d)[:, None], idx)[:, 0] @ u[:, 0])

        lo, hi = 1e-8, 1e8
        glo, ghi = g(lo), g(hi)
        if not (np.isfinite(glo) and np.isfinite(ghi)) or glo * ghi > 0:
            continue
        s = brentq(g, lo, hi, xtol=1e-14, rtol=1e-14)
        v = (s * d)[:, None]
        a = float(fu @ v[:, 0])
        b = float(model.force(v, idx)[:, 0] @ u[:, 0])
        if not (a > 0 and abs(a - b) <= 1e-8 * np.linalg.norm(fu) * np.linalg.norm(v)):
            continue
        found += 1
        fuu = float(fu @ u[:, 0])
        lhs = float(model.density(u, idx)[0] - model.density(v, idx)[0])
        rhs = (fuu**2 - a**2) / (2 * fuu)
        p = model.growth_exponent
        margin = (lhs - rhs) / (1 + np.linalg.norm(u) ** p + np.linalg.norm(v) ** p)
        if margin > worst:
            worst = margin
            wit = {
                "x_index": None if idx is None else int(idx[0]),
                "u": u[:, 0].tolist(),
                "v": v[:, 0].tolist(),
                "lhs": lhs,
                "rhs": rhs,
            }
    if found == 0:
        return Verdict("inconclusive", "no pairs satisfying the hypothesis were constructed")
    if worst > 1e-10:
        return Verdict("fail", f"F(u)-F(v) exceeds the bound on a constructed pair by {worst:.3e}", wit, float(worst))
    return Verdict("pass", f"bound holds on {found} constructed hypothesis pairs", wit, float(worst))


def check_assumptions(model: NonlinearityModel, config: SamplerConfig | None = None) -> CheckerReport:
    """Falsification-style checks of F1..F6 plus the equivalent pointwise inequality.

    Limit conditions (F3, F5) can only be falsified: "pass" means no violation
    was found on the sampled shells.
    """
    cfg = config or SamplerConfig()
    rng = np.random.default_rng(cfg.seed)
    rep = CheckerReport()
    rep.verdicts["F1"] = _check_f1(model, rng, cfg.bulk_samples)
    rep.verdicts["F2"] = _check_f2(model, rng, cfg)
    rep.verdicts["F3"] = _check_f3(model, rng, cfg)
    rep.verdicts["F4"] = _check_f4(model, rng, cfg)
    rep.verdicts["F5"] = _check_f5(model, rng, cfg)
    direct = _check_f6_direct(model, rng, cfg)
    neq = check_neqF6(model, cfg.neq_samples, seed=cfg.seed + 1)["neqF6"]
    rep.verdicts["neqF6"] = neq
    if neq.status == "fail" or direct.status == "fail":
        bad = neq if neq.status == "fail" else direct
        rep.verdicts["F6"] = Verdict("fail", bad.detail, bad.witness, bad.worst_margin)
    else:
        rep.verdicts["F6"] = Verdict(
            "pass", f"pointwise inequality holds; direct check: {direct.status} ({direct.detail})", direct.witness, neq.worst_margin
        )
    return rep
