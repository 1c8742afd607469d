"""
Ground states as  c = inf_{u+ in S+} sup_{t >= 0, w in X~} J(t u+ + w).

Coordinates: for each component the eigenbasis coefficients are rescaled by
sqrt(|lambda|), so that

    ||u+||^2 = |a|^2,   ||u~||^2 = |b|^2,   J = |a|^2/2 - |b|^2/2 - int F.

The unit sphere of X+ is then the Euclidean unit sphere in ``a`` and the
inner problem in ``b`` is strongly concave with modulus one whenever F(x, .)
is convex.

Outer loop: Riemannian gradient descent on the sphere with a
Barzilai-Borwein trial step, Armijo backtracking and normalization as the
retraction.  The reduced gradient at a maximizer (t, b) is t times the
tangential part of dJ/da (Danskin).
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import InnerDiverged, MaxIterations, NonConcave
from .functional import EnergyContext, NehariResiduals, energy, nehari_residuals
from .grid import VectorField, shift_nodes

log = logging.getLogger(__name__)

THREADS_ENV = "GAPSOLITON_THREADS"
GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


@dataclass
class InnerConfig:
    tilde_tol: float = 1e-9
    bracket_growth: float = 2.0
    golden_tol: float = 1e-10
    max_iter: int = 500
    t_max: float = 1e6
    curvature_tol: float = 1e-6


@dataclass
class OuterConfig:
    sphere_tol: float = 1e-7
    cerami_tol: float = 1e-7
    max_iter: int = 2000
    armijo: float = 1e-4
    max_backtracks: int = 40


@dataclass
class SolverConfig:
    inner: InnerConfig = field(default_factory=InnerConfig)
    outer: OuterConfig = field(default_factory=OuterConfig)
    restarts: int = 5
    warm_start: VectorField | None = None
    centering: bool = True
    seed: int = 0
    init_fraction: float = 0.1
    threads: int | None = None

    def __post_init__(self):
        for name, val in vars(self.inner).items():
            if val <= 0:
                raise ValueError(f"inner.{name} must be positive")
        for name, val in vars(self.outer).items():
            if val <= 0:
                raise ValueError(f"outer.{name} must be positive")
        if self.inner.max_iter < 1 or self.outer.max_iter < 1 or self.restarts < 0:
            raise ValueError("iteration counts must be >= 1 and restarts >= 0")
        if self.restarts == 0 and self.warm_start is None:
            raise ValueError("need at least one random restart or a warm start")


@dataclass
class InnerResult:
    t: float
    tilde: VectorField
    value: float


@dataclass
class StartRecord:
    start: int
    c_value: float
    converged: bool
    iterations: int
    cerami: float
    t: float
    tilde_norm: float

    def to_dict(self):
        return dict(vars(self))


@dataclass
class SolveResult:
    u: VectorField
    c_value: float
    residuals: NehariResiduals
    history: list[tuple[float, float]]
    inner_diagnostics: dict
    multistart_table: list[StartRecord]
    converged: bool
    iterations: int
    nonunique: list[tuple[int, int]] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "c_value": self.c_value,
            "converged": self.converged,
            "iterations": self.iterations,
            "residuals": self.residuals.to_dict(),
            "inner": self.inner_diagnostics,
            "multistart": [r.to_dict() for r in self.multistart_table],
            "nonunique_pairs": [list(p) for p in self.nonunique],
        }


class ScaledBasis:
    """Maps between node values and rescaled positive/negative coordinates."""

    def __init__(self, ctx: EnergyContext):
        split = ctx.split
        self.ctx = ctx
        self.K = split.components
        self.w = ctx.grid.weight
        sw = np.sqrt(self.w)
        self.plus, self.minus = [], []
        for part in split.parts:
            lam = part.eigenvalues
            nneg = int(part.neg.sum())
            # eigenvalues ascend, so the negative modes are the leading columns
            Qm, Qp = part.eigenvectors[:, :nneg], part.eigenvectors[:, nneg:]
            self.minus.append((Qm, 1.0 / (sw * np.sqrt(-lam[:nneg]))))
            self.plus.append((Qp, 1.0 / (sw * np.sqrt(lam[nneg:]))))
        self.plus_sizes = [Q.shape[1] for Q, _ in self.plus]
        self.minus_sizes = [Q.shape[1] for Q, _ in self.minus]
        self.plus_offsets = np.concatenate([[0], np.cumsum(self.plus_sizes)])
        self.minus_offsets = np.concatenate([[0], np.cumsum(self.minus_sizes)])
        self.n_plus = int(self.plus_offsets[-1])
        self.n_minus = int(self.minus_offsets[-1])

    def _to_nodes(self, coords, maps, offsets):
        out = np.zeros((self.K, self.ctx.grid.size))
        for i, (Q, s) in enumerate(maps):
            if Q.shape[1]:
                out[i] = Q @ (s * coords[offsets[i] : offsets[i + 1]])
        return out

    def _pull(self, nodes, maps, offsets, size):
        """Adjoint of the node map weighted by the quadrature weight: w * A^T x."""
        out = np.empty(size)
        for i, (Q, s) in enumerate(maps):
            if Q.shape[1]:
                out[offsets[i] : offsets[i + 1]] = self.w * s * (Q.T @ nodes[i])
        return out

    def plus_nodes(self, a):
        return self._to_nodes(a, self.plus, self.plus_offsets)

    def minus_nodes(self, b):
        return self._to_nodes(b, self.minus, self.minus_offsets)

    def pull_plus(self, nodes):
        return self._pull(nodes, self.plus, self.plus_offsets, self.n_plus)

    def pull_minus(self, nodes):
        return self._pull(nodes, self.minus, self.minus_offsets, self.n_minus)

    def plus_coords(self, nodes):
        """Scaled positive coordinates of a node field (inverse of plus_nodes on X+)."""
        out = np.empty(self.n_plus)
        for i, (Q, s) in enumerate(self.plus):
            out[self.plus_offsets[i] : self.plus_offsets[i + 1]] = (Q.T @ nodes[i]) / s
        return out

    def _fields(self, maps, offsets, size):
        out = np.zeros((size, self.K, self.ctx.grid.size))
        for i, (Q, s) in enumerate(maps):
            out[offsets[i] : offsets[i + 1], i] = (Q * s).T
        return out

    @property
    def minus_fields(self):
        """Node fields of the negative coordinate directions, shape (n_minus, K, M)."""
        if not hasattr(self, "_minus_fields"):
            self._minus_fields = self._fields(self.minus, self.minus_offsets, self.n_minus)
        return self._minus_fields

    @property
    def plus_fields(self):
        if not hasattr(self, "_plus_fields"):
            self._plus_fields = self._fields(self.plus, self.plus_offsets, self.n_plus)
        return self._plus_fields

    def minus_coords(self, nodes):
        out = np.empty(self.n_minus)
        for i, (Q, s) in enumerate(self.minus):
            out[self.minus_offsets[i] : self.minus_offsets[i + 1]] = (Q.T @ nodes[i]) / s
        return out


class _InnerProblem:
    """sup over t >= 0 and b of J(t P + B b) for a fixed unit positive direction P."""

    def __init__(self, basis: ScaledBasis, a_hat, cfg: InnerConfig):
        self.basis = basis
        self.cfg = cfg
        self.P = basis.plus_nodes(a_hat)
        self.model = basis.ctx.model
        self.w = basis.w
        self.cache: dict[float, tuple[np.ndarray, float]] = {}
        self.b_guess = np.zeros(basis.n_minus)

    def _value_grad_b(self, t, b):
        nodes = t * self.P + self.basis.minus_nodes(b)
        val = 0.5 * t * t - 0.5 * b @ b - self.w * np.sum(self.model.density(nodes))
        gb = -b - self.basis.pull_minus(self.model.force(nodes))
        return val, gb, nodes

    def solve_b(self, t, b0):
        """Maximize over b at fixed t; returns (b, value)."""
        if self.basis.n_minus == 0:
            val, _, _ = self._value_grad_b(t, b0)
            return b0, val

        def negf(b):
            val, gb, _ = self._value_grad_b(t, b)
            return -val, -gb

        n = self.basis.n_minus
        tol = self.cfg.tilde_tol
        b = b0
        for _ in range(3):
            res = minimize(
                negf,
                b,
                jac=True,
                method="L-BFGS-B",
                options={"maxiter": self.cfg.max_iter, "gtol": tol / np.sqrt(n), "ftol": 0.0, "maxcor": 20},
            )
            b = res.x
            if np.linalg.norm(res.jac) <= tol:
                break
        val, gb, _ = self._value_grad_b(t, b)
        self._check_concavity(t, b, val)
        return b, val

    def _check_concavity(self, t, b, val):
        rng = np.random.default_rng(len(b))
        eps = 1e-3 * (1.0 + np.linalg.norm(b))
        for _ in range(2):
            d = rng.standard_normal(b.shape)
            d /= np.linalg.norm(d)
            vp, _, _ = self._value_grad_b(t, b + eps * d)
            vm, _, _ = self._value_grad_b(t, b - eps * d)
            curv = (vp + vm - 2 * val) / eps**2
            if curv > self.cfg.curvature_tol * (1.0 + abs(val) / eps**2 * 1e-12):
                raise NonConcave(f"positive curvature {curv:.3e} of the inner functional in the negative subspace")

    def phi(self, t):
        """Value of the inner maximization at t (cached), plus its maximizer."""
        if t in self.cache:
            return self.cache[t]
        if self.cache:
            near = min(self.cache, key=lambda s: abs(s - t))
            b0 = self.cache[near][0] * (t / near if near > 0 else 1.0)
        else:
            b0 = self.b_guess
        b, val = self.solve_b(t, b0)
        self.cache[t] = (b, val)
        return b, val

    def dphi(self, t):
        """Danskin derivative d/dt at the maximizer: t - int f(w) . P."""
        b, _ = self.phi(t)
        nodes = t * self.P + self.basis.minus_nodes(b)
        return t - self.w * float(np.sum(self.model.force(nodes) * self.P))

    def _state(self, t, b):
        nodes = t * self.P + self.basis.minus_nodes(b)
        f = self.model.force(nodes)
        val = 0.5 * t * t - 0.5 * b @ b - self.w * np.sum(self.model.density(nodes))
        g = np.concatenate([[t - self.w * float(np.sum(f * self.P))], -b - self.basis.pull_minus(f)])
        return val, g, nodes

    def newton(self, t0, b0, max_iter=30):
        """Joint Newton ascent in (t, b) from a nearby point; None if it cannot certify progress.

        Only used from warm starts: the maximizer is the unique interior
        critical point, but the Hessian is indefinite far from it.
        """
        cols = np.concatenate([self.P[None], self.basis.minus_fields])
        sign = -np.ones(len(cols))
        sign[0] = 1.0
        t, b = float(t0), np.asarray(b0, dtype=float)
        val, g, nodes = self._state(t, b)
        tol = 1e-3 * self.cfg.tilde_tol * (1.0 + t)
        for _ in range(max_iter):
            if np.linalg.norm(g) <= tol:
                return t, b, val
            jac = self.model.force_jacobian(nodes)
            dcols = np.einsum("ijm,cjm->cim", jac, cols)
            H = np.diag(sign) - self.w * np.einsum("cim,dim->cd", cols, dcols)
            try:
                L = np.linalg.cholesky(-H)
            except np.linalg.LinAlgError:
                return None
            step = np.linalg.solve(L.T, np.linalg.solve(L, g))
            decrement = float(g @ step)
            if decrement <= 1e-30 * (1.0 + abs(val)):
                return t, b, val
            s = 1.0
            for _ in range(30):
                tn, bn = t + s * step[0], b + s * step[1:]
                if tn > 0:
                    vn, gn, nn = self._state(tn, bn)
                    if vn >= val - 1e-14 * (1.0 + abs(val)):
                        break
                s *= 0.5
            else:
                return None
            t, b, val, g, nodes = tn, bn, vn, gn, nn
        return (t, b, val) if np.linalg.norm(g) <= 1e3 * tol else None

    def maximize(self, t0=1.0, warm=False):
        if warm:
            out = self.newton(t0, self.b_guess)
            if out is not None:
                return out
        cfg = self.cfg
        g = cfg.bracket_growth
        t = max(float(t0), 1e-8)
        d = self.dphi(t)
        if d > 0:
            lo = t
            hi = t * g
            while self.dphi(hi) > 0:
                lo, hi = hi, hi * g
                if hi > cfg.t_max:
                    raise InnerDiverged(f"t-bracket exceeded {cfg.t_max:g} without turning down")
        else:
            hi = t
            lo = t / g
            while self.dphi(lo) <= 0:
                hi, lo = lo, lo / g
                if lo < 1e-12:
                    raise InnerDiverged("maximizing t collapsed to 0")
        # invariant from here on: dphi(lo) > 0 >= dphi(hi)
        if self.dphi(hi) == 0.0:
            t_star = hi
        else:
            a, b = self._golden(lo, hi)
            # polish on the derivative; fall back to the full bracket if the
            # golden interval lost the sign change at one of its ends
            if self.dphi(a) > 0 > self.dphi(b):
                lo, hi = a, b
            t_star = brentq(self.dphi, lo, hi, xtol=1e-15 * hi, rtol=1e-15)
        b, val = self.phi(t_star)
        return t_star, b, val

    def _golden(self, a, b):
        tol = self.cfg.golden_tol
        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        fc, fd = self.phi(c)[1], self.phi(d)[1]
        for _ in range(200):
            # the derivative polish takes over once the bracket is 1e-3 relative
            if b - a <= tol * max(1.0, b) or b - a <= 1e-3 * b:
                break
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - GOLDEN * (b - a)
                fc = self.phi(c)[1]
            else:
                a, c, fc = c, d, fd
                d = a + GOLDEN * (b - a)
                fd = self.phi(d)[1]
        return a, b


def _inner(basis, a_hat, cfg: InnerConfig, t0=1.0, b0=None):
    prob = _InnerProblem(basis, a_hat, cfg)
    if b0 is not None:
        prob.b_guess = b0
    t, b, val = prob.maximize(t0, warm=b0 is not None)
    return prob, t, b, val


def inner_maximize(ctx: EnergyContext, u_plus: VectorField, config: SolverConfig | None = None) -> InnerResult:
    """Maximize J over the half-space R+ u_plus + X~ for a unit u_plus in X+."""
    cfg = (config or SolverConfig()).inner
    basis = ScaledBasis(ctx)
    a = basis.plus_coords(u_plus.values)
    norm = np.linalg.norm(a)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"u_plus must have unit split norm, got {norm:.12g}")
    if np.max(np.abs(ctx.split.project_minus(u_plus).values)) > 1e-10 * max(1.0, np.max(np.abs(u_plus.values))):
        raise ValueError("u_plus has a component in the negative subspace")
    _, t, b, val = _inner(basis, a, cfg)
    return InnerResult(t, VectorField(ctx.grid, basis.minus_nodes(b)), val)


def _symmetry_step(ctx: EnergyContext) -> tuple[int, ...]:
    pot = ctx.split.potential
    return ctx.grid.nodes_per_period(pot.period)


def _centering_shift(ctx: EnergyContext, nodes: np.ndarray) -> list[int]:
    """Shift (in nodes, multiple of the symmetry step) bringing the peak nearest the center.

    Ties in the pointwise maximum resolve to the lowest flat index.
    """
    g = ctx.grid
    amp = np.sqrt(np.sum(nodes**2, axis=0)).reshape(g.shape)
    peak = np.unravel_index(int(np.argmax(amp)), g.shape)
    step = _symmetry_step(ctx)
    out = []
    for d in range(g.dim):
        n = g.points[d]
        delta = (peak[d] - n // 2) % n
        if delta > n // 2:
            delta -= n
        out.append(int(round(delta / step[d])) * step[d])
    return out


def refine_translation(result: SolveResult, ctx: EnergyContext) -> SolveResult:
    """Recenter u so its pointwise-norm maximum sits at the box center.

    Only shifts that are symmetries of the discrete problem are used: any
    node count for constant potentials, whole periods otherwise.
    """
    s = _centering_shift(ctx, result.u.values)
    if not any(s):
        return result
    u = shift_nodes(result.u, s)
    return replace(result, u=u, c_value=energy(ctx, u), residuals=nehari_residuals(ctx, u))


def _random_start(basis: ScaledBasis, ctx: EnergyContext, rng, fraction: float):
    a = np.zeros(basis.n_plus)
    for i, part in enumerate(ctx.split.parts):
        n = basis.plus_sizes[i]
        m = max(1, int(np.ceil(fraction * n)))
        lo = basis.plus_offsets[i]
        # positive eigenvalues ascend, so the lowest modes come first
        a[lo : lo + m] = rng.standard_normal(m)
    return a / np.linalg.norm(a)


@dataclass
class _Run:
    a: np.ndarray
    t: float
    b: np.ndarray
    value: float
    converged: bool
    iterations: int
    history: list
    cerami: float


def _descend(basis: ScaledBasis, ctx: EnergyContext, a0, cfg: SolverConfig, label: str) -> _Run:
    icfg, ocfg = cfg.inner, cfg.outer
    a = a0 / np.linalg.norm(a0)
    prob, t, b, m = _inner(basis, a, icfg)
    history = []
    prev = None
    eta = 1.0 / max(t * t, 1.0)
    model, w = ctx.model, basis.w

    def reduced_grad(a, t, b):
        nodes = t * basis.plus_nodes(a) + basis.minus_nodes(b)
        f = model.force(nodes)
        ga = t * a - basis.pull_plus(f)
        gb = -b - basis.pull_minus(f)
        tang = ga - (ga @ a) * a
        norm_w = np.sqrt(t * t + b @ b)
        gnorm = np.sqrt(ga @ ga + gb @ gb)
        return t * tang, (1.0 + norm_w) * gnorm

    G, cer = reduced_grad(a, t, b)
    for it in range(1, ocfg.max_iter + 1):
        history.append((m, cer))
        # half the configured tolerance leaves room for the node-space recomputation
        scale = 0.5 * (1.0 + abs(m))
        if cer <= ocfg.cerami_tol * scale and np.linalg.norm(G) <= ocfg.sphere_tol * scale:
            return _Run(a, t, b, m, True, it - 1, history, cer)
        if prev is not None:
            s, y = a - prev[0], G - prev[1]
            sy = s @ y
            if sy > 0:
                eta = float(np.clip((s @ s) / sy, 1e-8, 1e8))
        g2 = G @ G
        step = eta
        accepted = False
        for _ in range(ocfg.max_backtracks):
            trial = a - step * G
            trial /= np.linalg.norm(trial)
            _, tt, bt, mt = _inner(basis, trial, icfg, t0=t, b0=b)
            if mt <= m - ocfg.armijo * step * g2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # descent stalled at the resolution of the inner solves
            log.debug("%s: line search stalled at iteration %d", label, it)
            return _Run(a, t, b, m, False, it, history, cer)
        prev = (a, G)
        a, t, b, m = trial, tt, bt, mt
        if cfg.centering:
            shift = _centering_shift(ctx, t * basis.plus_nodes(a) + basis.minus_nodes(b))
            if any(shift):
                shape = (basis.K,) + ctx.grid.shape
                axes = tuple(range(1, ctx.grid.dim + 1))
                neg_shift = tuple(-s for s in shift)
                pn = np.roll(basis.plus_nodes(a).reshape(shape), neg_shift, axis=axes).reshape(basis.K, -1)
                mn = np.roll(basis.minus_nodes(b).reshape(shape), neg_shift, axis=axes).reshape(basis.K, -1)
                a = basis.plus_coords(pn)
                a /= np.linalg.norm(a)
                b = basis.minus_coords(mn)
                prev = None
        G, cer = reduced_grad(a, t, b)
    history.append((m, cer))
    return _Run(a, t, b, m, False, ocfg.max_iter, history, cer)


def _overlap(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(abs(np.sum(u * v)) / (nu * nv))


def minimize_sphere(ctx: EnergyContext, config: SolverConfig | None = None) -> SolveResult:
    """Multistart minimization of the reduced value over the unit sphere of X+."""
    cfg = config or SolverConfig()
    basis = ScaledBasis(ctx)
    if basis.n_plus == 0:
        raise ValueError("positive spectral subspace is empty")
    starts = []
    if cfg.warm_start is not None:
        starts.append(("warm", basis.plus_coords(cfg.warm_start.values)))
    for s in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, s])
        starts.append((f"start{s}", _random_start(basis, ctx, rng, cfg.init_fraction)))

    def job(item):
        label, a0 = item
        try:
            return _descend(basis, ctx, a0, cfg, label)
        except (InnerDiverged, NonConcave):
            raise

    threads = cfg.threads or int(os.environ.get(THREADS_ENV, "1"))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            runs = list(ex.map(job, starts))
    else:
        runs = [job(s) for s in starts]

    table = []
    fields = []
    for j, run in enumerate(runs):
        nodes = run.t * basis.plus_nodes(run.a) + basis.minus_nodes(run.b)
        fields.append(nodes)
        table.append(
            StartRecord(j, float(run.value), run.converged, run.iterations, float(run.cerami), float(run.t), float(np.linalg.norm(run.b)))
        )
    conv = [j for j, r in enumerate(runs) if r.converged]
    pool = conv if conv else list(range(len(runs)))
    best = min(pool, key=lambda j: runs[j].value)
    run = runs[best]
    u = VectorField(ctx.grid, fields[best])
    nonunique = []
    for i in conv:
        for j in conv:
            if i < j and abs(runs[i].value - runs[j].value) <= 1e-8 * (1 + abs(runs[i].value)):
                if _overlap(fields[i], fields[j]) < 0.5:
                    nonunique.append((i, j))
    result = SolveResult(
        u=u,
        c_value=energy(ctx, u),
        residuals=nehari_residuals(ctx, u),
        history=run.history,
        inner_diagnostics={"t": float(run.t), "tilde_norm": float(np.linalg.norm(run.b)), "start": best},
        multistart_table=table,
        converged=run.converged,
        iterations=run.iterations,
        nonunique=nonunique,
    )
    if cfg.centering:
        result = refine_translation(result, ctx)
    if not conv:
        raise MaxIterations(f"no start converged; best cerami {run.cerami:.3e}", best=result)
    return result
