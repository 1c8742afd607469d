"""
Discrete Schrodinger operators H_i = -Laplacian + V_i and their sign splitting.

Each H_i is assembled as a dense symmetric matrix (spectral Laplacian plus a
diagonal potential) and diagonalized once.  Everything downstream, the
projections onto the positive and negative spectral subspaces, the
|H_i|-weighted inner product and the energy, is expressed through the
eigenbasis coefficients

    c_{i,m} = <u_i, e_{i,m}>_{L^2},

where e_{i,m} are the L^2-orthonormal eigenvectors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import CapExceeded, GapViolation, GridMismatch
from .grid import TorusGrid, VectorField

log = logging.getLogger(__name__)

DEFAULT_GAP_TOL = 1e-8
DEFAULT_DOF_CAP = 8192
DEFAULT_BLOCH_SAMPLES = 64


@dataclass(frozen=True)
class PeriodicPotential:
    """Sampled potentials V_1..V_K with a declared fundamental period.

    Samples are produced on one period cell and tiled over the supercell, so a
    shift by one period reproduces them bit for bit.
    """

    grid: TorusGrid
    values: np.ndarray
    period: tuple[float, ...]

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if v.shape[1] != self.grid.size:
            raise GridMismatch(f"potential has {v.shape[1]} samples, grid has {self.grid.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("potential samples must be finite")
        period = tuple(float(p) for p in self.period)
        if len(period) != self.grid.dim:
            raise ValueError("period needs one entry per dimension")
        per = self.grid.nodes_per_period(period)
        cells = v.reshape((v.shape[0],) + self.grid.shape)
        for d, r in enumerate(per):
            if not np.array_equal(cells, np.roll(cells, -r, axis=d + 1)):
                raise ValueError(f"potential samples are not periodic with period {period[d]}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "period", period)

    @property
    def components(self) -> int:
        return self.values.shape[0]

    @property
    def ess_inf(self) -> np.ndarray:
        """Per-component sample minimum (the -V_0 lower bound)."""
        return self.values.min(axis=1)

    @property
    def sup_norm(self) -> np.ndarray:
        return np.abs(self.values).max(axis=1)

    def cell_values(self, i: int) -> np.ndarray:
        per = self.grid.nodes_per_period(self.period)
        block = self.values[i].reshape(self.grid.shape)
        return block[tuple(slice(0, r) for r in per)]

    @classmethod
    def from_cell_function(
        cls,
        grid: TorusGrid,
        funcs: Sequence[Callable[..., np.ndarray]],
        period: Sequence[float],
    ) -> "PeriodicPotential":
        """Sample each ``func(x[, y])`` on one cell and tile it over the box."""
        period = tuple(float(p) for p in period)
        per = grid.nodes_per_period(period)
        cell_axes = [np.arange(r) * h for r, h in zip(per, grid.spacing)]
        mesh = np.meshgrid(*cell_axes, indexing="ij")
        reps = tuple(n // r for n, r in zip(grid.points, per))
        rows = []
        for func in funcs:
            cell = np.broadcast_to(np.asarray(func(*mesh), dtype=float), mesh[0].shape)
            rows.append(np.tile(cell, reps).ravel())
        return cls(grid, np.array(rows), period)

    @classmethod
    def constant(cls, grid: TorusGrid, values: Sequence[float], period=None) -> "PeriodicPotential":
        """Constant potentials; the declared period defaults to one grid spacing."""
        period = tuple(period) if period is not None else grid.spacing
        funcs = [(lambda *x, c=float(c): np.full(x[0].shape, c)) for c in values]
        return cls.from_cell_function(grid, funcs, period)

    @classmethod
    def cosine_sum(
        cls,
        grid: TorusGrid,
        offset: float,
        terms: Sequence[tuple[float, Sequence[int]]],
        period: Sequence[float],
        components: int = 1,
    ) -> "PeriodicPotential":
        """V(x) = offset + sum_j a_j cos(2 pi m_j . x / period) for every component."""
        period = tuple(float(p) for p in period)

        def func(*x):
            out = np.full(x[0].shape, float(offset))
            for amp, harm in terms:
                phase = sum(2 * np.pi * m * xd / p for m, xd, p in zip(harm, x, period))
                out = out + amp * np.cos(phase)
            return out

        return cls.from_cell_function(grid, [func] * components, period)

    def shifted(self, amounts: Sequence[float]) -> "PeriodicPotential":
        """Add a constant per component (used to place 0 inside a gap)."""
        vals = self.values + np.asarray(amounts, dtype=float)[:, None]
        return PeriodicPotential(self.grid, vals, self.period)


def laplacian_matrix(grid: TorusGrid) -> np.ndarray:
    """Dense matrix of the spectral Laplacian acting on flattened node values."""
    mats = []
    for L, n in zip(grid.box_lengths, grid.points):
        k = 2 * np.pi * np.fft.fftfreq(n, d=L / n)
        col = np.fft.ifft(-(k**2)).real
        mats.append(scipy.linalg.circulant(col))
    if grid.dim == 1:
        D = mats[0]
    else:
        a, b = mats
        D = np.kron(a, np.eye(b.shape[0])) + np.kron(np.eye(a.shape[0]), b)
    return 0.5 * (D + D.T)


def bloch_bands(
    cell_potential: np.ndarray,
    period: Sequence[float],
    samples: int = DEFAULT_BLOCH_SAMPLES,
    nbands: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Band energies of -Laplacian + V on one cell over sampled quasimomenta.

    Quasimomenta run over [-pi/p, pi/p] inclusive with ``samples`` intervals
    per dimension.  Returns ``(quasimomenta, bands)`` with ``bands`` of shape
    (number of k-points, nbands).
    """
    cell = np.asarray(cell_potential, dtype=float)
    dim = cell.ndim
    period = tuple(period)
    shape = cell.shape
    r_total = cell.size
    nbands = r_total if nbands is None else min(nbands, r_total)
    dfts, Gs = [], []
    for r, p in zip(shape, period):
        dfts.append(np.fft.fft(np.eye(r), axis=0, norm="ortho"))
        Gs.append(2 * np.pi * np.fft.fftfreq(r, d=p / r))
    F = dfts[0] if dim == 1 else np.kron(dfts[0], dfts[1])
    ks_1d = [np.pi / p * np.linspace(-1.0, 1.0, samples + 1) for p in period]
    kpts = np.stack([m.ravel() for m in np.meshgrid(*ks_1d, indexing="ij")], axis=1)
    Gmesh = [m.ravel() for m in np.meshgrid(*Gs, indexing="ij")]
    Vd = np.diag(cell.ravel())
    bands = np.empty((len(kpts), nbands))
    for j, kv in enumerate(kpts):
        kin = sum((kd + G) ** 2 for kd, G in zip(kv, Gmesh))
        H = F.conj().T @ (kin[:, None] * F) + Vd
        H = 0.5 * (H + H.conj().T)
        bands[j] = scipy.linalg.eigh(H, eigvals_only=True, subset_by_index=[0, nbands - 1])
    return kpts, bands


@dataclass(frozen=True)
class ComponentSplit:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # Euclidean-orthonormal columns
    neg: np.ndarray  # boolean mask over eigen-indices

    @property
    def pos(self) -> np.ndarray:
        return ~self.neg

    @property
    def gap_bounds(self) -> tuple[float | None, float | None]:
        lam = self.eigenvalues
        below = lam[self.neg]
        above = lam[~self.neg]
        return (float(below.max()) if below.size else None, float(above.min()) if above.size else None)


@dataclass(frozen=True)
class SpectralSplit:
    """Eigendecompositions of every H_i together with the sign partition."""

    grid: TorusGrid
    potential: PeriodicPotential
    parts: tuple[ComponentSplit, ...]
    gap_tol: float = DEFAULT_GAP_TOL
    bloch_samples: int = DEFAULT_BLOCH_SAMPLES
    _sigma: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def components(self) -> int:
        return len(self.parts)

    @property
    def sqrt_weight(self) -> float:
        return float(np.sqrt(self.grid.weight))

    def neg_dimensions(self) -> list[int]:
        return [int(p.neg.sum()) for p in self.parts]

    def pos_dimensions(self) -> list[int]:
        return [int(p.pos.sum()) for p in self.parts]

    def _check(self, u: VectorField):
        if u.grid != self.grid or u.components != self.components:
            raise GridMismatch("field does not match the split's grid or component count")

    def coefficients(self, u: VectorField) -> np.ndarray:
        """L^2 eigenbasis coefficients, shape (K, M)."""
        self._check(u)
        sw = self.sqrt_weight
        return np.stack([sw * (p.eigenvectors.T @ u.values[i]) for i, p in enumerate(self.parts)])

    def from_coefficients(self, coeffs: np.ndarray) -> VectorField:
        sw = self.sqrt_weight
        vals = np.stack([(p.eigenvectors @ coeffs[i]) / sw for i, p in enumerate(self.parts)])
        return VectorField(self.grid, vals)

    def eigenvalues(self) -> np.ndarray:
        return np.stack([p.eigenvalues for p in self.parts])

    def neg_mask(self) -> np.ndarray:
        return np.stack([p.neg for p in self.parts])

    def project_plus(self, u: VectorField) -> VectorField:
        self._check(u)
        out = []
        for i, p in enumerate(self.parts):
            Q = p.eigenvectors[:, p.pos]
            out.append(Q @ (Q.T @ u.values[i]))
        return u.with_values(np.stack(out))

    def project_minus(self, u: VectorField) -> VectorField:
        self._check(u)
        out = []
        for i, p in enumerate(self.parts):
            Q = p.eigenvectors[:, p.neg]
            out.append(Q @ (Q.T @ u.values[i]))
        return u.with_values(np.stack(out))

    def split_inner(self, u: VectorField, v: VectorField) -> float:
        """sum_i <|H_i| u_i, v_i>_{L^2}."""
        cu, cv = self.coefficients(u), self.coefficients(v)
        return float(np.sum(np.abs(self.eigenvalues()) * cu * cv))

    def split_norm(self, u: VectorField) -> float:
        return float(np.sqrt(self.split_inner(u, u)))

    def sigma_ess_proxy(self) -> float:
        return sigma_ess_proxy(self)

    def summary(self) -> dict:
        rows = []
        for i, p in enumerate(self.parts):
            lo, hi = p.gap_bounds
            rows.append(
                {
                    "component": i,
                    "neg_dimension": int(p.neg.sum()),
                    "pos_dimension": int(p.pos.sum()),
                    "sup_negative": lo,
                    "inf_positive": hi,
                    "lowest": float(p.eigenvalues[0]),
                }
            )
        return {"components": rows, "sigma": self.sigma_ess_proxy(), "gap_tol": self.gap_tol}


def _split_component(H: np.ndarray, gap_tol: float, component: int) -> ComponentSplit:
    lam, Q = scipy.linalg.eigh(H, driver="evd")
    close = np.abs(lam) < gap_tol
    if np.any(close):
        bad = float(lam[close][0])
        raise GapViolation(
            f"component {component}: eigenvalue {bad:.3e} within gap_tol={gap_tol:g} of 0",
            component=component,
            eigenvalue=bad,
        )
    return ComponentSplit(lam, Q, lam < 0)


def assemble_and_split(
    grid: TorusGrid,
    potential: PeriodicPotential,
    gap_tol: float = DEFAULT_GAP_TOL,
    dof_cap: int = DEFAULT_DOF_CAP,
    bloch_samples: int = DEFAULT_BLOCH_SAMPLES,
) -> SpectralSplit:
    if potential.grid != grid:
        raise GridMismatch("potential sampled on a different grid")
    if grid.size > dof_cap:
        raise CapExceeded(f"M={grid.size} exceeds the dense eigensolver cap {dof_cap}")
    lap = laplacian_matrix(grid)
    parts: list[ComponentSplit] = []
    seen: dict[bytes, ComponentSplit] = {}
    for i in range(potential.components):
        key = potential.values[i].tobytes()
        if key not in seen:
            H = -lap + np.diag(potential.values[i])
            seen[key] = _split_component(H, gap_tol, i)
        parts.append(seen[key])
    split = SpectralSplit(grid, potential, tuple(parts), gap_tol, bloch_samples)
    log.debug("split: neg dims %s, pos dims %s", split.neg_dimensions(), split.pos_dimensions())
    return split


def project_plus(split: SpectralSplit, u: VectorField) -> VectorField:
    return split.project_plus(u)


def project_minus(split: SpectralSplit, u: VectorField) -> VectorField:
    return split.project_minus(u)


def split_inner(split: SpectralSplit, u: VectorField, v: VectorField) -> float:
    return split.split_inner(u, v)


def sigma_ess_proxy(split: SpectralSplit) -> float:
    """Bottom of the spectrum over all components from a single-cell Bloch sweep."""
    if "value" not in split._sigma:
        pot = split.potential
        lows = []
        cache: dict[bytes, float] = {}
        for i in range(pot.components):
            cell = pot.cell_values(i)
            key = cell.tobytes()
            if key not in cache:
                _, bands = bloch_bands(cell, pot.period, split.bloch_samples, nbands=1)
                cache[key] = float(bands[:, 0].min())
            lows.append(cache[key])
        split._sigma["value"] = min(lows)
    return split._sigma["value"]


def gap_center_shift(
    cell_potential: np.ndarray, period: Sequence[float], band: int = 1, samples: int = DEFAULT_BLOCH_SAMPLES
) -> float:
    """Constant s such that V - s has 0 at the midpoint of the gap above ``band``."""
    _, bands = bloch_bands(cell_potential, period, samples, nbands=band + 1)
    top = bands[:, band - 1].max()
    bottom = bands[:, band].min()
    if bottom <= top:
        raise GapViolation(f"no gap between bands {band} and {band + 1} (overlap {top - bottom:.3e})")
    return 0.5 * (top + bottom)
