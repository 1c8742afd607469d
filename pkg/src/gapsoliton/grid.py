"""
Periodic supercell discretization.

The whole space is replaced by a torus [0, L_1) x ... x [0, L_N) sampled on a
uniform tensor grid.  Derivatives are taken by trigonometric interpolation
(FFT), integrals by the rectangle rule, which is spectrally accurate for
smooth periodic integrands.

Field values are stored as a ``(K, M)`` array where ``M = prod(n_d)`` and the
spatial index is flattened in C order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GridMismatch, IncommensurateShift, UnsupportedDimension

MIN_POINTS = 8


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on a box of side lengths ``box_lengths``.

    Attributes:
        dim: spatial dimension, 1 or 2.
        box_lengths: physical side lengths L_d.
        points: node counts n_d.
    """

    dim: int
    box_lengths: tuple[float, ...]
    points: tuple[int, ...]
    wavenumbers: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise UnsupportedDimension(f"unsupported dimension {self.dim}; only N in {{1, 2}}")
        if len(self.box_lengths) != self.dim or len(self.points) != self.dim:
            raise ValueError("box_lengths and points must have one entry per dimension")
        for L in self.box_lengths:
            if not (np.isfinite(L) and L > 0):
                raise ValueError(f"box length must be positive, got {L}")
        for n in self.points:
            if int(n) != n or n < MIN_POINTS:
                raise ValueError(f"need at least {MIN_POINTS} points per dimension, got {n}")
        ks = tuple(
            2.0 * np.pi * np.fft.fftfreq(n, d=L / n) for L, n in zip(self.box_lengths, self.points)
        )
        object.__setattr__(self, "wavenumbers", ks)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.box_lengths, self.points))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.points)

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def weight(self) -> float:
        """Quadrature weight per node, prod(h_d)."""
        return float(np.prod(self.spacing))

    def axes(self) -> list[np.ndarray]:
        return [np.arange(n) * h for n, h in zip(self.points, self.spacing)]

    def coordinates(self) -> list[np.ndarray]:
        """Flattened node coordinates, one array of length M per dimension."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return [m.ravel() for m in mesh]

    def k_squared(self) -> np.ndarray:
        """|k|^2 on the FFT grid, shaped like the spatial grid."""
        mesh = np.meshgrid(*self.wavenumbers, indexing="ij")
        return sum(k**2 for k in mesh)

    def nodes_per_period(self, period: Sequence[float]) -> tuple[int, ...]:
        """Integer node count spanned by one period in each dimension."""
        out = []
        for p, h, L in zip(period, self.spacing, self.box_lengths):
            ratio = p / h
            r = int(round(ratio))
            if r < 1 or abs(ratio - r) > 1e-9 * max(1.0, ratio):
                raise IncommensurateShift(f"period {p} is not a multiple of spacing {h}")
            cells = L / p
            if abs(cells - round(cells)) > 1e-9 * max(1.0, cells):
                raise IncommensurateShift(f"period {p} does not divide box length {L}")
            out.append(r)
        return tuple(out)


def make_grid(dim: int, box_lengths: Sequence[float], points: Sequence[int]) -> TorusGrid:
    return TorusGrid(int(dim), tuple(float(L) for L in box_lengths), tuple(int(n) for n in points))


@dataclass(frozen=True)
class VectorField:
    """K-component real field sampled on a grid; ``values`` has shape (K, M)."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[1] != self.grid.size or v.shape[0] < 1:
            raise GridMismatch(
                f"field values of shape {np.shape(self.values)} do not fit grid with M={self.grid.size}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def components(self) -> int:
        return self.values.shape[0]

    def reshaped(self) -> np.ndarray:
        """Values as (K, n_1[, n_2])."""
        return self.values.reshape((self.components,) + self.grid.shape)

    def with_values(self, values) -> "VectorField":
        return VectorField(self.grid, values)

    def pointwise_norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=0))

    def __add__(self, other):
        return self.with_values(self.values + _values(other))

    def __sub__(self, other):
        return self.with_values(self.values - _values(other))

    def __mul__(self, scalar):
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _values(x):
    return x.values if isinstance(x, VectorField) else np.asarray(x, dtype=float)


def integrate(grid: TorusGrid, values) -> float:
    """Rectangle-rule integral of a scalar array over the torus."""
    a = np.asarray(values, dtype=float).ravel()
    if a.size != grid.size:
        raise GridMismatch(f"expected {grid.size} samples, got {a.size}")
    return float(np.sum(a) * grid.weight)


def inner_l2(u: VectorField, v: VectorField) -> float:
    """L^2 inner product summed over components."""
    if u.grid != v.grid or u.values.shape != v.values.shape:
        raise GridMismatch("fields live on different grids or have different K")
    return float(np.sum(u.values * v.values) * u.grid.weight)


def laplacian(u: VectorField) -> VectorField:
    g = u.grid
    axes = tuple(range(1, g.dim + 1))
    spec = np.fft.fftn(u.reshaped(), axes=axes)
    out = np.fft.ifftn(-g.k_squared()[None] * spec, axes=axes).real
    return u.with_values(out.reshape(u.components, -1))


def gradient_components(u: VectorField) -> list[np.ndarray]:
    """Spectral partial derivatives; entry d has shape (K, M)."""
    g = u.grid
    axes = tuple(range(1, g.dim + 1))
    spec = np.fft.fftn(u.reshaped(), axes=axes)
    mesh = np.meshgrid(*g.wavenumbers, indexing="ij")
    out = []
    for d, k in enumerate(mesh):
        n = g.points[d]
        k = k.copy()
        if n % 2 == 0:
            # Nyquist mode has no odd derivative on a real grid
            idx = [slice(None)] * g.dim
            idx[d] = n // 2
            k[tuple(idx)] = 0.0
        out.append(np.fft.ifftn(1j * k[None] * spec, axes=axes).real.reshape(u.components, -1))
    return out


def shift_nodes(u: VectorField, nodes: Sequence[int]) -> VectorField:
    """Cyclic shift so that the result at node j equals u at node j + nodes."""
    arr = u.reshaped()
    axes = tuple(range(1, u.grid.dim + 1))
    out = np.roll(arr, shift=tuple(-int(s) for s in nodes), axis=axes)
    return u.with_values(out.reshape(u.components, -1))


def shift(u: VectorField, z: Sequence[int], period: Sequence[float] | None = None) -> VectorField:
    """Translate by the lattice vector z (in units of ``period``): u -> u(. + z*period).

    ``period`` defaults to 1 in every dimension, i.e. a Z^N-periodic medium.
    """
    g = u.grid
    z = np.atleast_1d(np.asarray(z))
    if z.shape != (g.dim,):
        raise ValueError(f"lattice vector must have {g.dim} entries")
    if not np.all(np.asarray(z) == np.round(z)):
        raise IncommensurateShift("lattice vector must be integer")
    period = tuple(period) if period is not None else (1.0,) * g.dim
    per = g.nodes_per_period(period)
    return shift_nodes(u, [int(zz) * p for zz, p in zip(z, per)])
