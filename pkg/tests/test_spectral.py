import numpy as np
import pytest
from scipy.special import mathieu_a, mathieu_b

from gapsoliton.errors import CapExceeded, GapViolation, GridMismatch
from gapsoliton.grid import VectorField, gradient_components, integrate, make_grid
from gapsoliton.spectral import (
    PeriodicPotential,
    assemble_and_split,
    bloch_bands,
    gap_center_shift,
    laplacian_matrix,
    project_minus,
    project_plus,
    sigma_ess_proxy,
    split_inner,
)

from conftest import CELL_N, gap_potential, smooth_field

Q = 5 / np.pi**2  # -u'' + 10 cos(2 pi x) u = E u is Mathieu's equation with q = 5/pi^2, a = E/pi^2


def mathieu_edges():
    return np.pi**2 * np.array([mathieu_a(0, Q), mathieu_b(1, Q), mathieu_a(1, Q), mathieu_b(2, Q)])


def test_bloch_matches_mathieu():
    cell = 10 * np.cos(2 * np.pi * np.arange(CELL_N) / CELL_N)
    _, bands = bloch_bands(cell, [1.0], 64, nbands=2)
    got = [bands[:, 0].min(), bands[:, 0].max(), bands[:, 1].min(), bands[:, 1].max()]
    assert np.allclose(got, mathieu_edges(), atol=1e-6)


def test_bloch_free_particle():
    _, bands = bloch_bands(np.zeros(16), [2.0], 32, nbands=3)
    assert bands[:, 0].min() == pytest.approx(0.0, abs=1e-12)
    assert bands[:, 0].max() == pytest.approx((np.pi / 2) ** 2, rel=1e-12)


def test_gap_center_shift():
    e = mathieu_edges()
    cell = 10 * np.cos(2 * np.pi * np.arange(CELL_N) / CELL_N)
    assert gap_center_shift(cell, [1.0]) == pytest.approx(0.5 * (e[1] + e[2]), abs=1e-6)


def test_constant_potential_spectrum():
    g = make_grid(1, [40.0], [256])
    split = assemble_and_split(g, PeriodicPotential.constant(g, [1.0]))
    assert split.eigenvalues().min() == pytest.approx(1.0, abs=1e-10)
    assert split.neg_dimensions() == [0]


def test_single_negative_mode():
    g = make_grid(1, [4.0], [64])
    split = assemble_and_split(g, PeriodicPotential.constant(g, [-0.5]))
    assert split.neg_dimensions() == [1]
    lam = np.sort(split.eigenvalues().ravel())
    assert lam[0] == pytest.approx(-0.5, abs=1e-10)
    assert lam[1] == pytest.approx((np.pi / 2) ** 2 - 0.5, abs=1e-10)


def test_gap_case_split(gap_split):
    e = mathieu_edges()
    s = 0.5 * (e[1] + e[2])
    lo, hi = gap_split.parts[0].gap_bounds
    # one negative state per period in the first band
    assert gap_split.neg_dimensions() == [16]
    assert gap_split.pos_dimensions()[0] > 0
    width = (hi - lo) / (e[2] - e[1])
    assert abs(width - 1) <= 0.02
    assert lo <= e[1] - s + 1e-6 and hi >= e[2] - s - 1e-6


def test_zero_mode_is_gap_violation():
    g = make_grid(1, [40.0], [128])
    with pytest.raises(GapViolation) as err:
        assemble_and_split(g, PeriodicPotential.constant(g, [0.0]))
    assert err.value.component == 0


def test_cap():
    g = make_grid(1, [40.0], [256])
    with pytest.raises(CapExceeded):
        assemble_and_split(g, PeriodicPotential.constant(g, [1.0]), dof_cap=128)


def test_grid_mismatch():
    g = make_grid(1, [40.0], [128])
    h = make_grid(1, [40.0], [256])
    with pytest.raises(GridMismatch):
        assemble_and_split(g, PeriodicPotential.constant(h, [1.0]))


def test_potential_must_be_periodic():
    g = make_grid(1, [4.0], [64])
    with pytest.raises(ValueError, match="periodic"):
        PeriodicPotential(g, np.arange(64.0), (1.0,))


def test_laplacian_matrix_2d_kron():
    g = make_grid(2, [2.0, 3.0], [8, 12])
    A = laplacian_matrix(g)
    u = np.random.default_rng(0).standard_normal(g.size)
    from gapsoliton.grid import laplacian

    assert np.allclose(A @ u, laplacian(VectorField(g, u)).values[0], atol=1e-10)


@pytest.fixture(scope="module")
def splits():
    g1 = make_grid(1, [8.0], [128])
    g2 = make_grid(2, [2.0, 2.0], [16, 16])
    return {
        "const": assemble_and_split(g1, PeriodicPotential.constant(g1, [1.0, 2.0])),
        "neg": assemble_and_split(g1, PeriodicPotential.constant(g1, [-0.1])),
        "gap": assemble_and_split(g1, gap_potential(g1)[0]),
        "2d": assemble_and_split(
            g2, PeriodicPotential.cosine_sum(g2, -3.0, [(2.0, [1, 0]), (2.0, [0, 1])], [1.0, 1.0])
        ),
    }


@pytest.mark.parametrize("name", ["const", "neg", "gap", "2d"])
def test_projector_algebra(splits, name, rng):
    split = splits[name]
    for _ in range(10):
        u = VectorField(split.grid, rng.standard_normal((split.components, split.grid.size)))
        p, m = project_plus(split, u), project_minus(split, u)
        scale = np.max(np.abs(u.values))
        assert np.max(np.abs((p + m - u).values)) <= 1e-10 * scale
        assert np.max(np.abs(project_minus(split, p).values)) <= 1e-10 * scale
        assert np.max(np.abs((project_plus(split, p) - p).values)) <= 1e-10 * scale


@pytest.mark.parametrize("name", ["const", "neg", "gap", "2d"])
def test_split_norm_orthogonal(splits, name, rng):
    split = splits[name]
    u = VectorField(split.grid, rng.standard_normal((split.components, split.grid.size)))
    p, m = split.project_plus(u), split.project_minus(u)
    total = split_inner(split, u, u)
    assert total == pytest.approx(split_inner(split, p, p) + split_inner(split, m, m), rel=1e-10)
    assert abs(split_inner(split, p, m)) <= 1e-10 * total


def test_eigenvector_norm(splits):
    split = splits["gap"]
    part = split.parts[0]
    j = 3
    vec = part.eigenvectors[:, j] / np.sqrt(split.grid.weight)
    u = VectorField(split.grid, vec)
    assert split_inner(split, u, u) == pytest.approx(abs(part.eigenvalues[j]), rel=1e-10)
    assert np.max(np.abs(split.project_plus(u).values)) < 1e-10 * np.max(np.abs(vec))


def test_split_inner_positive_case(rng):
    g = make_grid(1, [2 * np.pi], [64])
    split = assemble_and_split(g, PeriodicPotential.constant(g, [1.0]))
    u = smooth_field(g, rng)
    direct = sum(integrate(g, c[0] ** 2) for c in gradient_components(u)) + integrate(g, u.values[0] ** 2)
    assert split_inner(split, u, u) == pytest.approx(direct, abs=1e-8)


@pytest.mark.parametrize("c", [1.0, -0.5])
def test_sigma_constant(c):
    g = make_grid(1, [4.0], [64])
    split = assemble_and_split(g, PeriodicPotential.constant(g, [c]), gap_tol=1e-12)
    assert sigma_ess_proxy(split) == pytest.approx(c, abs=1e-8)


def test_sigma_cosine():
    g = make_grid(1, [8.0], [256])
    split = assemble_and_split(g, PeriodicPotential.cosine_sum(g, 0.0, [(10.0, [1])], [1.0]), gap_tol=1e-12)
    assert sigma_ess_proxy(split) == pytest.approx(mathieu_edges()[0], abs=1e-6)


def test_summary_fields(gap_split):
    s = gap_split.summary()
    row = s["components"][0]
    assert row["neg_dimension"] == 16
    assert row["sup_negative"] < 0 < row["inf_positive"]
