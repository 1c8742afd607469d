import numpy as np
import pytest

from gapsoliton.errors import GridMismatch
from gapsoliton.functional import (
    EnergyContext,
    derivative,
    energy,
    energy_parts,
    gradient,
    gradient_dual_norm,
    fiber_margin,
    nehari_residuals,
)
from gapsoliton.grid import VectorField, make_grid
from gapsoliton.nonlinearity import GrossPitaevskii, PowerSum

from conftest import sech_field, smooth_field


def central_difference(ctx, u, h, eps):
    return (energy(ctx, u + h * eps) - energy(ctx, u - h * eps)) / (2 * eps)


def test_zero(sech_ctx):
    z = VectorField(sech_ctx.grid, np.zeros(sech_ctx.grid.size))
    assert energy(sech_ctx, z) == 0.0
    assert np.all(gradient(sech_ctx, z).values == 0.0)


def test_sech_energy(sech_ctx):
    assert energy(sech_ctx, sech_field(sech_ctx.grid)) == pytest.approx(4 / 3, abs=1e-6)


def test_scaling_bookkeeping(sech_ctx, rng):
    u = smooth_field(sech_ctx.grid, rng)
    quad, nl = energy_parts(sech_ctx, u)
    assert energy(sech_ctx, u * 2.0) == pytest.approx(4 * quad - 16 * nl, rel=1e-12)


def test_sech_is_critical(sech_ctx):
    g = gradient(sech_ctx, sech_field(sech_ctx.grid))
    assert np.max(np.abs(g.values)) <= 1e-6


def test_sech_nehari(sech_ctx):
    res = nehari_residuals(sech_ctx, sech_field(sech_ctx.grid))
    assert abs(res.r_self) <= 1e-6
    assert res.r_tilde == 0.0
    assert res.in_P
    assert res.cerami >= res.grad_norm


@pytest.mark.parametrize("which", ["small_ctx", "gap_ctx", "gp_ctx"])
def test_directional_derivative(which, request, rng):
    ctx = request.getfixturevalue(which)
    K = ctx.split.components
    for _ in range(5):
        u = smooth_field(ctx.grid, rng, K=K)
        h = smooth_field(ctx.grid, rng, K=K)
        fd = central_difference(ctx, u, h, 1e-4)
        an = derivative(ctx, u, h)
        assert an == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_splitting_identity(gap_ctx, rng):
    u = smooth_field(gap_ctx.grid, rng)
    split = gap_ctx.split
    p, m = split.project_plus(u), split.project_minus(u)
    _, nl = energy_parts(gap_ctx, u)
    expect = 0.5 * split.split_inner(p, p) - 0.5 * split.split_inner(m, m) - nl
    assert energy(gap_ctx, u) == pytest.approx(expect, rel=1e-10)


def test_negative_subspace_not_in_P(gap_ctx, rng):
    v = gap_ctx.split.project_minus(smooth_field(gap_ctx.grid, rng))
    assert not nehari_residuals(gap_ctx, v).in_P


def test_dual_norm_positive_case(small_ctx, rng):
    u = smooth_field(small_ctx.grid, rng)
    assert gradient_dual_norm(small_ctx, u) > 0


class TestFiberMargin:
    def test_identity(self, gap_ctx, rng):
        u = smooth_field(gap_ctx.grid, rng)
        zero = u * 0.0
        assert abs(fiber_margin(gap_ctx, u, 1.0, zero)) <= 1e-12 * (1 + abs(energy(gap_ctx, u)))

    def test_sampling(self, gap_ctx):
        rng = np.random.default_rng(5)
        split = gap_ctx.split
        worst = np.inf
        for _ in range(200):
            u = smooth_field(gap_ctx.grid, rng) * 10 ** rng.uniform(-1, 0.5)
            v = split.project_minus(smooth_field(gap_ctx.grid, rng)) * 10 ** rng.uniform(-1, 0.5)
            t = rng.uniform(0, 3)
            scale = 1 + split.split_norm(u) ** 4 + split.split_norm(v) ** 4
            worst = min(worst, fiber_margin(gap_ctx, u, t, v) / scale)
        assert worst >= -1e-9

    def test_rejects_plus_component(self, gap_ctx, rng):
        u = smooth_field(gap_ctx.grid, rng)
        with pytest.raises(ValueError):
            fiber_margin(gap_ctx, u, 1.0, u)


def test_context_checks_components(small_ctx):
    with pytest.raises(GridMismatch):
        EnergyContext(small_ctx.split, GrossPitaevskii([[1.0, 0.0], [0.0, 1.0]]))


def test_2d_energy_finite():
    from gapsoliton.spectral import PeriodicPotential, assemble_and_split

    g = make_grid(2, [6.0, 6.0], [24, 24])
    ctx = EnergyContext(assemble_and_split(g, PeriodicPotential.constant(g, [1.0])), PowerSum.isotropic(3, 1))
    rng = np.random.default_rng(0)
    u = smooth_field(g, rng)
    h = smooth_field(g, rng)
    assert derivative(ctx, u, h) == pytest.approx(central_difference(ctx, u, h, 1e-4), rel=1e-6)
