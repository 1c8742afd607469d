"""Acceptance criteria 1-10 at their stated tolerances.

Each test records one PASS/FAIL line that is printed in the terminal summary.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from gapsoliton.cli import run
from gapsoliton.config import load_config
from gapsoliton.decay import fit_decay
from gapsoliton.errors import GapViolation
from gapsoliton.functional import EnergyContext, derivative, energy, fiber_margin
from gapsoliton.grid import VectorField, make_grid
from gapsoliton.io import decode_field, encode_field, load_field
from gapsoliton.nonlinearity import (
    GrossPitaevskii,
    PowerProfile,
    PowerSum,
    RadialW,
    SamplerConfig,
    SaturatingProfile,
    check_assumptions,
    check_neqF6,
    combine,
)
from gapsoliton.solver import SolverConfig, minimize_sphere
from gapsoliton.spectral import PeriodicPotential, assemble_and_split

from conftest import gap_potential, smooth_field

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
RESULTS: dict[int, tuple[bool, str]] = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def constant_ctx(L, n, values, model):
    g = make_grid(1, [L], [n])
    return EnergyContext(assemble_and_split(g, PeriodicPotential.constant(g, values)), model)


def sech_distance(u):
    """Max distance to sqrt(2) sech(x - x0) with x0 the |u|^2 centroid near the peak."""
    g = u.grid
    x = g.coordinates()[0]
    vals = u.values[0] * np.sign(u.values[0][np.argmax(np.abs(u.values[0]))])
    w = vals**2
    x0 = float(np.sum(w * x) / np.sum(w))
    return float(np.max(np.abs(vals - np.sqrt(2) / np.cosh(x - x0))))


def test_01_sech_benchmark():
    t0 = time.perf_counter()
    ctx = constant_ctx(40.0, 1024, [1.0], PowerSum.isotropic(4, 1))
    res = minimize_sphere(ctx, SolverConfig(threads=1))
    elapsed = time.perf_counter() - t0
    err_c = abs(res.c_value - 4 / 3)
    dist = sech_distance(res.u)
    ok = res.converged and err_c <= 1e-3 and dist <= 1e-3 and elapsed <= 60
    record(1, ok, f"|c - 4/3| = {err_c:.2e}, profile distance {dist:.2e}, {elapsed:.2f} s")


def test_02_coupled_gp():
    sym = minimize_sphere(constant_ctx(40.0, 1024, [1.0, 1.0], GrossPitaevskii([[1, 2], [2, 1]])), SolverConfig(threads=1))
    semi = minimize_sphere(constant_ctx(40.0, 1024, [1.0, 1.0], GrossPitaevskii([[1, 0.5], [0.5, 1]])), SolverConfig(threads=1))
    d_sym = abs(sym.c_value - 8 / 9)
    diff = float(np.max(np.abs(np.abs(sym.u.values[0]) - np.abs(sym.u.values[1]))))
    d_semi = abs(semi.c_value - 4 / 3)
    small = float(np.min(np.max(np.abs(semi.u.values), axis=1)))
    ok = d_sym <= 1e-3 and diff <= 1e-3 and d_semi <= 1e-3 and small <= 1e-3
    record(
        2,
        ok,
        f"beta12=2: |c - 8/9| = {d_sym:.2e}, |u1 - u2| = {diff:.2e}; beta12=0.5: |c - 4/3| = {d_semi:.2e}, min component max {small:.2e}",
    )


def test_03_gap_case():
    g = make_grid(1, [32.0], [1024])
    pot, s = gap_potential(g)
    split = assemble_and_split(g, pot)
    ctx = EnergyContext(split, PowerSum.isotropic(4, 1))
    a = minimize_sphere(ctx, SolverConfig(restarts=2, seed=0, threads=1))
    b = minimize_sphere(ctx, SolverConfig(restarts=2, seed=1, threads=1))
    res = a
    r = res.residuals
    neg = split.neg_dimensions()[0]
    fit = fit_decay(res.u, sigma=split.sigma_ess_proxy())
    agree = abs(a.c_value - b.c_value)
    ok = (
        a.converged
        and b.converged
        and r.cerami <= 1e-7 * (1 + abs(res.c_value))
        and abs(r.r_self) <= 1e-6
        and r.r_tilde <= 1e-6
        and neg > 0
        and agree <= 1e-6
        and fit.alpha > 0
        and fit.r2 >= 0.99
    )
    record(
        3,
        ok,
        f"s = {s:.6f}, c = {res.c_value:.10f}, cerami = {r.cerami:.2e}, r_self = {r.r_self:.1e}, "
        f"r_tilde = {r.r_tilde:.1e}, NEG = {neg}, seeds agree to {agree:.1e}, alpha = {fit.alpha:.4f} (r2 {fit.r2:.4f})",
    )


def shipped_potentials():
    out = {}
    for path in sorted(CONFIGS.glob("*.json")):
        cfg = load_config(path)
        out[path.stem] = (cfg.grid, cfg.potential())
    g2 = make_grid(2, [2.0, 2.0], [16, 16])
    out["cosine2d"] = (g2, PeriodicPotential.cosine_sum(g2, -3.0, [(2.0, [1, 0]), (2.0, [0, 1])], [1.0, 1.0]))
    return out


def test_04_projector_algebra():
    rng = np.random.default_rng(4)
    worst = 0.0
    names = []
    for name, (grid, pot) in shipped_potentials().items():
        try:
            split = assemble_and_split(grid, pot)
        except GapViolation:
            continue  # the zero-mode example has no splitting by design
        names.append(name)
        for _ in range(100):
            u = VectorField(grid, rng.standard_normal((split.components, grid.size)))
            p, m = split.project_plus(u), split.project_minus(u)
            scale = np.max(np.abs(u.values))
            errs = [
                np.max(np.abs((p + m - u).values)),
                np.max(np.abs(split.project_minus(p).values)),
                np.max(np.abs(split.project_plus(m).values)),
                np.max(np.abs((split.project_plus(p) - p).values)),
                np.max(np.abs((split.project_minus(m) - m).values)),
            ]
            worst = max(worst, max(errs) / scale)
    record(4, worst <= 1e-10, f"max relative defect {worst:.2e} over {', '.join(names)}")


def five_point(ctx, u, h, eps):
    """Fourth-order central difference; exact up to rounding for quartic energies."""
    d1 = energy(ctx, u + h * eps) - energy(ctx, u - h * eps)
    d2 = energy(ctx, u + h * (2 * eps)) - energy(ctx, u - h * (2 * eps))
    return (8 * d1 - d2) / (12 * eps)


def test_05_gradient_check():
    rng = np.random.default_rng(5)
    gap_grid = make_grid(1, [32.0], [1024])
    benches = {
        "sech": constant_ctx(40.0, 1024, [1.0], PowerSum.isotropic(4, 1)),
        "gp_sym": constant_ctx(40.0, 1024, [1.0, 1.0], GrossPitaevskii([[1, 2], [2, 1]])),
        "gp_semi": constant_ctx(40.0, 1024, [1.0, 1.0], GrossPitaevskii([[1, 0.5], [0.5, 1]])),
        "gap": EnergyContext(assemble_and_split(gap_grid, gap_potential(gap_grid)[0]), PowerSum.isotropic(4, 1)),
    }
    worst = 0.0
    for ctx in benches.values():
        K = ctx.split.components
        for _ in range(10):
            u = smooth_field(ctx.grid, rng, K=K)
            for _ in range(50):
                h = smooth_field(ctx.grid, rng, K=K)
                fd = five_point(ctx, u, h, 1e-3)
                an = derivative(ctx, u, h)
                worst = max(worst, abs(an - fd) / max(abs(an), abs(fd), 1e-300))
    record(5, worst <= 1e-6, f"max relative disagreement {worst:.2e} over 4 benchmarks x 10 points x 50 directions")


def test_06_fiber_inequality_suite():
    g = make_grid(1, [8.0], [256])
    pot, _ = gap_potential(g)
    pot = PeriodicPotential(g, np.vstack([pot.values, pot.values]), pot.period)
    split = assemble_and_split(g, pot)
    gp = GrossPitaevskii([[1, 2], [2, 1]])
    models = {
        "p4": PowerSum.isotropic(4, 2),
        "p3.5": PowerSum.isotropic(3.5, 2),
        "gp": gp,
        "combination": combine([PowerSum.isotropic(4, 2), PowerSum.isotropic(3.5, 2), gp], [1.0, 0.5, 2.0]),
    }
    rng = np.random.default_rng(6)
    worst = {}
    for name, model in models.items():
        ctx = EnergyContext(split, model)
        p = model.growth_exponent
        w = np.inf
        for _ in range(1000):
            u = smooth_field(g, rng, K=2) * 10 ** rng.uniform(-1.5, 0.5)
            v = split.project_minus(smooth_field(g, rng, K=2)) * 10 ** rng.uniform(-1.5, 0.5)
            t = rng.uniform(0.0, 3.0)
            scale = 1 + split.split_norm(u) ** p + split.split_norm(v) ** p
            w = min(w, fiber_margin(ctx, u, t, v) / scale)
        worst[name] = w
    ok = all(w >= -1e-8 for w in worst.values())
    record(6, ok, "min margin/scale " + ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))


def test_07_inequality_sampler():
    families = {
        "power_sum p=4": PowerSum.isotropic(4, 2),
        "power_sum p=3.5": PowerSum.isotropic(3.5, 1),
        "power_sum mixed": PowerSum([3.0, 5.0], [np.array([[2.0, 0.5], [0.0, 1.0]]), np.eye(2)]),
        "gross_pitaevskii": GrossPitaevskii([[1, 2], [2, 1]]),
        "radial_w": RadialW(PowerProfile(((0.25, 2.0), (0.1, 1.5))), np.eye(2)),
        "combination": combine([PowerSum.isotropic(3.5, 2), GrossPitaevskii([[1, 2], [2, 1]])], [1.0, 1.0]),
    }
    worst = {}
    ok = True
    for name, model in families.items():
        v = check_neqF6(model, 100_000)["neqF6"]
        worst[name] = v.worst_margin
        ok &= v.status == "pass"
    bad = check_neqF6(RadialW(PowerProfile(((0.25, 2.0), (-0.1, 1.5))), np.eye(1), strict=False), 100_000)["neqF6"]
    ok &= bad.status == "fail" and bad.witness is not None and bad.witness["phi"] > 0
    record(
        7,
        ok,
        "max phi/scale " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f"; nonconvex rejected with phi = {bad.witness['phi']:.2e}",
    )


def test_08_checker_falsification():
    cfg = SamplerConfig()
    lin = check_assumptions(RadialW(PowerProfile(((0.5, 1.0),)), np.eye(1)), cfg)
    sat = check_assumptions(RadialW(SaturatingProfile(1.0), np.eye(1)), cfg)
    f3, f5 = lin["F3"], sat["F5"]
    ok = f3.status == "fail" and f3.witness is not None and f5.status == "fail" and f5.witness is not None
    record(8, ok, f"F=|u|^2/2 F3 {f3.status} ({f3.witness}); bounded F/|u|^2 F5 {f5.status} ({f5.witness})")


def _run_config(tmp_path, name, edits=None):
    cfg = json.loads((CONFIGS / "sech1d.json").read_text())
    cfg.update(edits or {})
    cfg["outputs"] = {"directory": str(tmp_path / name), "formats": ["gsf"]}
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    code, report = run(path)
    return code, json.loads((tmp_path / name / "report.json").read_text())


def test_09_decay_robustness(tmp_path):
    c40, r40 = _run_config(tmp_path, "L40")
    c80, r80 = _run_config(tmp_path, "L80", {"grid": {"dim": 1, "box_lengths": [80.0], "points": [2048]}})
    a40, a80 = r40["decay"]["alpha"], r80["decay"]["alpha"]
    change = abs(a80 - a40) / a40
    s1, s2 = r40["decay"]["sqrt_sigma"], r40["decay"]["sqrt_2sigma"]
    ok = (
        c40 == 0
        and c80 == 0
        and abs(a40 - 1) <= 0.05
        and change <= 0.02
        and abs(s1 - 1) <= 1e-8
        and abs(s2 - np.sqrt(2)) <= 1e-8
    )
    record(9, ok, f"alpha(L=40) = {a40:.5f}, alpha(L=80) = {a80:.5f}, change {100 * change:.2f}%, sqrt(Sigma) = {s1:.6f}, sqrt(2 Sigma) = {s2:.6f}")


def _numbers(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            if k in ("timings",):
                continue
            yield from _numbers(v, f"{prefix}/{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _numbers(v, f"{prefix}/{i}")
    else:
        yield prefix, obj


def test_10_determinism_and_io(tmp_path):
    _, a = _run_config(tmp_path, "a")
    _, b = _run_config(tmp_path, "b")
    na, nb = dict(_numbers(a)), dict(_numbers(b))
    # output locations differ by construction
    skip = {k for k in na if "directory" in k or k.startswith("/config_sha256")}
    same_keys = set(na) == set(nb)
    worst = 0.0
    for k in set(na) - skip:
        x, y = na[k], nb.get(k)
        if isinstance(x, float) and isinstance(y, float):
            worst = max(worst, abs(x - y) / max(1.0, abs(x)))
        elif x != y:
            worst = np.inf
    rng = np.random.default_rng(10)
    grid = make_grid(2, [3.0, 7.0], [16, 32])
    u = VectorField(grid, rng.standard_normal((2, grid.size)))
    rt = decode_field(encode_field(u)).values.tobytes() == u.values.tobytes()
    sol = load_field(tmp_path / "a" / "solution.gsf")
    rt &= decode_field(encode_field(sol)).values.tobytes() == sol.values.tobytes()
    ok = same_keys and worst <= 1e-12 and rt
    record(10, ok, f"max report difference {worst:.1e} over {len(na)} entries; GSF1 round trip bit-exact: {rt}")
