"""
Command line entry point.

    gapsoliton solve CONFIG.json [--mode check|solve|decay|all] [--seed S] [--out DIR] [--history]

Exit codes: 0 success, 1 configuration or IO error, 2 assumption check
failed, 3 solver did not converge, 4 gap violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODES, RunConfig, load_config
from .decay import decay_csv_rows, fit_decay, smoothness_proxy
from .errors import (
    CapExceeded,
    ConfigError,
    FieldFormatError,
    GapSolitonError,
    GapViolation,
    GridMismatch,
    InnerDiverged,
    MaxIterations,
    NoDecay,
    NonConcave,
    TailTooShort,
)
from .functional import EnergyContext
from .io import load_field, save_field, save_field_csv, write_rows_csv
from .nonlinearity import check_assumptions
from .solver import minimize_sphere
from .spectral import assemble_and_split

log = logging.getLogger("gapsoliton")

EXIT_OK, EXIT_ERROR, EXIT_CHECK, EXIT_NONCONV, EXIT_GAP = 0, 1, 2, 3, 4


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


class Run:
    """One pipeline execution; collects the report as it goes."""

    def __init__(self, cfg: RunConfig, field_path: Path | None = None):
        self.cfg = cfg
        self.field_path = field_path
        self.timings: dict[str, float] = {}
        self.report: dict = {
            "tool": "gapsoliton",
            "version": __version__,
            "config_sha256": cfg.sha256,
            "config": cfg.raw,
            "mode": cfg.mode,
            "seed": cfg.solver.seed,
        }
        self.artifacts: list[str] = []

    def _timed(self, name, fn, *args, **kw):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kw)
        finally:
            self.timings[name] = time.perf_counter() - t0

    def _out(self, name) -> Path:
        self.cfg.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.cfg.out_dir / name
        self.artifacts.append(name)
        return path

    def check(self) -> bool:
        rep = self._timed("check", check_assumptions, self.cfg.model, self.cfg.sampler)
        self.report["checks"] = rep.to_dict()
        if not rep.passed:
            self.report["error"] = f"assumption check failed: {', '.join(rep.failures())}"
        return rep.passed

    def split(self):
        sp = self.cfg.spectral
        pot = self.cfg.potential()
        split = self._timed(
            "assemble_and_split",
            assemble_and_split,
            self.cfg.grid,
            pot,
            sp.get("gap_tol", 1e-8),
            sp.get("dof_cap", 8192),
            sp.get("bloch_samples", 64),
        )
        summary = split.summary()
        self.report["spectral"] = summary
        return split

    def solve(self, split):
        ctx = EnergyContext(split, self.cfg.model)
        warm = self.cfg.raw.get("solver", {}).get("warm_start")
        if warm:
            base = self.cfg.source.parent if self.cfg.source else Path.cwd()
            path = Path(warm) if Path(warm).is_absolute() else base / warm
            self.cfg.solver.warm_start = split.project_plus(load_field(path, self.cfg.grid, self.cfg.model.components))
        result = self._timed("solve", minimize_sphere, ctx, self.cfg.solver)
        self.report["solve"] = result.summary()
        return result

    def decay(self, u, sigma):
        dc = self.cfg.decay
        fit = self._timed("decay", fit_decay, u, dc.get("tail_floor", 1e-12), dc.get("core_fraction", 0.25), sigma)
        d = fit.to_dict()
        if fit.sigma_bound is None:
            d["sqrt_sigma"] = d["sqrt_2sigma"] = float("nan")
        d["smoothness"] = smoothness_proxy(u)
        self.report["decay"] = d
        return fit

    def write_field(self, u, history=None):
        fmts = self.cfg.formats
        if "gsf" in fmts:
            save_field(u, self._out("solution.gsf"))
        if "csv" in fmts:
            save_field_csv(u, self._out("solution.csv"))
        if history is not None and self.cfg.history:
            write_rows_csv(self._out("history.csv"), ["iteration", "energy", "cerami"], [(i, e, c) for i, (e, c) in enumerate(history)])
        if "png" in fmts:
            from .plotting import plot_history, plot_profile

            plot_profile(u, self._out("profile.png"))
            if history:
                plot_history(history, self._out("history.png"))

    def write_decay(self, u, fit):
        if "csv" in self.cfg.formats:
            write_rows_csv(self._out("decay.csv"), ["distance", "log_envelope"], decay_csv_rows(u))
        if "png" in self.cfg.formats:
            from .plotting import plot_decay

            plot_decay(u, fit, self._out("decay.png"))

    def execute(self) -> int:
        mode = self.cfg.mode
        if mode in ("check", "solve", "all"):
            if not self.check():
                return EXIT_CHECK
            if mode == "check":
                return EXIT_OK
        if mode == "decay":
            path = self.field_path or (self.cfg.out_dir / "solution.gsf")
            u = load_field(path, self.cfg.grid, self.cfg.model.components)
            split = self.split()
            fit = self.decay(u, split.sigma_ess_proxy())
            self.write_decay(u, fit)
            return EXIT_OK
        split = self.split()
        try:
            result = self.solve(split)
        except MaxIterations as exc:
            self.report["error"] = str(exc)
            if exc.best is not None:
                self.report["solve"] = exc.best.summary()
                self.write_field(exc.best.u, exc.best.history)
            return EXIT_NONCONV
        self.write_field(result.u, result.history)
        if mode == "all":
            fit = self.decay(result.u, split.sigma_ess_proxy())
            self.write_decay(result.u, fit)
        return EXIT_OK

    def finish(self, code: int) -> dict:
        self.report["exit_code"] = code
        self.report["timings"] = self.timings
        self.report["artifacts"] = sorted(set(self.artifacts))
        self.cfg.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.cfg.out_dir / "report.json"
        path.write_text(json.dumps(_clean(self.report), indent=2, sort_keys=True) + "\n")
        return self.report


def run(config_path, mode=None, seed=None, out=None, history=None, field=None) -> tuple[int, dict]:
    """Execute a configured run; returns (exit code, report)."""
    try:
        cfg = load_config(config_path)
    except (ConfigError, GapSolitonError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR, {"error": str(exc), "exit_code": EXIT_ERROR}
    if mode is not None:
        cfg.mode = mode
    if seed is not None:
        cfg.solver.seed = seed
        cfg.sampler.seed = seed
    if out is not None:
        cfg.out_dir = Path(out)
    if history is not None:
        cfg.history = history
    r = Run(cfg, Path(field) if field else None)
    r.report["mode"] = cfg.mode
    r.report["seed"] = cfg.solver.seed
    try:
        code = r.execute()
    except GapViolation as exc:
        r.report["error"] = str(exc)
        r.report["gap_violation"] = {"component": exc.component, "eigenvalue": exc.eigenvalue}
        code = EXIT_GAP
    except (InnerDiverged, NonConcave) as exc:
        r.report["error"] = f"{type(exc).__name__}: {exc}"
        code = EXIT_NONCONV
    except (TailTooShort, NoDecay) as exc:
        r.report["error"] = f"{type(exc).__name__}: {exc}"
        code = EXIT_ERROR
    except (ConfigError, FieldFormatError, GridMismatch, CapExceeded, OSError, ValueError) as exc:
        r.report["error"] = f"{type(exc).__name__}: {exc}"
        code = EXIT_ERROR
    if "error" in r.report:
        log.error("%s", r.report["error"])
    return code, r.finish(code)


def _summary_line(report: dict) -> str:
    parts = [f"exit={report.get('exit_code')}"]
    solve = report.get("solve")
    if solve:
        res = solve["residuals"]
        parts.append(f"c={solve['c_value']:.12g} cerami={res['cerami']:.3e} iterations={solve['iterations']}")
    dec = report.get("decay")
    if dec:
        parts.append(f"alpha={dec['alpha']:.6g} r2={dec['r2']:.5f} sqrt_sigma={dec['sqrt_sigma']} sqrt_2sigma={dec['sqrt_2sigma']}")
    if "error" in report:
        parts.append(f"error: {report['error']}")
    return "  ".join(parts)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gapsoliton", description="Ground states of periodic Schrodinger systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run a configured problem")
    s.add_argument("config", help="path to the JSON run configuration")
    s.add_argument("--mode", choices=MODES, default=None, help="override the configured mode")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", default=None, help="output directory")
    s.add_argument("--history", action="store_true", default=None, help="write per-iteration history CSV")
    s.add_argument("--field", default=None, help="solution field for --mode decay")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    code, report = run(args.config, args.mode, args.seed, args.out, args.history, args.field)
    print(_summary_line(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
