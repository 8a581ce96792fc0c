"""Run orchestration: single runs, convergence studies and the property report."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io, oracles
from .errors import ConfigError, OutputError
from .problems import SH_E0, SH_V0, preset
from .state import cons_to_prim
from .timestep import Solver

log = logging.getLogger(__name__)


def exact_profile(name, x, t):
    """Reference primitive profile of a 1D preset at time t, or None if unavailable."""
    spec = preset(name)
    if name == "smooth":
        return oracles.smooth_exact(x, t)
    if name == "rp1d":
        sol = oracles.exact_riemann_1d(spec.initial(np.array([0.0]))[0],
                                       spec.initial(np.array([1.0]))[0], spec.gamma)
        return sol.sample((x - 0.5) / t)
    if name == "shock_heating":
        return oracles.shock_heating_profile(x, t, spec.gamma, SH_V0, 1.0, SH_E0)
    if name == "blast":
        ref = blast_reference()
        return ref.sample(x, t) if ref.available(t) else None
    return None


def blast_reference():
    spec = preset("blast")
    V = spec.initial(np.array([0.05, 0.5, 0.95]))
    return oracles.blast_reference(V[0], V[1], V[2], spec.gamma)


@dataclass
class RunResult:
    grid: object
    solver: object
    manifest: dict
    snapshots: list = field(default_factory=list)
    figures: list = field(default_factory=list)


def _snapshot_meta(cfg, name):
    return {"problem": name, "r": cfg.r, "w_hat": cfg.cfl_fraction, "theta_amp": cfg.theta_amp,
            "eps_D": cfg.eps_D, "eps_q": cfg.eps_q, "limiter": cfg.limiter,
            "characteristic": cfg.characteristic}


def run_problem(cfg, write=True, progress=None):
    """Run one preset to its final time, writing snapshots, figures and a manifest."""
    if cfg.problem is None:
        raise ConfigError("problem: required for a run")
    spec = cfg.spec
    grid = spec.make_grid(cfg.grid_resolution, r=cfg.r)
    solver = Solver(grid, cfg.scheme(spec.gamma), cfg.controls())
    out = Path(cfg.output_dir)
    t_final = cfg.final_time
    result = RunResult(grid, solver, {})
    meta = _snapshot_meta(cfg, spec.name)

    def snap(tag):
        if write:
            path = io.write_fields(grid, solver.t, out / f"{tag}.csv", cfg.schlieren, meta)
            result.snapshots.append(str(path))

    t0 = time.perf_counter()
    if cfg.output_interval > 0:
        snap("snapshot_0000")
    k = 1
    while solver.t < t_final * (1 - 1e-14):
        if cfg.max_steps is not None and solver.stats.steps >= cfg.max_steps:
            break
        target = t_final
        if cfg.output_interval > 0:
            target = min(t_final, k * cfg.output_interval)
        solver.step(target)
        if progress is not None:
            progress(solver)
        if cfg.output_interval > 0 and solver.t >= target * (1 - 1e-14) and target < t_final:
            snap(f"snapshot_{k:04d}")
            k += 1
    wall = time.perf_counter() - t0
    solver.wall_time = wall
    snap("final")
    st = solver.stats
    result.manifest = {
        "problem": spec.name,
        "mode": "run",
        "config": cfg.as_dict(),
        "resolution": list(grid.shape),
        "gamma": spec.gamma,
        "time": solver.t,
        "steps": st.steps,
        "wall_time": wall,
        "min_D": st.min_D,
        "min_q": st.min_q,
        "min_theta_D": st.min_theta_D,
        "min_theta_q": st.min_theta_q,
        "limited_interfaces": st.limited_interfaces,
        "snapshots": result.snapshots,
    }
    if write:
        if cfg.plots:
            result.figures = _run_figures(grid, solver.t, spec, out)
            result.manifest["figures"] = [str(p) for p in result.figures]
        io.write_manifest(out, result.manifest)
    return result


def _run_figures(grid, t, spec, out):
    from . import plotting

    table = io.field_table(grid)
    cols = io.field_columns(grid.dims, grid.geometry)
    title = f"{spec.name}, t = {t:.4g}, {'x'.join(str(n) for n in grid.shape)} cells"
    if grid.dims == 1:
        exact = None
        x = np.linspace(grid.lower[0], grid.upper[0], 4000)
        ref = exact_profile(spec.name, x, t) if t > 0 else None
        if ref is not None:
            exact = (x, ref)
        return [plotting.plot_profiles(cols, table, out / "final.png", title, exact)]
    return [plotting.plot_field_2d(cols, table, grid.storage_shape, out / "final_ln_rho.png", title)]


def convergence_study(cfg, write=True):
    """Errors in rho and observed orders on independent meshes."""
    spec = cfg.spec
    if spec.name != "smooth":
        raise ConfigError(f"problem: convergence studies need an exact smooth solution; "
                          f"{spec.name!r} has none")
    t_final = cfg.final_time
    l1, linf, steps = [], [], []
    t0 = time.perf_counter()
    for N in cfg.mesh_sequence:
        grid = spec.make_grid((N,), r=cfg.r)
        solver = Solver(grid, cfg.scheme(spec.gamma), cfg.controls())
        solver.run(t_final)
        V = cons_to_prim(grid.U, spec.gamma)
        exact = oracles.smooth_exact(grid.centers(0), solver.t)
        e1, ei = oracles.error_norms(V[:, 0], exact[:, 0], grid.spacing[0])
        l1.append(e1)
        linf.append(ei)
        steps.append(solver.stats.steps)
        log.info("N=%d l1=%.4e linf=%.4e steps=%d", N, e1, ei, solver.stats.steps)
    report = oracles.ErrorReport(list(cfg.mesh_sequence), l1, linf)
    wall = time.perf_counter() - t0
    if write:
        out = Path(cfg.output_dir)
        rows = [(n, a, o1, b, o2) for n, a, o1, b, o2 in report.table()]
        io.write_table_csv(out / "convergence.csv",
                           ["N", "l1_error", "l1_order", "linf_error", "linf_order"], rows)
        files = [str(out / "convergence.csv")]
        if cfg.plots:
            from . import plotting

            files.append(str(plotting.plot_convergence(
                report, out / "convergence.png", f"{spec.name}, WENO{2 * cfg.r - 1}")))
        io.write_manifest(out, {"problem": spec.name, "mode": "convergence",
                                "config": cfg.as_dict(), "resolutions": report.resolutions,
                                "l1": l1, "linf": linf, "steps": steps, "wall_time": wall,
                                "files": files})
    return report


def format_convergence(report):
    lines = [f"{'N':>6} {'l1 error':>12} {'order':>6} {'linf error':>12} {'order':>6}"]
    for n, a, o1, b, o2 in report.table():
        f1 = "" if o1 is None or math.isnan(o1) else f"{o1:.2f}"
        f2 = "" if o2 is None or math.isnan(o2) else f"{o2:.2f}"
        lines.append(f"{n:>6} {a:>12.4e} {f1:>6} {b:>12.4e} {f2:>6}")
    return "\n".join(lines)


def property_report(cfg, write=True):
    """Randomised property families; returns the list of FamilyResult."""
    t0 = time.perf_counter()
    results = oracles.lemma_property_suite(samples=cfg.samples, seed=cfg.seed)
    wall = time.perf_counter() - t0
    if write:
        out = Path(cfg.output_dir)
        io.write_table_csv(out / "properties.csv", ["family", "samples", "violations", "detail"],
                           [(r.name, r.samples, r.violations, r.detail) for r in results])
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "properties.txt").write_text(oracles.format_report(results) + "\n")
        except OSError as exc:
            raise OutputError(f"cannot write {out / 'properties.txt'}: {exc}") from exc
        io.write_manifest(out, {"mode": "properties", "config": cfg.as_dict(),
                                "wall_time": wall,
                                "violations": {r.name: r.violations for r in results}})
    return results
