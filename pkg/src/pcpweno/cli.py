"""Command line front end: run, convergence, properties, list-problems."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import FIELDS, build_config, convert_value, parse_config
from .errors import ConfigError, OutputError, PcpError

THREADS_ENV = "PCPWENO_THREADS"
EXIT_CODES = {"config": 2, "solver": 3, "io": 4}

# RunConfig keys exposed as flags, per verb
_COMMON = ("r", "w_hat", "theta_amp", "eps_D", "eps_q", "t_final", "dt_policy", "dt_fixed",
           "output_dir", "limiter", "characteristic", "check_admissible", "plots")
_VERB_KEYS = {
    "run": ("problem", "resolution", "output_interval", "schlieren", "max_steps", "seed") + _COMMON,
    "convergence": ("problem", "resolutions") + _COMMON,
    "properties": ("samples", "seed", "output_dir", "plots"),
}
_HELP = {
    "problem": "preset name (see list-problems)",
    "r": "WENO order parameter, 3 (fifth order) or 5 (ninth order)",
    "w_hat": "CFL fraction (default 0.45 for r=3, 0.4 for r=5)",
    "theta_amp": "viscosity amplification of the LLF coefficient (default 1.2)",
    "eps_D": "floor for D (default 1e-13)",
    "eps_q": "floor for q (default 1e-13)",
    "resolution": "cells per direction, e.g. 800 or 100,100",
    "resolutions": "mesh sequence for a convergence study, e.g. 8,16,32",
    "t_final": "override the preset final time",
    "dt_policy": "cfl, accuracy or fixed",
    "dt_fixed": "time step for dt_policy=fixed",
    "output_interval": "simulated time between snapshots (0 writes the final state only)",
    "output_dir": "directory for CSV, figures and the manifest",
    "limiter": "PCP flux limiter",
    "characteristic": "characteristic (true) or component-wise (false) reconstruction",
    "check_admissible": "abort when a stage leaves the admissible set",
    "schlieren": "add an ln(rho) column to snapshots",
    "plots": "render matplotlib figures",
    "max_steps": "stop after this many steps",
    "seed": "random seed",
    "samples": "samples per property family",
}


def _flag(key):
    return "--" + key.replace("_", "-")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pcpweno",
        description="High-order PCP finite difference WENO solver for special relativistic hydrodynamics.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, keys in _VERB_KEYS.items():
        p = sub.add_parser(verb, help=f"{verb} mode")
        p.add_argument("--config", help="INI configuration file; flags override its values")
        for key in keys:
            kind = FIELDS[key].type
            if "bool" in kind:
                p.add_argument(_flag(key), dest=key, default=None,
                               action=argparse.BooleanOptionalAction, help=_HELP.get(key))
            else:
                p.add_argument(_flag(key), dest=key, default=None, metavar=key.upper(),
                               help=_HELP.get(key))
    sub.add_parser("list-problems", help="list the preset problems")
    return parser


def _set_threads():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}: expected a positive integer, got {raw!r}") from None
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def config_from_args(args):
    overrides = {}
    for key in _VERB_KEYS[args.verb]:
        val = getattr(args, key, None)
        if val is None:
            continue
        overrides[key] = val if isinstance(val, bool) else convert_value(key, val)
    if args.verb != "run":
        overrides["mode"] = args.verb
    if args.verb == "convergence":
        overrides.setdefault("problem", "smooth")
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise OutputError(f"cannot read {args.config}: {exc.strerror or exc}") from exc
        return parse_config(text, overrides)
    return build_config(overrides)


def _list_problems(out):
    from .problems import PRESETS

    for name in sorted(PRESETS):
        s = PRESETS[name]
        res = "x".join(str(n) for n in s.default_resolution)
        out.write(f"{name:<14} {s.dims}D  t={s.t_final:<6g} N={res:<8} {s.description}\n")


def _progress(solver):
    if solver.stats.steps % 100 == 0:
        logging.getLogger("pcpweno").info("step %d t=%.6g", solver.stats.steps, solver.t)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    out = sys.stdout
    try:
        if args.verb == "list-problems":
            _list_problems(out)
            return 0
        _set_threads()
        cfg = config_from_args(args)
        from . import driver

        if args.verb == "run":
            res = driver.run_problem(cfg, progress=_progress)
            m = res.manifest
            out.write(f"{m['problem']}: t={m['time']:.6g} steps={m['steps']} "
                      f"wall={m['wall_time']:.2f}s min_D={m['min_D']:.6e} min_q={m['min_q']:.6e}\n")
            out.write(f"wrote {len(res.snapshots)} snapshot(s) to {cfg.output_dir}\n")
        elif args.verb == "convergence":
            report = driver.convergence_study(cfg)
            out.write(driver.format_convergence(report) + "\n")
        elif args.verb == "properties":
            from .oracles import format_report

            results = driver.property_report(cfg)
            out.write(format_report(results) + "\n")
            if any(r.violations for r in results):
                return EXIT_CODES["solver"]
        return 0
    except PcpError as exc:
        cat = getattr(exc, "category", "solver")
        sys.stderr.write(f"error ({cat}): {exc}\n")
        return EXIT_CODES.get(cat, 1)
    except KeyError as exc:
        sys.stderr.write(f"error (config): {exc.args[0] if exc.args else exc}\n")
        return EXIT_CODES["config"]


if __name__ == "__main__":
    sys.exit(main())
