"""Run configuration: an INI document of flat sections with scalar and list values."""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass

from .errors import ConfigError
from .grid import SchemeConfig
from .problems import PRESETS, preset
from .timestep import DT_POLICIES, StepControls
from .weno import SUPPORTED_R

MODES = ("run", "convergence", "properties")
SECTIONS = ("run", "scheme", "grid", "output", "properties")


def default_w_hat(r):
    return 0.45 if r == 3 else 0.4


def default_resolutions(r):
    """Mesh sequences of the accuracy tables."""
    if r == 3:
        return (8, 16, 32, 64, 128, 256)
    return (8, 16, 24, 32, 40, 48, 56)


@dataclass(frozen=True)
class RunConfig:
    problem: str | None = None
    mode: str = "run"
    r: int = 3
    w_hat: float | None = None
    theta_amp: float = 1.2
    eps_D: float = 1e-13
    eps_q: float = 1e-13
    resolution: tuple | None = None
    resolutions: tuple | None = None
    t_final: float | None = None
    dt_policy: str | None = None
    dt_fixed: float | None = None
    output_interval: float = 0.0
    output_dir: str = "output"
    limiter: bool = True
    characteristic: bool = True
    check_admissible: bool = True
    schlieren: bool = False
    plots: bool = True
    max_steps: int | None = None
    seed: int = 0
    samples: int = 10000

    def __post_init__(self):
        _validate(self)

    # defaults that depend on other keys
    @property
    def cfl_fraction(self):
        return self.w_hat if self.w_hat is not None else default_w_hat(self.r)

    @property
    def spec(self):
        return preset(self.problem)

    @property
    def final_time(self):
        return self.t_final if self.t_final is not None else self.spec.t_final

    @property
    def grid_resolution(self):
        return self.resolution if self.resolution is not None else self.spec.default_resolution

    @property
    def mesh_sequence(self):
        return self.resolutions if self.resolutions is not None else default_resolutions(self.r)

    @property
    def time_step_policy(self):
        if self.dt_policy is not None:
            return self.dt_policy
        return "accuracy" if self.mode == "convergence" else "cfl"

    def scheme(self, gamma):
        return SchemeConfig(
            r=self.r, w_hat=self.cfl_fraction, theta_amp=self.theta_amp, eps_D=self.eps_D,
            eps_q=self.eps_q, gamma=gamma, limiter=self.limiter,
            characteristic=self.characteristic, check_admissible=self.check_admissible,
        )

    def controls(self):
        return StepControls(w_hat=self.cfl_fraction, dt_policy=self.time_step_policy,
                            dt_fixed=self.dt_fixed)

    def as_dict(self):
        return dataclasses.asdict(self)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _fail(key, msg):
    raise ConfigError(f"{key}: {msg}")


def _validate(c):
    if c.mode not in MODES:
        _fail("mode", f"must be one of {', '.join(MODES)}, got {c.mode!r}")
    if c.mode != "properties":
        if c.problem is None:
            _fail("problem", "required")
        if c.problem not in PRESETS:
            _fail("problem", f"unknown problem {c.problem!r}")
    if c.r not in SUPPORTED_R:
        _fail("r", f"unsupported order parameter {c.r}; supported: {SUPPORTED_R}")
    if c.w_hat is not None and not 0.0 < c.w_hat < 1.0:
        _fail("w_hat", f"must lie in (0,1), got {c.w_hat}")
    if not c.theta_amp >= 1.0:
        _fail("theta_amp", f"must be >= 1, got {c.theta_amp}")
    for k in ("eps_D", "eps_q"):
        if not getattr(c, k) > 0:
            _fail(k, "must be positive")
    if c.resolution is not None:
        if any(n < 1 for n in c.resolution):
            _fail("resolution", "cell counts must be positive")
        if c.problem in PRESETS and len(c.resolution) != PRESETS[c.problem].dims:
            _fail("resolution", f"{c.problem} needs {PRESETS[c.problem].dims} value(s)")
    if c.resolutions is not None and (len(c.resolutions) < 2 or any(n < 1 for n in c.resolutions)):
        _fail("resolutions", "need at least two positive cell counts")
    if c.mode == "convergence" and c.problem in PRESETS and PRESETS[c.problem].dims != 1:
        _fail("mode", "convergence studies are 1D")
    if c.t_final is not None and not c.t_final > 0:
        _fail("t_final", "must be positive")
    if c.dt_policy is not None and c.dt_policy not in DT_POLICIES:
        _fail("dt_policy", f"must be one of {', '.join(DT_POLICIES)}")
    if c.time_step_policy == "fixed" and not (c.dt_fixed and c.dt_fixed > 0):
        _fail("dt_fixed", "a positive value is required with dt_policy=fixed")
    if c.output_interval < 0:
        _fail("output_interval", "must be >= 0")
    if c.max_steps is not None and c.max_steps < 1:
        _fail("max_steps", "must be positive")
    if c.samples < 1:
        _fail("samples", "must be positive")


# ----------------------------------------------------------------------------
# parsing
# ----------------------------------------------------------------------------

_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


def _base_type(name):
    t = FIELDS[name].type
    for kind in ("bool", "int", "float", "tuple", "str"):
        if kind in t:
            return kind
    return "str"


def convert_value(key, raw):
    """Convert a raw string to the type of RunConfig field ``key``."""
    if key not in FIELDS:
        raise ConfigError(f"{key}: unknown key")
    raw = raw.strip()
    field_type = FIELDS[key].type
    if "None" in field_type and raw.lower() in ("", "none"):
        return None
    kind = _base_type(key)
    try:
        if kind == "bool":
            return _BOOL[raw.lower()]
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "tuple":
            items = [s for s in raw.replace(",", " ").split() if s]
            if not items:
                raise ValueError("empty list")
            return tuple(int(s) for s in items)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind} ({exc})") from None
    return raw


def build_config(values):
    """RunConfig from a dict of already-typed or string values."""
    kwargs = {}
    for k, v in values.items():
        if k not in FIELDS:
            raise ConfigError(f"{k}: unknown key")
        kwargs[k] = convert_value(k, v) if isinstance(v, str) and _base_type(k) != "str" else v
    if isinstance(kwargs.get("resolution"), int):
        kwargs["resolution"] = (kwargs["resolution"],)
    return RunConfig(**kwargs)


def parse_config(text, overrides=None):
    """Parse an INI document; keys may appear before any section header.

    Sections are only for grouping: every key is a RunConfig field, unknown keys
    and sections are rejected, and duplicates are errors.
    """
    offset = 0
    stripped = [ln.strip() for ln in text.splitlines()]
    first = next((ln for ln in stripped if ln and not ln.startswith(("#", ";"))), "")
    if not first.startswith("["):
        text = "[run]\n" + text
        offset = 1
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"syntax error at line {lineno - offset}: {line.strip()}") from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(f"line {exc.lineno - offset}: {exc.message if hasattr(exc, 'message') else exc}") from None
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        where = f" at line {lineno - offset}" if lineno else ""
        raise ConfigError(f"syntax error{where}: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"[{section}]: unknown section; allowed: {', '.join(SECTIONS)}")
        for key, raw in parser.items(section):
            if key in values:
                raise ConfigError(f"{key}: given in more than one section")
            values[key] = convert_value(key, raw)
    values.update(overrides or {})
    return build_config(values)


def format_config(cfg):
    """Inverse of parse_config for echoing a configuration."""
    lines = ["[run]"]
    for name, value in cfg.as_dict().items():
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ", ".join(str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value) if math.isfinite(value) else str(value)
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"
