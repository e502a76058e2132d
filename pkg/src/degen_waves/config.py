"""Scenario files: INI text with sections ``[scenario]``, ``[solver]``,
``[flux]``, ``[grid]`` and ``[perturbation]``.  Every key has a default.

    [solver]
    p = 2
    t_end = 100
    checkpoint_times = 5, 10, 20, 50, 100
"""
from __future__ import annotations

import configparser
import hashlib
import math
import re
from dataclasses import dataclass, field

from . import waves
from .flux import BUILTIN, builtin_degenerate_burgers
from .solver import BOUNDARY_MODES, Grid1D, SolverConfig

__all__ = [
    "ConfigError",
    "Perturbation",
    "Scenario",
    "parse_config",
    "parse_config_text",
    "serialize",
    "scenario_hash",
    "default_scenario",
    "wave_extent",
    "BOUNDARY_MARGIN",
]

BOUNDARY_MARGIN = 5.0
DEFAULT_DX = 0.05
DIAGNOSTIC_NAMES = ("deviation_sup", "energy_G", "phi_l2", "du_lp1")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = ""
        if key is not None:
            where = f"{key}"
            if line is not None:
                where += f" (line {line})"
            where += ": "
        super().__init__(where + message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class Perturbation:
    kind: str = "none"
    amplitude: float = 0.0
    center: float = 0.0
    width: float = 1.0


@dataclass(frozen=True)
class Scenario:
    name: str
    solver_config: SolverConfig
    grid: Grid1D
    perturbation: Perturbation = field(default_factory=Perturbation)
    diagnostics: tuple[str, ...] = DIAGNOSTIC_NAMES
    output_dir: str = "out"
    profile_times: tuple[float, ...] = (0.0, 1.0, 10.0, 100.0)

    def composite(self) -> waves.CompositeWave:
        return self.solver_config.composite()


_SCHEMA = {
    "scenario": {"name": str, "output_dir": str, "diagnostics": "names", "profile_times": "floats"},
    "solver": {
        "p": float, "mu": float, "u_minus": float, "u_plus": float, "epsilon": float,
        "cfl_advective": float, "cfl_diffusive": float, "t_end": float,
        "checkpoint_times": "floats", "dt_max": float, "boundary": str,
    },
    "flux": {"kind": str},
    "grid": {"x_left": float, "x_right": float, "dx": float, "n": int},
    "perturbation": {"kind": str, "amplitude": float, "center": float, "width": float},
}


def _line_index(text: str) -> dict[str, int]:
    """Map ``section.key`` to its 1-based line number."""
    out: dict[str, int] = {}
    section = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            out.setdefault(section, i)
            continue
        m = re.match(r"([^=:]+)[=:]", line)
        if m and section:
            out[f"{section}.{m.group(1).strip().lower()}"] = i
    return out


def _convert(kind, raw: str, key: str, line):
    try:
        if kind is float:
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        if kind is int:
            return int(raw)
        if kind is str:
            return raw.strip()
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if kind == "floats":
            return tuple(float(s) for s in items)
        return tuple(items)
    except ValueError:
        expected = {float: "a real number", int: "an integer", "floats": "a comma-separated list of reals"}.get(kind, kind)
        raise ConfigError(f"expected {expected}, got {raw!r}", key, line) from None


def wave_extent(cfg: SolverConfig, t: float) -> tuple[float, float]:
    """Interval holding the contact support and the rarefaction fan at time t."""
    c = cfg.composite()
    hw = waves.support_halfwidth(c.contact, t)
    r = c.rarefaction
    lo = min(-hw, r.lambda_minus * t)
    hi = max(hw, r.lambda_plus * t)
    return lo, hi


def auto_grid(cfg: SolverConfig, dx: float = DEFAULT_DX) -> Grid1D:
    lo, hi = wave_extent(cfg, cfg.t_end)
    pad = 2.0 * BOUNDARY_MARGIN
    return Grid1D.from_spacing(math.floor(lo - pad), math.ceil(hi + pad), dx)


def parse_config_text(text: str, check_margin: bool = True) -> Scenario:
    lines = _line_index(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    values: dict[str, dict] = {s: {} for s in _SCHEMA}
    for section in cp.sections():
        sec = section.lower()
        if sec not in _SCHEMA:
            raise ConfigError("unknown section", sec, lines.get(sec))
        for key, raw in cp.items(section):
            path = f"{sec}.{key}"
            if key not in _SCHEMA[sec]:
                raise ConfigError("unknown key", path, lines.get(path))
            values[sec][key] = (_convert(_SCHEMA[sec][key], raw, path, lines.get(path)), lines.get(path))

    def get(sec, key, default):
        return values[sec].get(key, (default, None))[0]

    def fail(msg, sec, key):
        path = f"{sec}.{key}"
        raise ConfigError(msg, path, values[sec].get(key, (None, lines.get(path)))[1])

    kind = get("flux", "kind", BUILTIN)
    if kind != BUILTIN:
        fail(f"unsupported flux kind {kind!r}; only {BUILTIN!r} is configurable", "flux", "kind")

    s = {k: get("solver", k, d) for k, d in (
        ("p", 2.0), ("mu", 1.0), ("u_minus", -1.0), ("u_plus", 1.0), ("epsilon", 1e-6),
        ("cfl_advective", 0.5), ("cfl_diffusive", 0.25), ("t_end", 100.0),
        ("checkpoint_times", (5.0, 10.0, 20.0, 50.0, 100.0)), ("dt_max", 0.01), ("boundary", "dirichlet"),
    )}
    # field-by-field checks so the message can point at the offending key
    if not s["p"] > 1:
        fail("p must exceed 1", "solver", "p")
    if not s["mu"] > 0:
        fail("mu must be positive", "solver", "mu")
    if not s["u_minus"] < 0 < s["u_plus"]:
        fail("the composite requires u_minus < 0 < u_plus", "solver", "u_minus")
    if not s["epsilon"] >= 0:
        fail("epsilon must be nonnegative", "solver", "epsilon")
    if not 0 < s["cfl_advective"] <= 1:
        fail("cfl_advective must lie in (0, 1]", "solver", "cfl_advective")
    if not 0 < s["cfl_diffusive"] <= 0.5:
        fail("cfl_diffusive must lie in (0, 0.5]", "solver", "cfl_diffusive")
    if s["boundary"] not in BOUNDARY_MODES:
        fail(f"boundary must be one of {', '.join(BOUNDARY_MODES)}", "solver", "boundary")
    try:
        cfg = SolverConfig(flux=builtin_degenerate_burgers(), **s)
    except ValueError as exc:
        key = "checkpoint_times" if "checkpoint" in str(exc) else "t_end"
        fail(str(exc), "solver", key)

    if "x_left" in values["grid"] or "x_right" in values["grid"]:
        if not ("x_left" in values["grid"] and "x_right" in values["grid"]):
            fail("x_left and x_right must be given together", "grid", "x_left")
        xl, xr = get("grid", "x_left", None), get("grid", "x_right", None)
        if not xl < xr:
            fail("require x_left < x_right", "grid", "x_left")
        if "n" in values["grid"] and "dx" in values["grid"]:
            fail("give either n or dx, not both", "grid", "n")
        try:
            if "n" in values["grid"]:
                grid = Grid1D(xl, xr, get("grid", "n", None))
            else:
                dx = get("grid", "dx", DEFAULT_DX)
                if not dx > 0:
                    fail("dx must be positive", "grid", "dx")
                grid = Grid1D.from_spacing(xl, xr, dx)
        except ValueError as exc:
            fail(str(exc), "grid", "n" if "n" in values["grid"] else "dx")
    else:
        dx = get("grid", "dx", DEFAULT_DX)
        if not dx > 0:
            fail("dx must be positive", "grid", "dx")
        grid = auto_grid(cfg, dx)

    if check_margin:
        lo, hi = wave_extent(cfg, cfg.t_end)
        if grid.x_left > lo - BOUNDARY_MARGIN or grid.x_right < hi + BOUNDARY_MARGIN:
            fail(
                f"boundary-margin rule: waves occupy [{lo:.3f}, {hi:.3f}] at t_end={cfg.t_end:g}, "
                f"so the domain must contain [{lo - BOUNDARY_MARGIN:.3f}, {hi + BOUNDARY_MARGIN:.3f}]",
                "grid", "x_left" if grid.x_left > lo - BOUNDARY_MARGIN else "x_right",
            )

    pk = get("perturbation", "kind", "none")
    if pk not in ("none", "gaussian"):
        fail("kind must be 'none' or 'gaussian'", "perturbation", "kind")
    width = get("perturbation", "width", 1.0)
    if pk == "gaussian" and not width > 0:
        fail("width must be positive", "perturbation", "width")
    pert = Perturbation(pk, get("perturbation", "amplitude", 0.0), get("perturbation", "center", 0.0), width)

    diags = get("scenario", "diagnostics", DIAGNOSTIC_NAMES)
    for d in diags:
        if d not in DIAGNOSTIC_NAMES:
            fail(f"unknown diagnostic {d!r}", "scenario", "diagnostics")
    return Scenario(
        name=get("scenario", "name", "scenario"),
        solver_config=cfg,
        grid=grid,
        perturbation=pert,
        diagnostics=tuple(diags),
        output_dir=get("scenario", "output_dir", "out"),
        profile_times=tuple(get("scenario", "profile_times", (0.0, 1.0, 10.0, 100.0))),
    )


def parse_config(path, check_margin: bool = True) -> Scenario:
    with open(path) as fh:
        return parse_config_text(fh.read(), check_margin)


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize(s: Scenario) -> str:
    cfg = s.solver_config
    sections = {
        "scenario": {
            "name": s.name, "output_dir": s.output_dir,
            "diagnostics": s.diagnostics, "profile_times": s.profile_times,
        },
        "solver": {
            "p": cfg.p, "mu": cfg.mu, "u_minus": cfg.u_minus, "u_plus": cfg.u_plus,
            "epsilon": cfg.epsilon, "cfl_advective": cfg.cfl_advective,
            "cfl_diffusive": cfg.cfl_diffusive, "t_end": cfg.t_end,
            "checkpoint_times": cfg.checkpoint_times, "dt_max": cfg.dt_max, "boundary": cfg.boundary,
        },
        "flux": {"kind": cfg.flux.to_config()["kind"]},
        "grid": {"x_left": s.grid.x_left, "x_right": s.grid.x_right, "n": s.grid.n},
        "perturbation": {
            "kind": s.perturbation.kind, "amplitude": s.perturbation.amplitude,
            "center": s.perturbation.center, "width": s.perturbation.width,
        },
    }
    out = []
    for sec, kv in sections.items():
        out.append(f"[{sec}]")
        out.extend(f"{k} = {_fmt(float(v) if isinstance(v, (int, float)) and k != 'n' else v)}" for k, v in kv.items())
        out.append("")
    return "\n".join(out)


def scenario_hash(s: Scenario) -> str:
    return hashlib.sha256(serialize(s).encode()).hexdigest()


def default_scenario() -> Scenario:
    return parse_config_text("[solver]\np = 2\n")
