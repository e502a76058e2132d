"""Command line entry point: ``degen-waves profile|simulate|verify``."""
from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import diagnostics as diag
from . import waves
from .config import ConfigError, Scenario, default_scenario, parse_config, scenario_hash, serialize
from .solver import SolverError, gaussian_perturbation, init_from_wave, run, write_checkpoint_csv
from .verify import run_suite

PROFILE_HEADER = ["t", "x", "u_multi", "u_contact", "u_rarefaction", "du_multi"]
WAVE_HEADER = ["x", "u", "du", "d2u"]


def _load(args) -> Scenario:
    return parse_config(args.config) if args.config else default_scenario()


def _out_dir(args, scenario: Scenario) -> Path:
    d = Path(args.out if args.out else scenario.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _tag(t: float) -> str:
    return f"{t:g}".replace(".", "p")


def _write_rows(path: Path, header, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])


def cmd_profile(scenario: Scenario, times, out: Path, wave: str = "composite") -> list[Path]:
    """Sample the composite (or one of its components) on the scenario grid."""
    c = scenario.composite()
    x = scenario.grid.x
    paths = []
    for t in times:
        if wave == "composite":
            cols = [
                np.full_like(x, t),
                x,
                waves.composite_eval(c, t, x),
                waves.contact_u(c.contact, t, x),
                waves.smooth_rarefaction_eval(c.rarefaction, t, x),
                waves.composite_dux(c, t, x),
            ]
            header = PROFILE_HEADER
        elif wave == "contact":
            w = c.contact
            cols = [x, waves.contact_u(w, t, x), waves.contact_dux(w, t, x), waves._contact_d2ux_onesided(w, t, x)]
            header = WAVE_HEADER
        elif wave == "rarefaction":
            r = c.rarefaction
            cols = [x, waves.smooth_rarefaction_eval(r, t, x), waves.smooth_rarefaction_dux(r, t, x),
                    waves.smooth_rarefaction_d2ux(r, t, x)]
            header = WAVE_HEADER
        else:
            raise ValueError(f"unknown wave {wave!r}")
        path = out / f"profile_{wave}_t{_tag(t)}.csv"
        _write_rows(path, header, [np.asarray(col, dtype=float) for col in cols])
        paths.append(path)
    return paths


def _write_manifest(out: Path, scenario: Scenario, status: str, files, failure: str = "", failure_time=None):
    lines = [
        f"scenario = {scenario.name}",
        f"scenario_hash = {scenario_hash(scenario)}",
        f"version = {__version__}",
        f"status = {status}",
    ]
    if failure:
        lines.append(f"failure_time = {failure_time!r}")
        lines.append(f"failure = {failure}")
    lines.append(f"files = {', '.join(sorted(p.name for p in files))}")
    (out / "MANIFEST").write_text("\n".join(lines) + "\n")


def cmd_simulate(scenario: Scenario, out: Path) -> int:
    """Run the scenario; returns the process exit code."""
    cfg = scenario.solver_config
    grid = scenario.grid
    c = scenario.composite()
    pert = scenario.perturbation
    phi0 = gaussian_perturbation(grid, pert.amplitude, pert.center, pert.width) if pert.kind == "gaussian" else None
    rec = diag.DiagnosticsRecorder(c)
    files: list[Path] = []
    (out / "scenario.ini").write_text(serialize(scenario))
    files.append(out / "scenario.ini")

    def dump(t, f):
        path = out / f"checkpoint_t{_tag(t)}.csv"
        write_checkpoint_csv(path, f, c)
        files.append(path)

    def write_diagnostics():
        path = out / "diagnostics.csv"
        names = [n for n in scenario.diagnostics]
        _write_rows(path, ["t"] + names, [rec.times] + [rec.rows[n] for n in names])
        files.append(path)

    try:
        u0 = init_from_wave(grid, c, phi0)
        run(cfg, grid, u0, [dump, rec])
    except (SolverError, ValueError) as exc:
        write_diagnostics()
        t_fail = getattr(exc, "t", None)
        _write_manifest(out, scenario, "failed", files + [out / "MANIFEST"], str(exc), t_fail)
        print(f"simulation failed: {exc}", file=sys.stderr)
        return 2
    write_diagnostics()
    _write_manifest(out, scenario, "ok", files + [out / "MANIFEST"])
    return 0


def cmd_verify(suite: str, out: Path | None = None) -> int:
    report = run_suite(suite)
    text = report.text()
    print(text)
    if out is not None:
        (out / f"verify_{suite}.txt").write_text(text + "\n")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="degen-waves", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="scenario INI file (default: built-in scenario)")
        p.add_argument("--out", metavar="DIR", help="output directory (default: scenario output_dir)")

    p = sub.add_parser("profile", help="write composite-wave profiles to CSV")
    common(p)
    p.add_argument("--times", help="comma-separated sample times (default: scenario profile_times)")
    p.add_argument("--wave", choices=("composite", "contact", "rarefaction"), default="composite")

    p = sub.add_parser("simulate", help="run the solver and write checkpoints and diagnostics")
    common(p)

    p = sub.add_parser("verify", help="run the acceptance checks")
    common(p)
    p.add_argument("suite", nargs="?", choices=("all", "analytic", "solver"), default="all")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            out = None
            if args.out:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
            return cmd_verify(args.suite, out)
        scenario = _load(args)
        out = _out_dir(args, scenario)
        if args.command == "profile":
            if args.times is None:
                times = scenario.profile_times
            else:
                times = tuple(float(s) for s in args.times.split(",") if s.strip())
            cmd_profile(scenario, times, out, args.wave)
            return 0
        return cmd_simulate(scenario, out)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
