"""Command-line front end: config files, sweeps, CSV artifacts, charts.

The configuration format is flat ``key = value`` text with explicit unit
suffixes in the key names; everything is converted to SI once at load time.
Unknown keys are rejected so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .charts import compute_chart, render_chart
from .cutting_force import (
    CuttingCoefficients,
    CuttingConditions,
    Direction,
    ToolGeometry,
)
from .errors import ConfigError, DomainError
from .oracles import build_dde, simulate_dde, trajectory_to_csv
from .scenario import MillingScenario
from .stability import ConvergenceRecord, SLDGrid, convergence_curve, sld_grid
from .structural import Hold, ModalAxis
from .surface import SLEMap, sle_sweep

OUT_DIR_ENV = "MILLSTAB_OUT"

SCENARIO_KEYS = {
    "teeth_count",
    "diameter_mm",
    "direction",
    "k_ct_n_per_mm2",
    "k_cn_n_per_mm2",
    "k_et_n_per_mm",
    "k_en_n_per_mm",
    "axial_depth_mm",
    "radial_depth_mm",
    "spindle_speed_rpm",
    "feed_x_mm",
    "feed_y_mm",
    "x_modes_hz",
    "x_damping",
    "x_stiffness_n_per_um",
    "y_modes_hz",
    "y_damping",
    "y_stiffness_n_per_um",
}

COMMAND_KEYS = {
    "hold",
    "steps",
    "steps_list",
    "reference_steps",
    "speed_min_rpm",
    "speed_max_rpm",
    "depth_min_mm",
    "depth_max_mm",
    "grid_speeds",
    "grid_depths",
    "sweep_points",
    "substeps_per_period",
    "horizon_periods",
    "margin",
    "threads",
    "out_dir",
}


@dataclass
class RunConfig:
    scenario: MillingScenario
    hold: Hold = Hold.IMP
    steps: int = 40
    steps_list: tuple[int, ...] = (20, 40, 60, 80, 100)
    reference_steps: int = 1000
    speed_range: tuple[float, float] = (3000.0, 23000.0)
    depth_range: tuple[float, float] = (0.05e-3, 4.0e-3)
    grid_shape: tuple[int, int] = (100, 100)
    sweep_points: int = 200
    substeps_per_period: int = 600
    horizon_periods: int = 50
    margin: float = 0.0
    threads: int = 1
    out_dir: Path = field(default_factory=lambda: Path(os.environ.get(OUT_DIR_ENV, "out")))


def _parse_lines(path: Path) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        if key not in SCENARIO_KEYS and key not in COMMAND_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        entries[key] = (value, lineno)
    return entries


def _as_float(entries, key, path):
    value, lineno = entries[key]
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"{path}:{lineno}: key {key!r} is not a number: {value!r}") from exc


def _as_int(entries, key, path):
    value, lineno = entries[key]
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f"{path}:{lineno}: key {key!r} is not an integer: {value!r}") from exc


def _as_float_list(entries, key, path):
    value, lineno = entries[key]
    try:
        return tuple(float(part) for part in value.split("/"))
    except ValueError as exc:
        raise ConfigError(
            f"{path}:{lineno}: key {key!r} must be numbers separated by '/': {value!r}"
        ) from exc


def load_config(path) -> RunConfig:
    """Parse and fully validate a run configuration file."""
    path = Path(path)
    entries = _parse_lines(path)
    missing = sorted(SCENARIO_KEYS - entries.keys())
    if missing:
        raise ConfigError(f"{path}: missing required key(s): {', '.join(missing)}")

    direction_text = entries["direction"][0].lower()
    if direction_text not in ("up", "down"):
        raise ConfigError(f"{path}:{entries['direction'][1]}: direction must be 'up' or 'down'")

    axes = {}
    for axis in ("x", "y"):
        freqs = _as_float_list(entries, f"{axis}_modes_hz", path)
        damps = _as_float_list(entries, f"{axis}_damping", path)
        stiffs = _as_float_list(entries, f"{axis}_stiffness_n_per_um", path)
        if not (len(freqs) == len(damps) == len(stiffs)):
            raise ConfigError(
                f"{path}: {axis}-axis modal lists must have equal lengths "
                f"(got {len(freqs)}/{len(damps)}/{len(stiffs)})"
            )
        axes[axis] = list(zip(freqs, damps, (k * 1e6 for k in stiffs)))

    try:
        scenario = MillingScenario(
            tool=ToolGeometry(
                teeth_count=_as_int(entries, "teeth_count", path),
                diameter=_as_float(entries, "diameter_mm", path) * 1e-3,
                direction=Direction.UP if direction_text == "up" else Direction.DOWN,
            ),
            coefficients=CuttingCoefficients(
                tangential_cutting=_as_float(entries, "k_ct_n_per_mm2", path) * 1e6,
                normal_cutting=_as_float(entries, "k_cn_n_per_mm2", path) * 1e6,
                tangential_edge=_as_float(entries, "k_et_n_per_mm", path) * 1e3,
                normal_edge=_as_float(entries, "k_en_n_per_mm", path) * 1e3,
            ),
            conditions=CuttingConditions(
                axial_depth=_as_float(entries, "axial_depth_mm", path) * 1e-3,
                radial_depth=_as_float(entries, "radial_depth_mm", path) * 1e-3,
                spindle_speed=_as_float(entries, "spindle_speed_rpm", path),
                feed_per_tooth=(
                    _as_float(entries, "feed_x_mm", path) * 1e-3,
                    _as_float(entries, "feed_y_mm", path) * 1e-3,
                ),
            ),
            x_axis=ModalAxis.from_hz(axes["x"]),
            y_axis=ModalAxis.from_hz(axes["y"]),
        )
    except DomainError as exc:
        raise ConfigError(f"{path}: invalid scenario: {exc}") from exc

    config = RunConfig(scenario=scenario)
    if "hold" in entries:
        value, lineno = entries["hold"]
        try:
            config.hold = Hold(value.lower())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: hold must be 'imp' or 'zoh'") from exc
    for key in ("steps", "reference_steps", "sweep_points", "substeps_per_period",
                "horizon_periods", "threads"):
        if key in entries:
            setattr(config, key, _as_int(entries, key, path))
    if "steps_list" in entries:
        value, lineno = entries["steps_list"]
        try:
            config.steps_list = tuple(int(part) for part in value.split("/"))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: steps_list must be integers separated by '/'") from exc
    if "margin" in entries:
        config.margin = _as_float(entries, "margin", path)
    if "speed_min_rpm" in entries or "speed_max_rpm" in entries:
        for key in ("speed_min_rpm", "speed_max_rpm"):
            if key not in entries:
                raise ConfigError(f"{path}: {key!r} required when the other bound is given")
        config.speed_range = (
            _as_float(entries, "speed_min_rpm", path),
            _as_float(entries, "speed_max_rpm", path),
        )
    if "depth_min_mm" in entries or "depth_max_mm" in entries:
        for key in ("depth_min_mm", "depth_max_mm"):
            if key not in entries:
                raise ConfigError(f"{path}: {key!r} required when the other bound is given")
        config.depth_range = (
            _as_float(entries, "depth_min_mm", path) * 1e-3,
            _as_float(entries, "depth_max_mm", path) * 1e-3,
        )
    if "grid_speeds" in entries or "grid_depths" in entries:
        config.grid_shape = (
            _as_int(entries, "grid_speeds", path) if "grid_speeds" in entries else 100,
            _as_int(entries, "grid_depths", path) if "grid_depths" in entries else 100,
        )
    if "out_dir" in entries:
        config.out_dir = Path(entries["out_dir"][0])
    _validate_command_params(config, path)
    return config


def _validate_command_params(config: RunConfig, path) -> None:
    if config.steps < 1:
        raise ConfigError(f"{path}: steps must be >= 1, got {config.steps}")
    if any(m < 1 for m in config.steps_list):
        raise ConfigError(f"{path}: steps_list entries must be >= 1")
    if config.reference_steps <= max(config.steps_list, default=0):
        raise ConfigError(f"{path}: reference_steps must exceed every entry of steps_list")
    if not (0.0 < config.speed_range[0] <= config.speed_range[1]):
        raise ConfigError(f"{path}: invalid speed range {config.speed_range}")
    if not (0.0 <= config.depth_range[0] <= config.depth_range[1]):
        raise ConfigError(f"{path}: invalid depth range {config.depth_range}")
    if config.grid_shape[0] < 1 or config.grid_shape[1] < 1:
        raise ConfigError(f"{path}: grid must be at least 1x1, got {config.grid_shape}")
    if config.sweep_points < 1:
        raise ConfigError(f"{path}: sweep_points must be >= 1")
    if config.threads < 1:
        raise ConfigError(f"{path}: threads must be >= 1")
    if config.margin < 0.0:
        raise ConfigError(f"{path}: margin must be >= 0")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def emit_csv(result, path) -> None:
    """Write a computed artifact in its documented layout (12 significant digits)."""
    path = Path(path)
    if isinstance(result, SLDGrid):
        lines = ["omega_rpm,ap_mm,spectral_radius,stable"]
        for i, speed in enumerate(result.speeds):
            for j, depth in enumerate(result.depths):
                lines.append(
                    f"{_fmt(speed)},{_fmt(depth * 1e3)},{_fmt(result.radius_field[i, j])},"
                    f"{int(result.stable_mask[i, j])}"
                )
    elif isinstance(result, SLEMap):
        lines = ["omega_rpm,sle_um,valid"]
        for i, speed in enumerate(result.speeds):
            lines.append(f"{_fmt(speed)},{_fmt(result.sle_values[i] * 1e6)},{int(result.valid[i])}")
    elif isinstance(result, (list, tuple)) and result and all(
        isinstance(r, ConvergenceRecord) for r in result
    ):
        lines = ["m,mu_re,mu_im,rel_err"]
        for record in result:
            lines.append(
                f"{record.steps},{_fmt(record.eigenvalue.real)},{_fmt(record.eigenvalue.imag)},"
                f"{_fmt(record.relative_error)}"
            )
    else:
        raise DomainError(f"no CSV layout for {type(result)!r}")
    try:
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot write output: {exc}") from exc


def _read_rows(path, expected_header):
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != expected_header:
        raise ConfigError(f"{path}: expected header {expected_header!r}")
    return [line.split(",") for line in lines[1:] if line]


def parse_sld_csv(path) -> SLDGrid:
    """Read back an emitted stability grid (round-trip of emit_csv)."""
    rows = _read_rows(path, "omega_rpm,ap_mm,spectral_radius,stable")
    speeds = sorted({float(r[0]) for r in rows})
    depths = sorted({float(r[1]) for r in rows})
    radius = np.full((len(speeds), len(depths)), np.nan)
    stable = np.zeros((len(speeds), len(depths)), dtype=bool)
    si = {s: i for i, s in enumerate(speeds)}
    dj = {d: j for j, d in enumerate(depths)}
    for r in rows:
        i, j = si[float(r[0])], dj[float(r[1])]
        radius[i, j] = float(r[2])
        stable[i, j] = r[3] == "1"
    return SLDGrid(
        speeds=np.array(speeds),
        depths=np.array(depths) * 1e-3,
        radius_field=radius,
        stable_mask=stable,
    )


def parse_sle_csv(path) -> SLEMap:
    rows = _read_rows(path, "omega_rpm,sle_um,valid")
    speeds = np.array([float(r[0]) for r in rows])
    values = np.array([float(r[1]) for r in rows]) * 1e-6
    valid = np.array([r[2] == "1" for r in rows])
    return SLEMap(speeds=speeds, sle_values=values, valid=valid, axial_depth=math.nan, feed=np.zeros(2))


def parse_convergence_csv(path) -> list[ConvergenceRecord]:
    rows = _read_rows(path, "m,mu_re,mu_im,rel_err")
    return [
        ConvergenceRecord(int(r[0]), complex(float(r[1]), float(r[2])), float(r[3])) for r in rows
    ]


def run(command: str, config: RunConfig) -> list[Path]:
    """Execute one analysis command; returns the files written."""
    out_dir = config.out_dir
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"{out_dir}: cannot create output directory: {exc}") from exc
    written: list[Path] = []
    if command == "sld":
        grid = sld_grid(
            config.scenario,
            config.speed_range,
            config.depth_range,
            config.grid_shape,
            steps=config.steps,
            hold=config.hold,
            margin=config.margin,
            threads=config.threads,
        )
        target = out_dir / "sld.csv"
        emit_csv(grid, target)
        written.append(target)
    elif command == "sle":
        sweep = sle_sweep(
            config.scenario,
            config.speed_range,
            config.sweep_points,
            steps=config.steps,
            hold=config.hold,
            margin=config.margin,
        )
        target = out_dir / "sle.csv"
        emit_csv(sweep, target)
        written.append(target)
    elif command == "converge":
        records = convergence_curve(
            config.scenario, list(config.steps_list), config.hold, config.reference_steps
        )
        target = out_dir / "convergence.csv"
        emit_csv(records, target)
        written.append(target)
    elif command == "simulate":
        sim = simulate_dde(
            build_dde(config.scenario),
            horizon_periods=config.horizon_periods,
            substeps_per_period=config.substeps_per_period,
        )
        target = out_dir / "trajectory.csv"
        trajectory_to_csv(sim, target)
        written.append(target)
    elif command == "chart":
        model = compute_chart(
            config.scenario,
            config.speed_range,
            config.depth_range,
            config.grid_shape,
            steps=config.steps,
            hold=config.hold,
            margin=config.margin,
        )
        sld_target = out_dir / "sld.csv"
        emit_csv(model.grid, sld_target)
        chart_target = out_dir / "chart.svg"
        render_chart(model, chart_target)
        written.extend([sld_target, chart_target])
    else:
        raise ConfigError(f"unknown command {command!r}")
    return written


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="millstab",
        description="Milling chatter stability lobes and surface location error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sld", "stability lobe grid over speed and depth"),
        ("sle", "surface location error sweep over speed"),
        ("converge", "dominant-eigenvalue convergence against a fine reference"),
        ("simulate", "time-march the closed-loop delay system"),
        ("chart", "combined stability/surface-error contour chart"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the run configuration file")
        p.add_argument("--out", help="output directory (default: $MILLSTAB_OUT or ./out)")
        p.add_argument("--hold", choices=["imp", "zoh"], help="force reconstruction hold")
        p.add_argument(
            "--steps",
            help="samples per tooth period m; a comma list selects the convergence resolutions",
        )
        p.add_argument("--grid", help="grid size as WxH (speeds x depths)")
        p.add_argument("--speed-range", help="spindle speed range lo:hi in rpm")
        p.add_argument("--depth-range", help="axial depth range lo:hi in mm")
        p.add_argument("--threads", type=int, help="parallel workers for grid columns")
    return parser


def _parse_range(text: str, flag: str, unit: float) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo) * unit, float(hi) * unit
    except ValueError as exc:
        raise ConfigError(f"{flag} expects lo:hi, got {text!r}") from exc


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> None:
    if args.out:
        config.out_dir = Path(args.out)
    if args.hold:
        config.hold = Hold(args.hold)
    if args.steps:
        try:
            if "," in args.steps:
                config.steps_list = tuple(int(p) for p in args.steps.split(","))
            else:
                config.steps = int(args.steps)
        except ValueError as exc:
            raise ConfigError(f"--steps expects an integer or comma list, got {args.steps!r}") from exc
    if args.grid:
        try:
            w, h = args.grid.lower().split("x")
            config.grid_shape = (int(w), int(h))
        except ValueError as exc:
            raise ConfigError(f"--grid expects WxH, got {args.grid!r}") from exc
    if args.speed_range:
        config.speed_range = _parse_range(args.speed_range, "--speed-range", 1.0)
    if args.depth_range:
        config.depth_range = _parse_range(args.depth_range, "--depth-range", 1e-3)
    if args.threads:
        config.threads = args.threads
    _validate_command_params(config, "<command line>")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        _apply_overrides(config, args)
        written = run(args.command, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
