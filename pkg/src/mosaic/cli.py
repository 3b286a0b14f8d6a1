"""Command-line front end.

    mosaic run --scenario rotating-sphere --derivative material --grid 16x32 \\
               --dt 1e-3 --t-end 1 --observer lagrangian --output out.csv
    mosaic verify --suite identities --seed 42

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 solver error.  Messages go to standard error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import MosaicError, RankMismatch, UnknownKind, UnsupportedKind
from .geometry import evaluate_frame

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "stretching-spheroid"
    derivative: str = "material"
    observer: str = "lagrangian"
    grid: tuple = (16, 32)
    dt: float = 1e-3
    t_end: float = 1.0
    rank: int = 1
    output: str | None = None
    format: str = "csv"
    seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = format_grid(self.grid)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        d = dict(data)
        if "grid" in d:
            d["grid"] = parse_grid(d["grid"])
        for key, typ in (("dt", float), ("t_end", float), ("rank", int), ("seed", int)):
            if key in d:
                try:
                    d[key] = typ(d[key])
                except (TypeError, ValueError):
                    raise ConfigError(f"{key} must be a {typ.__name__}, got {d[key]!r}") from None
        return cls(**d)


def parse_grid(value) -> tuple:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        parts = value
    elif isinstance(value, str) and "x" in value.lower():
        parts = value.lower().split("x")
    else:
        raise ConfigError(f"grid must look like 16x32, got {value!r}")
    try:
        n1, n2 = (int(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError(f"grid must look like 16x32, got {value!r}") from None
    if n1 < 1 or n2 < 1:
        raise ConfigError(f"grid must be nonempty, got {n1}x{n2}")
    return n1, n2


def format_grid(grid: tuple) -> str:
    return f"{grid[0]}x{grid[1]}"


def build_problem(cfg: RunConfig):
    from .scenarios import Scenario, TransportProblem

    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    try:
        problem = TransportProblem(cfg.scenario, cfg.derivative, grid=tuple(cfg.grid), dt=cfg.dt,
                                   t_end=cfg.t_end, observer=cfg.observer, rank=cfg.rank)
        problem.steps
    except (ValueError, UnknownKind, UnsupportedKind, RankMismatch) as exc:
        raise ConfigError(str(exc)) from None
    if cfg.observer == "eulerian" and Scenario.get(cfg.scenario).eulerian_chart is None:
        raise ConfigError(f"{cfg.scenario} has no stationary Eulerian chart")
    return problem


# ---------------------------------------------------------------- output

def component_names(rank: int) -> list:
    if rank == 1:
        return ["r1", "r2"]
    return ["q11", "q12", "q21", "q22"]


def diagnostic_names(rank: int) -> list:
    names = ["norm", "phi1", "phi2"]
    return names + ["trace", "asym", "eig1", "eig2"] if rank == 2 else names


def trajectory_table(problem, traj) -> tuple[list, np.ndarray]:
    """Header and rows (sample time × node, row-major) with diagnostics."""
    from .scenarios import Scenario, diagnostics

    scen = Scenario.get(problem.scenario)
    chart = scen.eulerian_chart if problem.observer == "eulerian" else scen.chart
    S, P = len(traj.times), len(traj.nodes)
    y = np.broadcast_to(traj.nodes, (S, P, 2))
    frame = evaluate_frame(chart, np.asarray(traj.times)[:, None], y)
    diag = diagnostics(traj.values, frame, problem.rank)
    comps = traj.values.reshape(S, P, -1)
    cols = [np.broadcast_to(np.asarray(traj.times)[:, None], (S, P)), y[..., 0], y[..., 1]]
    cols += [comps[..., c] for c in range(comps.shape[-1])]
    cols += [diag[name] for name in diagnostic_names(problem.rank)]
    header = ["t", "y1", "y2"] + component_names(problem.rank) + diagnostic_names(problem.rank)
    return header, np.stack([np.asarray(c, dtype=float).reshape(S * P) for c in cols], axis=-1)


def render_csv(header: list, rows: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{x:.17g}" for x in row])
    return buf.getvalue()


def render_json(cfg: RunConfig, header: list, rows: np.ndarray) -> str:
    return json.dumps({"config": cfg.to_dict(), "columns": header, "rows": rows.tolist()}) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------- commands

def cmd_run(cfg: RunConfig) -> int:
    from .scenarios import solve_transport

    try:
        problem = build_problem(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        traj = solve_transport(problem)
        header, rows = trajectory_table(problem, traj)
    except MosaicError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    text = render_csv(header, rows) if cfg.format == "csv" else render_json(cfg, header, rows)
    try:
        _emit(text, cfg.output)
    except OSError as exc:
        print(f"config error: cannot write {cfg.output}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_verify(suite: str, seed: int = 0, output: str | None = None) -> int:
    from .verification import SUITES, run_suite

    if suite not in SUITES:
        print(f"config error: unknown suite {suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_CONFIG
    report = run_suite(suite, seed)
    _emit(json.dumps(report.as_dict(), indent=2, ensure_ascii=False) + "\n", output)
    for c in report.checks:
        if not c.passed:
            print(f"FAILED {c.name}: {c.value:.3e} (bound {c.relation} {c.bound:.1e})", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mosaic", description="Time derivatives of tensor fields on moving surfaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a transport problem and write the trajectory")
    run.add_argument("--config", help="JSON file with run settings; flags override it")
    run.add_argument("--scenario", help="stretching-spheroid | rotating-sphere | helical-spheroid")
    run.add_argument("--derivative", help="material | jaumann | upper-convected | lower-convected | "
                                          "upper-lower-convected | lower-upper-convected | truesdell")
    run.add_argument("--observer", help="lagrangian | eulerian")
    run.add_argument("--grid", help="n1xn2 nodes, e.g. 16x32")
    run.add_argument("--dt", type=float)
    run.add_argument("--t-end", dest="t_end", type=float)
    run.add_argument("--rank", type=int, help="1 for vectors, 2 for 2-tensors")
    run.add_argument("--output", help="output path; standard output if omitted")
    run.add_argument("--format", help="csv | json")
    run.add_argument("--seed", type=int)

    ver = sub.add_parser("verify", help="run a verification suite and print its JSON report")
    ver.add_argument("--suite", required=True, help="oracle | identities | scenarios")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--output", help="report path; standard output if omitted")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args.suite, args.seed, args.output)
    try:
        data = _load_config(args.config) if args.config else {}
        for key in ("scenario", "derivative", "observer", "grid", "dt", "t_end", "rank", "output", "format", "seed"):
            value = getattr(args, key)
            if value is not None:
                data[key] = value
        cfg = RunConfig.from_dict(data)
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return cmd_run(cfg)


if __name__ == "__main__":
    sys.exit(main())
