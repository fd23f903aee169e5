"""Command-line front door: run, compare, validate, serve.

Outputs carry no timestamps, so any command rerun with the same config,
seed, and assets writes byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import (
    SCHEMES,
    ConfigError,
    SessionConfig,
    apply_overrides,
    config_from_dict,
    load_config_doc,
    resolve_asset,
)
from .session import SessionLog, compute_summary, load_session_assets, run_session
from .speech import GraphError, load_graph
from .trajectory import TrajectoryError, load_trajectory

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_ASSET = 3
EXIT_CAP = 4

_EPILOG = """\
session.csv columns, in order: t; one x<i>, xd<i>, vref<i>, f<i> column
per axis (position, velocity, admittance reference, external force);
p; a; c; t_hat_x; t_hat_a; em; vertex; playhead.

Any extra --<dotted.path> <value> pair overrides that config entry
(values parse as JSON when possible), e.g. --user.r_max 450 --M0 12.
PACE_ALIGN_OUT sets the default output directory.
"""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pace-align",
        description="Synchronized guidance sessions: run, compare, validate, serve.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one session, write CSV + summary")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--out", default=None)
    run_p.add_argument("--scheme", choices=SCHEMES, default=None)
    run_p.add_argument("--seed", type=int, default=None)

    cmp_p = sub.add_parser("compare", help="run a scheme x seed cross-product")
    cmp_p.add_argument("--config", required=True)
    cmp_p.add_argument("--out", default=None)
    cmp_p.add_argument("--schemes", default=",".join(SCHEMES))
    cmp_p.add_argument("--seeds", type=int, default=20)
    cmp_p.add_argument("--parallel", type=int, default=1)

    val_p = sub.add_parser("validate", help="check a trajectory or graph file")
    val_p.add_argument("asset")

    srv_p = sub.add_parser("serve", help="run the live websocket service")
    srv_p.add_argument("--config", required=True)
    srv_p.add_argument("--port", type=int, default=8000)
    srv_p.add_argument("--host", default="127.0.0.1")
    return parser


def _override_pairs(parser, extras: list[str]) -> list[tuple[str, str]]:
    pairs = []
    i = 0
    while i < len(extras):
        flag = extras[i]
        if not flag.startswith("--") or i + 1 >= len(extras):
            parser.error(f"overrides come as --<dotted.path> <value> pairs, got {flag!r}")
        pairs.append((flag[2:], extras[i + 1]))
        i += 2
    return pairs


def _out_dir(arg: str | None) -> Path:
    out = Path(arg or os.environ.get("PACE_ALIGN_OUT") or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_session_config(args, pairs: list[tuple[str, str]]) -> SessionConfig:
    doc = load_config_doc(args.config)
    if getattr(args, "scheme", None) is not None:
        pairs = pairs + [("scheme", args.scheme)]
    if getattr(args, "seed", None) is not None:
        pairs = pairs + [("seed", str(args.seed))]
    if pairs:
        doc = apply_overrides(doc, pairs)
    return config_from_dict(doc, base_dir=Path(args.config).parent)


def _peak_abs_em(log: SessionLog) -> float:
    return float(np.abs(log.em).max()) if log.em.size else 0.0


def _session_summary(cfg: SessionConfig, log: SessionLog) -> dict:
    return {
        "config": cfg.to_dict(),
        "terminal": log.terminal_dict(),
        "peak_abs_em": _peak_abs_em(log),
    }


def cmd_run(args, pairs: list[tuple[str, str]]) -> int:
    cfg = _load_session_config(args, pairs)
    traj, graph = load_session_assets(cfg)
    log = run_session(cfg, traj, graph)
    out = _out_dir(args.out)
    log.to_csv(out / "session.csv")
    with open(out / "summary.json", "w") as fh:
        json.dump(_session_summary(cfg, log), fh, indent=2, sort_keys=True)
        fh.write("\n")
    am = log.misalignment
    am_text = f"{am:+.3f} s" if am is not None else "unfinished (cap hit)"
    print(f"AM = {am_text}   peak |EM| = {_peak_abs_em(log):.3f} s")
    print(f"wrote {out / 'session.csv'} and {out / 'summary.json'}")
    return EXIT_CAP if log.cap_hit else EXIT_OK


_WORKER_ASSETS: dict = {}


def _compare_worker(payload) -> SessionLog:
    doc, base_dir, scheme, seed = payload
    cfg = config_from_dict(
        apply_overrides(doc, [("scheme", scheme), ("seed", str(seed))]),
        base_dir=base_dir,
    )
    key = (cfg.trajectory, cfg.graph, cfg.base_dir)
    if key not in _WORKER_ASSETS:
        _WORKER_ASSETS[key] = load_session_assets(cfg)
    traj, graph = _WORKER_ASSETS[key]
    return run_session(cfg, traj, graph)


_SESSION_COLUMNS = [
    "scheme", "seed", "motion_end_t", "audio_end_t", "misalignment",
    "peak_abs_em", "frac_a_natural", "c_min", "cap_hit",
]


def _session_row(log: SessionLog) -> list:
    return [
        log.scheme,
        log.seed,
        "" if log.motion_end_t is None else repr(log.motion_end_t),
        "" if log.audio_end_t is None else repr(log.audio_end_t),
        "" if log.misalignment is None else repr(log.misalignment),
        repr(_peak_abs_em(log)),
        repr(float(np.mean(np.abs(log.a - 1.0) < 0.05))),
        repr(float(log.c.min())),
        int(log.cap_hit),
    ]


def _medians_table(schemes: list[str], summary: dict) -> str:
    head = ("| scheme | sessions | median AM (s) | median \\|AM\\| (s) "
            "| frac \\|a-1\\|<0.05 | median c | cap hits |")
    rule = "|---|---|---|---|---|---|---|"
    lines = [head, rule]
    for scheme in schemes:
        block = summary["schemes"][scheme]
        lines.append(
            f"| {scheme} | {block['n_sessions']} "
            f"| {block['misalignment'].get('median', float('nan')):+.3f} "
            f"| {block['abs_misalignment'].get('median', float('nan')):.3f} "
            f"| {block['frac_a_natural']:.3f} "
            f"| {block['c']['median']:.3f} "
            f"| {block['cap_hits']} |"
        )
    ks = summary["coop_ks"]
    if ks:
        lines.append("")
        lines.append("Cooperation KS distances: "
                     + ", ".join(f"{k} = {v:.3f}" for k, v in sorted(ks.items())))
    return "\n".join(lines)


def cmd_compare(args, pairs: list[tuple[str, str]]) -> int:
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {scheme!r}, pick from {SCHEMES}")
    if args.seeds < 1:
        raise ConfigError("--seeds must be >= 1")
    doc = load_config_doc(args.config)
    if pairs:
        doc = apply_overrides(doc, pairs)
    base_dir = str(Path(args.config).parent)
    config_from_dict(doc, base_dir=base_dir)  # fail fast before spawning work
    jobs = [(doc, base_dir, scheme, seed)
            for scheme in schemes for seed in range(args.seeds)]
    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            logs = list(pool.map(_compare_worker, jobs, chunksize=1))
    else:
        logs = [_compare_worker(job) for job in jobs]
    # jobs were built in (scheme, seed) order and map preserves it
    out = _out_dir(args.out)
    by_scheme: dict[str, list[SessionLog]] = {s: [] for s in schemes}
    for log in logs:
        by_scheme[log.scheme].append(log)
    for scheme in schemes:
        with open(out / f"compare_{scheme}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_SESSION_COLUMNS)
            for log in by_scheme[scheme]:
                writer.writerow(_session_row(log))
    table = _medians_table(schemes, compute_summary(logs))
    (out / "compare.md").write_text(table + "\n")
    print(table)
    print(f"wrote per-scheme CSVs and compare.md under {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    path = Path(args.asset)
    try:
        doc = json.loads(path.read_bytes())
    except OSError as e:
        print(f"cannot read asset {path}: {e}", file=sys.stderr)
        return EXIT_ASSET
    except json.JSONDecodeError as e:
        print(f"{path}: not valid JSON: {e}", file=sys.stderr)
        return EXIT_VIOLATION
    if isinstance(doc, dict) and "points" in doc:
        try:
            traj = load_trajectory(path)
        except TrajectoryError as e:
            print(f"invalid trajectory: {e}", file=sys.stderr)
            return EXIT_VIOLATION
        print(f"trajectory ok: dims={traj.dims} "
              f"points={len(traj.control_points)} "
              f"length={traj.arc_length_at(1.0):.4f} m "
              f"interpolation={traj.interpolation}")
        return EXIT_OK
    if isinstance(doc, dict) and "vertices" in doc:
        try:
            graph = load_graph(path)
        except GraphError as e:
            print(f"invalid graph: {e}", file=sys.stderr)
            return EXIT_VIOLATION
        print(f"graph ok: start={graph.start} vertices={len(graph.vertices)}")
        for vid in sorted(graph.vertices):
            v = graph.vertices[vid]
            print(f"  vertex {vid} ({v.duration_s:.2f} s) "
                  f"t_min={graph.t_min[vid]:.2f} t_max={graph.t_max[vid]:.2f} "
                  f"{v.text!r}")
        if graph.natural_path is not None:
            print(f"  natural path: {graph.natural_path}")
        return EXIT_OK
    print(f"{path}: unrecognized asset (need a trajectory or phrasing graph)",
          file=sys.stderr)
    return EXIT_VIOLATION


def cmd_serve(args, pairs: list[tuple[str, str]]) -> int:
    from .service import serve  # deferred: pulls in the web stack

    cfg = _load_session_config(args, pairs)
    traj, graph = load_session_assets(cfg)
    serve(cfg, traj, graph, host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args, extras = parser.parse_known_args(argv)
    if args.command == "validate" and extras:
        parser.error(f"unrecognized arguments: {' '.join(extras)}")
    pairs = _override_pairs(parser, extras)
    try:
        if args.command == "run":
            return cmd_run(args, pairs)
        if args.command == "compare":
            return cmd_compare(args, pairs)
        if args.command == "validate":
            return cmd_validate(args)
        return cmd_serve(args, pairs)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrajectoryError, GraphError, OSError) as e:
        print(f"asset error: {e}", file=sys.stderr)
        return EXIT_ASSET


if __name__ == "__main__":
    sys.exit(main())
