"""Command-line driver: ``rootsim run|validate|oracle <config>``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .growth import run_simulation
from .logio import write_log
from .oracle import run_suite
from .scenario import ConfigError, load_config
from .svg import emit_svg

OUT_DIR_ENV = "ROOTSIM_OUT_DIR"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rootsim", description="Growing-root simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its log")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None,
                     help=f"output directory (default: ${OUT_DIR_ENV} or the current directory)")
    run.add_argument("--svg", action="store_true", help="also write an SVG picture")

    val = sub.add_parser("validate", help="check a scenario file")
    val.add_argument("config", type=Path)

    orc = sub.add_parser("oracle", help="cross-check the solver against brute force")
    orc.add_argument("config", type=Path)
    orc.add_argument("--count", type=int, default=24)
    return p


def _load(path: Path):
    try:
        return load_config(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror or exc}", file=sys.stderr)
    except ConfigError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
    return None


def _cmd_run(args) -> int:
    config = _load(args.config)
    if config is None:
        return 1
    out = args.out or Path(os.environ.get(OUT_DIR_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / f"{config.name}.log.jsonl"
    # the log is streamed so an interrupted run still leaves a readable prefix
    with log_path.open("w") as fh:
        log = run_simulation(config, log_stream=fh)
    summary = log.summary
    print(f"{config.name}: {summary['status']} ({summary['reason']}) after "
          f"{summary['steps']} steps, {len(log.events('restart'))} restarts, "
          f"{summary['wall_time']:.2f} s")
    print(f"log: {log_path}")
    if args.svg:
        svg_path = out / f"{config.name}.svg"
        try:
            svg_path.write_text(emit_svg(log))
            print(f"svg: {svg_path}")
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    if summary["status"] == "Failed":
        print(f"error: {summary['error']}", file=sys.stderr)
        return 1
    return 0


def _cmd_validate(args) -> int:
    config = _load(args.config)
    if config is None:
        return 1
    curve = config.build_curve()
    print(f"{args.config}: ok ({config.name}, mode {config.mode}, ds {config.ds:g}, "
          f"{len(config.obstacles)} obstacle(s))")
    spec = config.initial_curve
    if spec.start is not None:
        asked = float(np.linalg.norm(np.subtract(spec.end, spec.start)))
        print(f"initial curve: {curve.node_count} nodes, length {curve.length:.6g} "
              f"(segment length {asked:.6g} resampled to ds; end point "
              f"{np.array2string(curve.tip, precision=6)})")
    else:
        print(f"initial curve: {curve.node_count} nodes, length {curve.length:.6g}")
    return 0


def _cmd_oracle(args) -> int:
    config = _load(args.config)
    if config is None:
        return 1
    results = run_suite(args.count, seed=config.seed, params=config.cost)
    failed = 0
    for i, r in enumerate(results):
        ok = r.passed()
        failed += not ok
        print(f"{i:3d} {r.kind:<12} solver {r.solver_cost:.6g} grid {r.grid_cost:.6g} "
              f"gap {r.rel_gap:.2%} violation {r.violation:.2e} {'ok' if ok else 'FAIL'}")
    print(f"{len(results) - failed}/{len(results)} instances agree")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    return {"run": _cmd_run, "validate": _cmd_validate, "oracle": _cmd_oracle}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
