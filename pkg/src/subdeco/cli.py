"""Command-line front end.

    subdeco <experiment> --config <path> [--out <dir>] [--threads k] [--seed s]

Exit codes: 0 success, 1 check failure, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, load_config
from .harness import RUNNERS
from .lindblad import EvolutionError
from .phonon import QuadratureError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="subdeco",
        description="Phonon-limited decoherence experiments for quantum-dot arrays")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=None,
                   help="output directory (default: config output_dir)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for sweep points")
    p.add_argument("--seed", type=int, default=0,
                   help="echoed into reports; the experiments are deterministic")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.experiment)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(args.out) if args.out else Path(config.output_dir)
    try:
        path = RUNNERS[args.experiment](config, out_dir, threads=max(1, args.threads))
    except (QuadratureError, EvolutionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    print(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        if not doc.get("pass", True):
            failing = [r for r in doc.get("results", [])
                       if isinstance(r, dict) and not r.get("passed", True)]
            for r in failing[:20]:
                print(f"FAIL {r.get('check')} n={r.get('n')} q={r.get('q')}: "
                      f"{r.get('detail')}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
