"""Command-line entry point: ``rgflow <command> <config.json> [--strict] [--out DIR] [--threads N]``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, RGFlowError
from .harness import load_config, run

COMMANDS = {"run": None, "rg": "rg", "certify": "certify", "sweep": "sweep", "oracle-compare": "oracle-compare"}


def build_parser():
    ap = argparse.ArgumentParser(prog="rgflow", description="RG asymptotics experiments from JSON configs.")
    ap.add_argument("command", choices=sorted(COMMANDS), help="'run' uses the mode in the config")
    ap.add_argument("config", help="path to the experiment JSON file")
    ap.add_argument("--strict", action="store_true", help="abort RG steps whose data is not below eps_n")
    ap.add_argument("--out", default=None, help="output directory (beats RGFLOW_OUT and the config)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        rep = run(cfg, out_dir=args.out, strict=True if args.strict else None, threads=args.threads,
                  mode=COMMANDS[args.command])
    except (ConfigError, RGFlowError, ValueError, OSError) as exc:
        print(f"rgflow: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    summary = {"mode": rep.mode, "config_hash": rep.config_hash, "wall_time": round(rep.wall_time, 3),
               "error": rep.error, "assertions": rep.assertions}
    if rep.mode == "certify" and rep.error is None:
        with open(_artifact(args, cfg, "certificate.txt")) as fh:
            print(fh.read(), end="")
    print(json.dumps(summary, indent=2, default=str))
    if rep.error is not None:
        return 1
    return 0 if rep.passed else 2


def _artifact(args, cfg, name):
    import os

    from .harness import output_dir_for

    return os.path.join(output_dir_for(cfg, args.out), name)


if __name__ == "__main__":
    sys.exit(main())
