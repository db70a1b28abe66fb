"""Command line entry point: ``kcmlab <mode> [--config FILE] [--key value ...]``."""
from __future__ import annotations

import argparse
import sys

from ..errors import ConfigError, KcmLabError
from .config import MODES, ExperimentConfig, load_config, parse_config
from .run import run_experiment

_FLAGS = [f for f in ExperimentConfig.__dataclass_fields__ if f != "mode"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kcmlab", description="bootstrap percolation and KCM experiments")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", help="key = value file; flags override it")
    for name in _FLAGS:
        p.add_argument("--" + name.replace("_", "-"), dest=name, metavar=name.upper())
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k in _FLAGS and v is not None}
    overrides["mode"] = args.mode
    try:
        cfg = load_config(args.config, overrides) if args.config else parse_config("", overrides)
        res = run_experiment(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (KcmLabError, ValueError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3
    if res.path is None:
        sys.stdout.write(res.text)
    else:
        print(f"wrote {res.path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
