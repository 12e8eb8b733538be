"""Command-line entry point: ``fracrd <experiment> --config <path>`` and ``fracrd basis-info --n N``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import EXPERIMENTS, ConfigError, load_config, validate
from .experiments import basis_info, run_experiment
from .integrator import BlowUpError

EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_IO = 4


def _parser():
    ap = argparse.ArgumentParser(prog="fracrd", description="Fractional reaction-diffusion solver on R^d")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        if name == "basis_info":
            continue
        aliases = [name.replace("_", "-")] if "_" in name else []
        p = sub.add_parser(name, aliases=aliases, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="path to the key = value config file")
        p.add_argument("--output", help="output directory (overrides output_dir)")
        p.add_argument("--seed", type=int, help="random seed (overrides seed)")
        p.add_argument("--threads", type=int, help="BLAS threads")
    p = sub.add_parser("basis-info", help="print eigenvalue diagnostics of the stiffness matrix")
    p.add_argument("--n", type=int, required=True, help="highest mode index N")
    p.add_argument("--cache-dir", help="eigenbasis cache directory")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "basis-info":
        if args.n < 1:
            print("error: --n must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        info = basis_info(args.n, args.cache_dir)
        for k, v in info.items():
            print(f"{k} = {v:.12g}" if isinstance(v, float) else f"{k} = {v}")
        return 0

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    command = args.command.replace("-", "_")
    if cfg.experiment != command:
        print(f"{args.config}: config is for experiment {cfg.experiment!r}, not {command!r}",
              file=sys.stderr)
        return EXIT_CONFIG
    if args.output:
        cfg.output_dir = args.output
    if args.seed is not None:
        cfg.seed = args.seed
    validate(cfg)

    limiter = None
    if args.threads:
        from threadpoolctl import threadpool_limits
        limiter = threadpool_limits(args.threads)
    try:
        summary = run_experiment(cfg)
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        if limiter is not None:
            limiter.unregister()
    print(json.dumps(summary["diagnostics"], indent=1, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
