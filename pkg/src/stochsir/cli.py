"""Command-line entry point: ``python -m stochsir`` or ``stochsir``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import SirError
from .scenarios import SCENARIOS, ScenarioConfig, parse_config, run, with_overrides

log = logging.getLogger("stochsir")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stochsir", description=__doc__)
    ap.add_argument("--config", type=Path, help="flat key = value parameter file")
    ap.add_argument("--scenario", choices=SCENARIOS)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--paths", type=int, dest="n_paths")
    ap.add_argument("--dt", type=float)
    ap.add_argument("--t-final", type=float, dest="t_final")
    ap.add_argument("--out", type=Path, dest="outputs")
    ap.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s")
    try:
        if args.config is not None:
            cfg = parse_config(args.config)
        else:
            cfg = ScenarioConfig(params=None)
        cfg = with_overrides(cfg, scenario=args.scenario, seed=args.seed, n_paths=args.n_paths,
                             outputs=args.outputs, dt=args.dt, t_final=args.t_final)
        result = run(cfg)
    except SirError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("wrote %s", cfg.outputs)
    if not args.quiet:
        print(json.dumps({"scenario": cfg.scenario, "outputs": str(cfg.outputs)}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
