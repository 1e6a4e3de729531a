"""``hh-net-epi`` command-line entry point.

Exit status: 0 on success, 2 for configuration errors, 3 when a numerical
solve fails to converge or is ill-conditioned.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from hh_net_epi import experiments
from hh_net_epi.config import COMMANDS, load_config
from hh_net_epi.errors import ConditioningError, ConfigError, NonConvergenceError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hh-net-epi",
        description="Household network SIR epidemics: asymptotic quantities and simulation checks.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, type=Path, help="INI file with one [command] section")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--workers", type=int, help="parallel processes for simulation commands")
    p.add_argument("--raw", type=Path, help="simulate: per-replicate CSV")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(args) -> tuple[str, Path | None]:
    cfg = load_config(args.config, seed=args.seed, output_path=args.out)
    if cfg.command != args.command:
        raise ConfigError(f"config section is [{cfg.command}] but command is {args.command!r}", str(args.config))
    if args.command == "analytics":
        text = experiments.to_json(experiments.cmd_analytics(cfg))
    elif args.command == "simulate":
        text = experiments.to_json(experiments.cmd_simulate(cfg, workers=args.workers, raw_path=args.raw))
    elif args.command == "critical-curve":
        text = experiments.to_csv(*experiments.cmd_critical_curve(cfg))
    elif args.command == "sweep":
        text = experiments.to_csv(*experiments.cmd_sweep(cfg))
    else:
        text = experiments.to_csv(*experiments.cmd_convergence(cfg, workers=args.workers))
    return text, cfg.output_path


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text, out = run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergenceError, ConditioningError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
