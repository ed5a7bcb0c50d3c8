#!/usr/bin/env python3
"""
iPolicy
Command-line entry point: run, compare, park, validate.
"""
import sys
import argparse
from pathlib import Path
from typing import List, Optional

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from scripts.core.config import Config, list_presets, save_results
from scripts.core.errors import EXIT_OK, BudgetExhausted, ConfigError
from scripts.core.logger import get_logger
from scripts.core.safety import SafetyChecker
from scripts.experiments.run_comparison import run_comparison
from scripts.experiments.run_ipolicy import run_ipolicy
from scripts.experiments.run_parking import run_parking
from scripts.experiments.validate_config import validate_config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Incremental feedback motion planner (iPolicy)',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Examples:
  # Check a preset without running it
  python scripts/ipolicy.py validate --config pointmass_cluttered

  # Single seeded run
  python scripts/ipolicy.py run --config pointmass_cluttered --seed 7

  # iPolicy vs multigrid over five seeds
  python scripts/ipolicy.py compare --config pointmass_cluttered --seeds 0 1 2 3 4

  # Parking maneuver with a sample cap
  python scripts/ipolicy.py park --config parking_headin --max-samples 2000

Presets: {', '.join(list_presets()) or '(none found)'}
        """
    )
    sub = parser.add_subparsers(dest='verb', required=True)

    for verb, help_text in (
        ('run', 'Single scenario run'),
        ('compare', 'iPolicy against the multigrid baseline'),
        ('park', 'Plan until the parking rollout succeeds'),
        ('validate', 'Check the configuration only'),
    ):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument('--config', type=str, required=True,
                       help='Preset name or path to a YAML scenario file')
        p.add_argument('--seed', type=int,
                       help='Sampling seed (overrides IPOLICY_SEED and the file)')
        p.add_argument('--out', type=str,
                       help='Artifact root directory (overrides IPOLICY_OUT_DIR and the file)')
        p.add_argument('--time-budget', type=float,
                       help='Planner compute budget in seconds')
        p.add_argument('--max-samples', type=int,
                       help='Cap on the number of vertices')
        p.add_argument('--quiet', action='store_true',
                       help='Only warnings and errors on the console, no progress bars')
        if verb == 'validate':
            p.add_argument('--output', type=str,
                           help='Write the schedule report as JSON')
        if verb == 'compare':
            p.add_argument('--seeds', type=int, nargs='+',
                           help='Seeds to compare (default: evaluation.seeds)')
            p.add_argument('--methods', type=str, nargs='+', choices=['ipolicy', 'multigrid'],
                           help='Methods to run (default: evaluation.methods)')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger = get_logger(f"ipolicy_{args.verb}", quiet=args.quiet)

    try:
        config = Config.load_from_file(args.config)
        config.apply_overrides(
            seed=args.seed,
            out_dir=args.out,
            time_budget=args.time_budget,
            max_samples=args.max_samples
        )

        if args.verb == 'validate':
            report = validate_config(config, logger)
            if args.output:
                save_results(report, args.output)
                logger.info(f"✓ Report saved to: {args.output}")
            return EXIT_OK

        SafetyChecker(logger).validate_config(config)

        if args.verb == 'run':
            run_ipolicy(config, logger)
        elif args.verb == 'compare':
            report = run_comparison(config, logger, seeds=args.seeds, methods=args.methods)
            logger.info(f"✓ Comparison written under {config.output.out_dir}/{config.scenario.name}")
            if report.get('claim_holds') is False:
                logger.warning("⚠️  Equal-time comparison favoured the multigrid baseline")
        elif args.verb == 'park':
            run_parking(config, logger)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return e.exit_code
    except BudgetExhausted as e:
        logger.error(f"Budget exhausted: {e}")
        return e.exit_code

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
