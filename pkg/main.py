#!/usr/bin/env python3
"""
qwalk2d - two-dimensional quantum walks under noise
Command-line entry point
"""

import argparse
import logging
import os
import sys

from numpy.linalg import LinAlgError

from qwalk2d.config import FILE_KEYS, Config, ConfigurationError, load_config_file

# Set up logging
logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIGURATION = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='qwalk2d',
        description="Simulate 2D discrete-time quantum walks under noise and emit CSV/SVG results",
    )
    parser.add_argument('--scheme', help="grover | alternate | pauli")
    parser.add_argument('--steps', type=int, help="number of walk steps")
    parser.add_argument('--noise', help="none | bitflip | bitflip-axis | bitflip-step | phaseflip | "
                                        "phaseflip-axis | phaseflip-step | stateflip | depolarizing")
    parser.add_argument('--k', type=int, choices=(3, 6, 23), help="state-flip set size (grover)")
    parser.add_argument('--p', help="noise level or comma-separated list")
    parser.add_argument('--theta', type=float, help="alternate-walk coin angle in radians")
    parser.add_argument('--measure', help="comma list of distribution, mid_pp, mid_xy, robustness, purity")
    parser.add_argument('--schedule', choices=('per_axis', 'per_step'), help="when noise acts")
    parser.add_argument('--preset', help="figure preset fig1 ... fig16")
    parser.add_argument('--format', help="comma list of csv, svg")
    parser.add_argument('--out', help="output path (file stem, or directory for presets)")
    parser.add_argument('--seed', type=int, help="reserved; every computation is deterministic")
    parser.add_argument('--config', help="key=value experiment file; flags override it")
    parser.add_argument('--list-presets', action='store_true', help="list figure presets and exit")
    parser.add_argument('--verify', choices=('symmetry', 'breakdown', 'absorption'),
                        help="run a flip-symmetry verification suite")
    return parser


def _collect_values(args: argparse.Namespace) -> dict:
    values = load_config_file(args.config) if args.config else {}
    for key in FILE_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return values


def _stem(path: str) -> str:
    root, ext = os.path.splitext(path)
    return root if ext.lower() in ('.csv', '.svg') else path


def run(args: argparse.Namespace) -> int:
    from qwalk2d.emitters import emit_table
    from qwalk2d.experiments import PRESETS, ExperimentConfig, run_experiment, run_preset
    from qwalk2d.symmetry import run_verifications

    if args.list_presets:
        for preset in PRESETS.values():
            print(f"{preset.name:6s} t={preset.steps:<3d} (full t={preset.full_steps})  {preset.description}")
        return EXIT_OK

    if args.verify:
        reports = run_verifications(args.verify)
        for report in reports:
            print(report.summary())
        failed = [report.name for report in reports if not report.passed]
        if failed:
            logger.error(f"❌ Verification failed: {', '.join(failed)}")
            return EXIT_INVARIANT
        logger.info(f"✅ {len(reports)} verification(s) passed")
        return EXIT_OK

    values = _collect_values(args)
    formats = tuple(f.strip() for f in str(values.get('format', 'csv')).split(',') if f.strip())
    preset = values.pop('preset', None)

    if preset:
        out_dir = values.get('out') or Config.OUTPUT_DIR
        for name, table in run_preset(preset):
            emit_table(table, os.path.join(out_dir, name), formats)
        logger.info(f"🏁 Preset {preset} finished")
        return EXIT_OK

    config = ExperimentConfig.from_mapping(values)
    table = run_experiment(config)
    stem = config.output or os.path.join(
        Config.OUTPUT_DIR, f"{config.scheme}_{config.noise}_t{config.steps}_{'-'.join(config.measures)}"
    )
    emit_table(table, _stem(stem), config.formats)
    logger.info("🏁 Experiment finished")
    return EXIT_OK


def main(argv=None) -> int:
    """Main application entry point"""
    args = build_parser().parse_args(argv)
    try:
        # Validate configuration
        Config.validate()
        logger.info("✅ Configuration validated successfully")
        return run(args)

    except ConfigurationError as e:
        logger.error(f"❌ Configuration error: {e}")
        return EXIT_CONFIGURATION

    except LinAlgError as e:
        logger.error(f"❌ Linear algebra failure: {e}")
        return EXIT_INVARIANT

    except ValueError as e:
        from qwalk2d.hilbert import InvalidStateError
        if isinstance(e, InvalidStateError):
            logger.error(f"❌ Numerical invariant failure: {e}")
            return EXIT_INVARIANT
        logger.error(f"❌ Invalid argument: {e}")
        return EXIT_CONFIGURATION


if __name__ == '__main__':
    sys.exit(main())
