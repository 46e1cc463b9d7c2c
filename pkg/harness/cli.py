"""
Command-line interface
Subcommands: build-ref, run, sweep, report

Exit codes: 0 success, 1 usage or configuration error, 2 data error
"""
import argparse
import logging
import sys
from pathlib import Path

import yaml

from chem.realism import ReferenceRegistry, RegistryBuildError, RegistryConfigError, build_registry_from_file, \
    unparseable_ratio
from config.config import Config
from config.run_config import ConfigError, RunConfig, SelectionMode, apply_overrides, load_experiment, \
    load_run_config
from harness.experiment import run_sweep
from harness.outputs import write_run
from harness.report import report_runs
from search import engine
from search.policy import ScheduleKind
from utils.data_reader import DataReader
from utils.logger import configure_root_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

MAX_UNPARSEABLE_RATIO = 0.5


class UsageError(Exception):
    """Invalid command line"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='molevo', description='Context-aware evolutionary molecular design toolkit')
    parser.add_argument('--log-level', default=None, type=str.upper,
                        choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'),
                        help='Console logging level (default: LOG_LEVEL)')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    build = sub.add_parser('build-ref', help='Build a reference registry from a SMILES corpus')
    build.add_argument('--input', type=Path, default=Config.CORPUS_PATH, help='SMILES-per-line corpus')
    build.add_argument('--output', type=Path, default=Config.REGISTRY_PATH, help='Registry file to write')
    build.add_argument('--max-diameter', type=int, default=4, choices=(0, 2, 4))
    build.add_argument('--text', type=Path, default=None, help='Also export the identifiers as decimal text')

    run = sub.add_parser('run', help='Execute one seeded run')
    run.add_argument('--config', type=Path, default=None, help='YAML file with a run section')
    _add_registry_and_output(run)
    run.add_argument('--seed', type=int)
    run.add_argument('--steps', type=int)
    run.add_argument('--mode', choices=[m.value for m in SelectionMode])
    run.add_argument('--context-diameter', type=int, choices=(0, 2))
    run.add_argument('--eps', type=float, help='Exploration floor eps_floor')
    run.add_argument('--schedule', choices=[k.value for k in ScheduleKind])

    sweep = sub.add_parser('sweep', help='Run an experiment grid over several seeds')
    sweep.add_argument('--config', type=Path, required=True, help='YAML file with run and experiment sections')
    _add_registry_and_output(sweep)
    sweep.add_argument('--jobs', type=int, default=None,
                       help='Worker processes (default: experiment.n_jobs, then PARALLEL_WORKERS)')

    report = sub.add_parser('report', help='Sliding-window series over completed run directories')
    report.add_argument('run_dirs', nargs='+', type=Path)
    report.add_argument('--window', type=int, default=Config.WINDOW)
    report.add_argument('--output', type=Path, default=Config.RESULTS_DIR / 'window.csv')
    return parser


def _add_registry_and_output(parser):
    parser.add_argument('--registry', type=Path, default=Config.REGISTRY_PATH,
                        help='Registry file (default: MOLEVO_REGISTRY)')
    parser.add_argument('--output', type=Path, default=Config.RESULTS_DIR, help='Output directory')


def _load_registry(path: Path, cfg: RunConfig) -> ReferenceRegistry:
    reg = ReferenceRegistry.load(path)
    for diameter in cfg.filter_diameters:
        if not reg.covers(diameter):
            raise RegistryConfigError(f"Registry {path} (max diameter {reg.max_diameter}) "
                                      f"does not cover filter diameter {diameter}")
    if not reg.covers(cfg.context_diameter):
        raise RegistryConfigError(f"Registry {path} does not cover context diameter {cfg.context_diameter}")
    return reg


def cmd_build_ref(args) -> int:
    reg = build_registry_from_file(args.input, args.max_diameter)
    ratio = unparseable_ratio(reg)
    if ratio is not None and ratio > MAX_UNPARSEABLE_RATIO:
        raise RegistryBuildError(f"{reg.skipped_count} of {reg.molecule_count + reg.skipped_count} corpus lines "
                                 f"could not be parsed; refusing to write {args.output}")
    reg.save(args.output)
    if args.text:
        reg.export_text(args.text)
    print(f"molecules: {reg.molecule_count}")
    for radius, size in reg.set_sizes().items():
        print(f"radius {radius}: {size} identifiers")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    cfg = apply_overrides(cfg, {
        'seed': args.seed,
        'steps': args.steps,
        'selection_mode': args.mode,
        'context_diameter': args.context_diameter,
        'eps_floor': args.eps,
        'schedule_kind': args.schedule,
    })
    reg = _load_registry(args.registry, cfg)
    result = engine.run(cfg, reg)
    run_dir = write_run(cfg, result, args.output, reg.listing(cfg.context_diameter // 2))
    print(f"{run_dir}")
    print(f"realism: {result.realism:.6f}")
    print(f"novelty: {result.novelty:.6f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = load_experiment(args.config)
    reg = _load_registry(args.registry, spec.base)
    outputs = run_sweep(spec, reg, args.output, n_jobs=args.jobs)
    print(f"{outputs['table']}")
    failed = (outputs['table_frame']['status'] != 'ok').sum()
    if failed:
        logger.warning(f"{failed} configuration row(s) failed")
    return EXIT_OK


def cmd_report(args) -> int:
    series = report_runs(args.run_dirs, args.window)
    DataReader.write_csv(series, args.output)
    print(f"{args.output} ({len(series)} windows)")
    return EXIT_OK


COMMANDS = {
    'build-ref': cmd_build_ref,
    'run': cmd_run,
    'sweep': cmd_sweep,
    'report': cmd_report,
}


def main(argv=None) -> int:
    """
    Parse arguments and dispatch to a subcommand

    Returns:
        int: Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    configure_root_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, yaml.YAMLError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_DATA


if __name__ == '__main__':
    sys.exit(main())
