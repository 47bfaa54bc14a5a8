import argparse
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Final, NoReturn

from loglshd import __version__
from loglshd.constants import (
    DEFAULT_JACCARD_THRESHOLD,
    DEFAULT_MISMATCH_POLICY,
    DEFAULT_SAMPLE_SIZE,
    DEFAULT_SEED,
    DEFAULT_SIGNATURE_LENGTH,
    DEFAULT_STRATEGY,
    DEFAULT_THREADS,
    PRESETS,
    SWEEP_STRATEGIES,
    SWEEP_THRESHOLDS,
)
from loglshd.errors import (
    ConfigurationError,
    GroupingStrategyError,
    LogFormatError,
    LogLSHDError,
    PipelineStageError,
    PreprocessRuleError,
)
from loglshd.loggers import pipeline as logger
from loglshd.loggers import set_level
from loglshd.metrics import format_report
from loglshd.parsing import load_config, load_preset
from loglshd.pipeline import (
    build_run_config,
    evaluate_outputs,
    run_pipeline,
    sweep_strategies,
    sweep_thresholds,
)
from loglshd.synthetic import generate_synthetic, synthetic_log_format
from loglshd.types import DatasetSettings, LoggingLevels, RunConfig, SyntheticSpec

EXIT_OK: Final[int] = 0
EXIT_USAGE: Final[int] = 1
EXIT_FAILURE: Final[int] = 2

USAGE_ERRORS: Final[tuple[type[Exception], ...]] = (
    ConfigurationError,
    GroupingStrategyError,
    LogFormatError,
    PreprocessRuleError,
)


class ArgumentParser(argparse.ArgumentParser):
    """argument parser exiting with the usage error code"""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f'{self.prog}: error: {message}\n')


def _band(
    value: str,
) -> int | None:
    if value.lower() == 'none':
        return None
    try:
        band = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected an integer or "none", got {value!r}')
    if band < 1:
        raise argparse.ArgumentTypeError('band width must be at least 1')
    return band


def _float_list(
    value: str,
) -> list[float]:
    try:
        return [float(part) for part in value.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma-separated numbers, got {value!r}')


def _str_list(
    value: str,
) -> list[str]:
    return [part.strip() for part in value.split(',') if part.strip()]


def _add_logging_arguments(
    parser: argparse.ArgumentParser,
) -> None:
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='debug logging')
    verbosity.add_argument('--quiet', action='store_true', help='warnings and errors only')


def _add_run_arguments(
    parser: argparse.ArgumentParser,
) -> None:
    # defaults are None so that config file and preset values can be detected
    parser.add_argument('--config', type=Path, help='TOML file with dataset settings')
    parser.add_argument(
        '--threshold-preset',
        choices=PRESETS,
        help='shipped dataset settings',
    )
    parser.add_argument(
        '--data-dir',
        type=Path,
        default=Path('.'),
        help='base directory of relative paths from config files and presets',
    )
    parser.add_argument('--dataset', help='dataset name, selects the config table')
    parser.add_argument('--log-file', type=Path, help='raw log file')
    parser.add_argument('--log-format', help='log format such as "<Date> <Time> <Content>"')
    parser.add_argument(
        '--regex', action='append', help='preprocessing expression, repeatable'
    )
    parser.add_argument('--ground-truth', type=Path, help='structured ground truth CSV')
    parser.add_argument('--output-dir', type=Path, help='directory of all artifacts')
    parser.add_argument(
        '--jaccard-threshold',
        type=float,
        help=f'merge threshold in (0, 1], default {DEFAULT_JACCARD_THRESHOLD}',
    )
    parser.add_argument('--strategy', help=f'grouping strategy, default {DEFAULT_STRATEGY}')
    parser.add_argument(
        '--signature-length',
        type=int,
        help=f'MinHash signature length, default {DEFAULT_SIGNATURE_LENGTH}',
    )
    parser.add_argument('--seed', type=int, help=f'random seed, default {DEFAULT_SEED}')
    parser.add_argument(
        '--sample-size',
        type=int,
        help=f'representatives per cluster, default {DEFAULT_SAMPLE_SIZE}',
    )
    parser.add_argument('--dtw-band', type=_band, help='Sakoe-Chiba band width or "none"')
    parser.add_argument(
        '--threads', type=int, help=f'worker threads, default {DEFAULT_THREADS}'
    )
    parser.add_argument(
        '--on-mismatch',
        choices=('skip', 'whole-line'),
        help=f'lines not matching the format, default {DEFAULT_MISMATCH_POLICY}',
    )
    _add_logging_arguments(parser)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog='loglshd',
        description='Log parsing by initial grouping, LSH merging and DTW templates.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)

    parse = commands.add_parser('parse', help='parse a log file')
    _add_run_arguments(parse)

    evaluate = commands.add_parser('eval', help='evaluate an existing structured result')
    evaluate.add_argument('--structured', type=Path, required=True, help='result CSV')
    evaluate.add_argument('--ground-truth', type=Path, required=True, help='ground truth CSV')
    evaluate.add_argument('--dataset', default='dataset', help='name in the report')
    evaluate.add_argument('--output-dir', type=Path, help='write the report CSV here')
    _add_logging_arguments(evaluate)

    thresholds = commands.add_parser('sweep-threshold', help='one run per Jaccard threshold')
    _add_run_arguments(thresholds)
    thresholds.add_argument(
        '--thresholds',
        type=_float_list,
        default=list(SWEEP_THRESHOLDS),
        help='comma-separated thresholds',
    )

    strategies = commands.add_parser('sweep-strategy', help='one run per grouping strategy')
    _add_run_arguments(strategies)
    strategies.add_argument(
        '--strategies',
        type=_str_list,
        default=list(SWEEP_STRATEGIES),
        help='comma-separated grouping strategies',
    )

    synth = commands.add_parser('synth', help='generate a synthetic corpus')
    synth.add_argument('--n-templates', type=int, default=20)
    synth.add_argument('--logs-per-template', type=int, default=500)
    synth.add_argument('--variable-slots', type=int, default=1)
    synth.add_argument('--alphabet', choices=('alphabetic', 'mixed'), default='mixed')
    synth.add_argument('--static-words', type=int, default=6)
    synth.add_argument('--value-pool', type=int, help='distinct values per variable slot')
    synth.add_argument('--no-header', action='store_true', help='content only lines')
    synth.add_argument('--seed', type=int, default=DEFAULT_SEED)
    synth.add_argument('--output-dir', type=Path, default=Path('.'))
    synth.add_argument('--name', default='synthetic', help='file name stem')
    _add_logging_arguments(synth)

    return parser


def _dataset_settings(
    args: argparse.Namespace,
) -> dict[str, Any]:
    """merge preset and config file settings of the selected dataset, the config
    file taking precedence"""
    settings: dict[str, Any] = {}
    sources: list[tuple[str, dict[str, DatasetSettings]]] = []
    if args.threshold_preset is not None:
        preset = load_preset(args.threshold_preset)
        sources.append((f'preset {args.threshold_preset}', preset))
    if args.config is not None:
        sources.append((str(args.config), load_config(args.config)))

    for source, datasets in sources:
        if args.dataset is None:
            raise ConfigurationError(f'Selecting settings from {source} requires --dataset')
        if args.dataset not in datasets:
            logger.warning('Dataset >>%s<< not found in %s.', args.dataset, source)
            continue
        settings.update(datasets[args.dataset])

    for key in ('log_file', 'ground_truth'):
        if key in settings and not Path(settings[key]).is_absolute():
            settings[key] = args.data_dir / settings[key]

    return settings


def resolve_run_config(
    args: argparse.Namespace,
) -> RunConfig:
    """run configuration with the precedence: command line, config file, preset,
    built-in defaults"""
    settings = _dataset_settings(args)

    def pick(name: str, default: Any = None) -> Any:
        value = getattr(args, name, None)
        if value is not None:
            return value
        return settings.get(name, default)

    log_file = pick('log_file')
    log_format = pick('log_format')
    if log_file is None:
        raise ConfigurationError('No log file given, use --log-file or a config file')
    if log_format is None:
        raise ConfigurationError('No log format given, use --log-format or a config file')
    log_file = Path(log_file)
    dataset = args.dataset if args.dataset is not None else log_file.stem

    return build_run_config(
        dataset=dataset,
        log_file=log_file,
        log_format=log_format,
        regex=args.regex if args.regex is not None else settings.get('regex', []),
        strategy=pick('strategy', DEFAULT_STRATEGY),
        jaccard_threshold=pick('jaccard_threshold', DEFAULT_JACCARD_THRESHOLD),
        signature_length=pick('signature_length', DEFAULT_SIGNATURE_LENGTH),
        seed=pick('seed', DEFAULT_SEED),
        sample_size=pick('sample_size', DEFAULT_SAMPLE_SIZE),
        output_dir=pick('output_dir', Path('.')),
        ground_truth=pick('ground_truth'),
        on_mismatch=pick('on_mismatch', DEFAULT_MISMATCH_POLICY),
        dtw_band=args.dtw_band,
        threads=pick('threads', DEFAULT_THREADS),
        show_progress=not args.quiet,
    )


def _run_parse(
    args: argparse.Namespace,
) -> int:
    result = run_pipeline(resolve_run_config(args))
    if result.report is not None:
        print(format_report(result.report))
    else:
        print(
            f'lines: {result.stats.n_records}, templates: {result.stats.n_templates}, '
            f'parsing_time_s: {result.stats.parsing_time_s:.3f}'
        )
    for path in result.paths:
        print(path)
    return EXIT_OK


def _run_eval(
    args: argparse.Namespace,
) -> int:
    report = evaluate_outputs(
        args.structured,
        args.ground_truth,
        args.dataset,
        output_dir=args.output_dir,
    )
    print(format_report(report))
    return EXIT_OK


def _run_sweep_threshold(
    args: argparse.Namespace,
) -> int:
    table = sweep_thresholds(resolve_run_config(args), args.thresholds)
    print(table.to_string(index=False))
    return EXIT_OK


def _run_sweep_strategy(
    args: argparse.Namespace,
) -> int:
    table = sweep_strategies(resolve_run_config(args), args.strategies)
    print(table.to_string(index=False))
    return EXIT_OK


def _run_synth(
    args: argparse.Namespace,
) -> int:
    spec = SyntheticSpec(
        n_templates=args.n_templates,
        logs_per_template=args.logs_per_template,
        variable_slots=args.variable_slots,
        alphabet=args.alphabet,
        static_words=args.static_words,
        value_pool=args.value_pool,
        with_header=not args.no_header,
        seed=args.seed,
    )
    path_log, path_truth = generate_synthetic(spec, args.output_dir, name=args.name)
    print(path_log)
    print(path_truth)
    print(f'log format: {synthetic_log_format(spec)}')
    return EXIT_OK


COMMANDS: Final = {
    'parse': _run_parse,
    'eval': _run_eval,
    'sweep-threshold': _run_sweep_threshold,
    'sweep-strategy': _run_sweep_strategy,
    'synth': _run_synth,
}


def main(
    argv: Sequence[str] | None = None,
) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_level(LoggingLevels.DEBUG)
    elif args.quiet:
        set_level(LoggingLevels.WARNING)

    try:
        return COMMANDS[args.command](args)
    except USAGE_ERRORS as error:
        print(f'error: {error}', file=sys.stderr)
        return EXIT_USAGE
    except PipelineStageError as error:
        print(f'{error.stage}: {error.cause}', file=sys.stderr)
        return EXIT_FAILURE
    except LogLSHDError as error:
        print(f'error: {error}', file=sys.stderr)
        return EXIT_FAILURE
