import dataclasses
import functools
from collections.abc import Callable, Iterable, Sequence
from pathlib import Path
from typing import Any, Final, ParamSpec, TypeVar

import pandas as pd

from loglshd.clustering import merge_clusters, optimize_bands
from loglshd.common import derive_seed
from loglshd.constants import (
    CONTENT_FIELD,
    DEFAULT_JACCARD_THRESHOLD,
    DEFAULT_MISMATCH_POLICY,
    DEFAULT_SAMPLE_SIZE,
    DEFAULT_SEED,
    DEFAULT_SIGNATURE_LENGTH,
    DEFAULT_STRATEGY,
    DEFAULT_THREADS,
    SWEEP_STRATEGIES,
    SWEEP_THRESHOLDS,
)
from loglshd.errors import LogLSHDError, PipelineStageError
from loglshd.extraction import assign_templates
from loglshd.grouping import build_initial_groups, parse_strategy
from loglshd.loggers import pipeline as logger
from loglshd.metrics import evaluate, format_report, time_parse, write_report
from loglshd.parsing import (
    compile_log_format,
    compile_rules,
    parse_log_file,
    preprocess,
    read_templates_csv,
    write_rejects,
    write_structured,
)
from loglshd.types import (
    Cluster,
    ContentStore,
    EvaluationReport,
    GroupingStrategy,
    InitialGroup,
    LogRecord,
    MismatchPolicy,
    PipelineResult,
    PreprocessRule,
    RejectsReport,
    RunConfig,
    RunStats,
    StructuredOutput,
)

T = TypeVar('T')
P = ParamSpec('P')

SWEEP_METRIC_COLUMNS: Final[tuple[str, ...]] = (
    'GA',
    'PA',
    'FGA',
    'FTA',
    'parsing_time_s',
    'n_initial_groups',
    'n_clusters',
    'n_templates',
    'error',
)


def pipeline_stage(
    stage: str,
) -> Callable[[Callable[P, T]], Callable[P, T]]:
    """report any failure of the decorated stage as ``PipelineStageError``
    naming the stage"""

    def wrapper(func: Callable[P, T]) -> Callable[P, T]:
        @functools.wraps(func)
        def wrapper_func(*args: P.args, **kwargs: P.kwargs) -> T:
            try:
                return func(*args, **kwargs)
            except PipelineStageError:
                raise
            except Exception as error:
                logger.error('Stage >>%s<< failed: %s', stage, error)
                raise PipelineStageError(stage, error) from error

        return wrapper_func

    return wrapper


def build_run_config(
    *,
    dataset: str,
    log_file: str | Path,
    log_format: str,
    regex: Iterable[str] = (),
    strategy: str | GroupingStrategy = DEFAULT_STRATEGY,
    jaccard_threshold: float = DEFAULT_JACCARD_THRESHOLD,
    signature_length: int = DEFAULT_SIGNATURE_LENGTH,
    seed: int = DEFAULT_SEED,
    sample_size: int = DEFAULT_SAMPLE_SIZE,
    output_dir: str | Path = '.',
    ground_truth: str | Path | None = None,
    on_mismatch: MismatchPolicy = DEFAULT_MISMATCH_POLICY,
    dtw_band: int | None = None,
    threads: int = DEFAULT_THREADS,
    show_progress: bool = True,
) -> RunConfig:
    """assemble a validated run configuration from plain settings"""
    if isinstance(strategy, str):
        strategy = parse_strategy(strategy)
    rules: tuple[PreprocessRule, ...] = compile_rules(regex)

    return RunConfig(
        dataset=dataset,
        log_file=Path(log_file),
        log_format=compile_log_format(log_format, content_field=CONTENT_FIELD),
        rules=rules,
        strategy=strategy,
        jaccard_threshold=jaccard_threshold,
        signature_length=signature_length,
        seed=seed,
        sample_size=sample_size,
        output_dir=Path(output_dir),
        ground_truth=Path(ground_truth) if ground_truth is not None else None,
        on_mismatch=on_mismatch,
        dtw_band=dtw_band,
        threads=threads,
        show_progress=show_progress,
    )


@pipeline_stage('parse')
def _read(
    config: RunConfig,
    rejects: RejectsReport,
) -> list[LogRecord]:
    return parse_log_file(
        config.log_file,
        config.log_format,
        on_mismatch=config.on_mismatch,
        rejects=rejects,
    )


@pipeline_stage('preprocess')
def _preprocess(
    records: Sequence[LogRecord],
    rules: Sequence[PreprocessRule],
) -> ContentStore:
    return ContentStore([preprocess(record.content, rules) for record in records])


@pipeline_stage('group')
def _group(
    contents: ContentStore,
    strategy: GroupingStrategy,
) -> list[InitialGroup]:
    return build_initial_groups(contents, strategy)


@pipeline_stage('merge')
def _merge(
    groups: Sequence[InitialGroup],
    contents: ContentStore,
    config: RunConfig,
) -> list[Cluster]:
    return merge_clusters(
        groups,
        config.jaccard_threshold,
        config.signature_length,
        derive_seed(config.seed, 'minhash'),
        contents,
        threads=config.threads,
    )


@pipeline_stage('extract')
def _extract(
    clusters: Sequence[Cluster],
    records: Sequence[LogRecord],
    contents: ContentStore,
    config: RunConfig,
) -> StructuredOutput:
    output = assign_templates(
        clusters,
        records,
        config.sample_size,
        derive_seed(config.seed, 'sample'),
        contents=contents,
        band=config.dtw_band,
        threads=config.threads,
        show_progress=config.show_progress,
    )
    output.validate()
    return output


@pipeline_stage('write')
def _write(
    output: StructuredOutput,
    rejects: RejectsReport,
    config: RunConfig,
) -> tuple[Path, ...]:
    path_structured, path_templates = write_structured(
        output, config.output_dir, config.dataset
    )
    path_rejects = write_rejects(rejects, config.output_dir, config.dataset)
    return path_structured, path_templates, path_rejects


@pipeline_stage('evaluate')
def _evaluate(
    output: StructuredOutput,
    config: RunConfig,
    parsing_time_s: float,
) -> tuple[EvaluationReport, Path]:
    assert config.ground_truth is not None
    truth = read_templates_csv(config.ground_truth)
    report = evaluate(
        output,
        truth,
        config.dataset,
        parsing_time_s=parsing_time_s,
        config=config.echo(),
    )
    path = write_report(report, config.output_dir)
    return report, path


def run_pipeline(
    config: RunConfig,
) -> PipelineResult:
    """parse a log file end to end: read, preprocess, group, merge, extract and
    write; evaluate against the ground truth if one is configured

    The parsing time spans reading the log file up to writing the structured
    output and excludes the evaluation.

    Parameters
    ----------
    config : RunConfig
        complete run configuration

    Returns
    -------
    PipelineResult
        structured output, evaluation report (None without ground truth),
        run statistics and the paths of all written artifacts

    Raises
    ------
    PipelineStageError
        if any stage fails, carrying the stage name and the cause
    """
    logger.info('Parsing dataset >>%s<< from %s...', config.dataset, config.log_file)
    rejects = RejectsReport()
    counts: dict[str, int] = {}

    def parse() -> tuple[StructuredOutput, tuple[Path, ...]]:
        records = _read(config, rejects)
        contents = _preprocess(records, config.rules)
        groups = _group(contents, config.strategy)
        clusters = _merge(groups, contents, config)
        output = _extract(clusters, records, contents, config)
        paths = _write(output, rejects, config)
        counts.update(records=len(records), groups=len(groups), clusters=len(clusters))
        return output, paths

    (output, paths), parsing_time_s = time_parse(parse)

    num_bands: int | None = None
    rows_per_band: int | None = None
    if config.jaccard_threshold < 1.0:
        num_bands, rows_per_band = optimize_bands(
            config.signature_length, config.jaccard_threshold
        )
    stats = RunStats(
        n_records=counts['records'],
        n_rejected=rejects.skipped,
        n_initial_groups=counts['groups'],
        n_clusters=counts['clusters'],
        n_templates=len(output.templates),
        parsing_time_s=parsing_time_s,
        num_bands=num_bands,
        rows_per_band=rows_per_band,
    )
    logger.info(
        'Parsed %d lines (%d rejected) into %d initial groups, %d clusters and '
        '%d templates in %.3f s.',
        stats.n_records,
        stats.n_rejected,
        stats.n_initial_groups,
        stats.n_clusters,
        stats.n_templates,
        parsing_time_s,
    )

    report: EvaluationReport | None = None
    if config.ground_truth is not None:
        report, path_report = _evaluate(output, config, parsing_time_s)
        paths = (*paths, path_report)
        logger.info('Evaluation results:\n%s', format_report(report))

    return PipelineResult(output=output, report=report, stats=stats, paths=paths)


@pipeline_stage('evaluate')
def evaluate_outputs(
    structured: str | Path,
    ground_truth: str | Path,
    dataset: str,
    output_dir: str | Path | None = None,
) -> EvaluationReport:
    """evaluate an existing structured result file without parsing again"""
    predicted = read_templates_csv(structured)
    truth = read_templates_csv(ground_truth)
    report = evaluate(predicted, truth, dataset, config={'structured': str(structured)})
    if output_dir is not None:
        write_report(report, output_dir)
    logger.info('Evaluation results:\n%s', format_report(report))

    return report


def _sweep_row(
    make_config: Callable[[], RunConfig],
) -> dict[str, Any]:
    row: dict[str, Any] = dict.fromkeys(SWEEP_METRIC_COLUMNS)
    try:
        result = run_pipeline(make_config())
    except LogLSHDError as error:
        logger.warning('Sweep run failed: %s', error)
        row['error'] = str(error)
        return row

    row.update(
        parsing_time_s=result.stats.parsing_time_s,
        n_initial_groups=result.stats.n_initial_groups,
        n_clusters=result.stats.n_clusters,
        n_templates=result.stats.n_templates,
    )
    if result.report is not None:
        row.update(
            GA=result.report.ga,
            PA=result.report.pa,
            FGA=result.report.fga,
            FTA=result.report.fta,
        )
    return row


def _write_sweep(
    table: pd.DataFrame,
    config: RunConfig,
    kind: str,
) -> Path:
    path = config.output_dir / f'{config.dataset}_{kind}_sweep.csv'
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(path, index=False, encoding='utf-8', lineterminator='\n')
    except OSError as error:
        raise PipelineStageError('write', error) from error
    logger.info('Sweep table saved to %s.', path)

    return path


def sweep_thresholds(
    config: RunConfig,
    thresholds: Iterable[float] = SWEEP_THRESHOLDS,
) -> pd.DataFrame:
    """one full run per Jaccard threshold with otherwise identical settings

    Every run writes into its own sub-directory of the output directory, the
    table is saved as ``<dataset>_threshold_sweep.csv``. Failed runs are
    recorded in the ``error`` column.
    """
    rows: list[dict[str, Any]] = []
    for threshold in thresholds:
        logger.info('Threshold sweep: T=%.2f', threshold)
        make_config = functools.partial(
            dataclasses.replace,
            config,
            jaccard_threshold=threshold,
            output_dir=config.output_dir / f'threshold_{threshold:.2f}',
        )
        rows.append({'threshold': threshold, **_sweep_row(make_config)})

    table = pd.DataFrame(rows, columns=['threshold', *SWEEP_METRIC_COLUMNS])
    _write_sweep(table, config, 'threshold')

    return table


def sweep_strategies(
    config: RunConfig,
    strategies: Iterable[str | GroupingStrategy] = SWEEP_STRATEGIES,
) -> pd.DataFrame:
    """one full run per initial grouping strategy with otherwise identical
    settings, saved as ``<dataset>_strategy_sweep.csv``"""
    rows: list[dict[str, Any]] = []
    for strategy in strategies:
        name = strategy if isinstance(strategy, str) else strategy.spec
        logger.info('Strategy sweep: %s', name)

        def make_config(strategy: str | GroupingStrategy = strategy) -> RunConfig:
            if isinstance(strategy, str):
                strategy = parse_strategy(strategy)
            return dataclasses.replace(
                config,
                strategy=strategy,
                output_dir=config.output_dir / f'strategy_{strategy.spec.replace("+", "_")}',
            )

        rows.append({'strategy': name, **_sweep_row(make_config)})

    table = pd.DataFrame(rows, columns=['strategy', *SWEEP_METRIC_COLUMNS])
    _write_sweep(table, config, 'strategy')

    return table
