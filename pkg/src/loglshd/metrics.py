import time
from collections.abc import Callable, Hashable, Mapping
from pathlib import Path
from typing import Any, TypeAlias, TypeVar

import pandas as pd

from loglshd.errors import CoverageMismatchError, OutputWriteError
from loglshd.loggers import metrics as logger
from loglshd.types import EvaluationReport, LineId, StructuredOutput

T = TypeVar('T')

# line ID -> group label or template string
Labels: TypeAlias = Mapping[LineId, Hashable] | pd.Series


def normalize_template(
    text: str,
) -> str:
    """collapse internal whitespace runs to single spaces and trim the ends"""
    return ' '.join(str(text).split())


def _as_series(
    labels: Labels,
    name: str,
) -> pd.Series:
    if isinstance(labels, pd.Series):
        series = labels.copy()
    else:
        series = pd.Series(dict(labels), dtype=object)
    series.name = name
    if not series.index.is_unique:
        raise CoverageMismatchError(f'Duplicate line IDs in {name} labels')
    return series


def _aligned(
    predicted: Labels,
    truth: Labels,
) -> pd.DataFrame:
    pred = _as_series(predicted, 'predicted')
    true = _as_series(truth, 'truth')
    if not pred.index.sort_values().equals(true.index.sort_values()):
        only_pred = pred.index.difference(true.index)
        only_truth = true.index.difference(pred.index)
        raise CoverageMismatchError(
            'Predictions and ground truth cover different lines: '
            f'{len(only_pred)} only predicted, {len(only_truth)} only in ground truth'
        )
    if pred.empty:
        raise CoverageMismatchError('No lines to evaluate')

    return pd.DataFrame({'pred': pred, 'truth': true.reindex(pred.index)})


def _truth_groups(
    frame: pd.DataFrame,
) -> pd.DataFrame:
    """per truth group: size, the predicted label of its first member and whether
    exactly the same lines form a predicted group"""
    stats = frame.groupby('truth', sort=False, dropna=False)['pred'].agg(
        ['nunique', 'first', 'size']
    )
    pred_sizes = frame['pred'].value_counts(dropna=False)
    same_size = pred_sizes.reindex(stats['first']).to_numpy() == stats['size'].to_numpy()
    stats['correct'] = (stats['nunique'] == 1).to_numpy() & same_size

    return stats


def _harmonic_mean(
    precision: float,
    recall: float,
) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def grouping_accuracy(
    predicted: Labels,
    truth: Labels,
) -> float:
    """share of lines whose predicted group has exactly the members of their
    ground-truth group"""
    frame = _aligned(predicted, truth)
    stats = _truth_groups(frame)
    correct = int(stats.loc[stats['correct'], 'size'].sum())

    return correct / len(frame)


def parsing_accuracy(
    predicted: Labels,
    truth: Labels,
) -> float:
    """share of lines whose template equals the ground-truth template after
    whitespace normalisation"""
    frame = _aligned(predicted, truth)
    matches = frame['pred'].map(normalize_template) == frame['truth'].map(normalize_template)

    return int(matches.sum()) / len(frame)


def fga(
    predicted: Labels,
    truth: Labels,
) -> tuple[float, float, float]:
    frame = _aligned(predicted, truth)
    stats = _truth_groups(frame)
    correct = int(stats['correct'].sum())
    pga = correct / frame['pred'].nunique(dropna=False)
    rga = correct / len(stats)

    return pga, rga, _harmonic_mean(pga, rga)


def fta(
    predicted: Labels,
    truth: Labels,
) -> tuple[float, float, float]:
    """template-level precision, recall and F1

    Both sides are grouped by their normalised template strings. A predicted
    template counts as correct if its lines form exactly one ground-truth group
    and its string equals that group's template.
    """
    frame = _aligned(predicted, truth)
    frame = frame.apply(lambda column: column.map(normalize_template))
    stats = _truth_groups(frame)
    correct = int((stats['correct'] & (stats['first'] == stats.index.to_series())).sum())
    pta = correct / frame['pred'].nunique()
    rta = correct / len(stats)

    return pta, rta, _harmonic_mean(pta, rta)


def template_density(
    n_templates: int,
    n_logs: int,
) -> float:
    """templates per thousand logs"""
    if n_logs <= 0:
        raise ValueError(f'Template density needs at least one log, got {n_logs}')
    return n_templates / n_logs * 1000.0


def time_parse(
    run: Callable[[], T],
) -> tuple[T, float]:
    """call ``run`` and measure its wall time on the monotonic clock

    Returns
    -------
    tuple[T, float]
        the result of the call and the elapsed seconds
    """
    start = time.perf_counter()
    result = run()
    elapsed = time.perf_counter() - start

    return result, elapsed


def evaluate(
    predicted: StructuredOutput | pd.Series,
    truth: pd.Series,
    dataset: str,
    parsing_time_s: float | None = None,
    config: Mapping[str, Any] | None = None,
) -> EvaluationReport:
    """compute the full evaluation suite of a parsing result

    Parameters
    ----------
    predicted : StructuredOutput | pd.Series
        parsing result or its templates indexed by line ID
    truth : pd.Series
        ground-truth templates indexed by line ID
    dataset : str
        name reported with the metrics
    parsing_time_s : float | None, optional
        measured parsing time, by default None
    config : Mapping[str, Any] | None, optional
        parameters of the run, echoed into the report, by default None

    Returns
    -------
    EvaluationReport
        all metrics, group counts and template densities
    """
    if isinstance(predicted, StructuredOutput):
        predicted = pd.Series(
            predicted.rows['EventTemplate'].to_numpy(),
            index=pd.Index(predicted.rows['LineId'], name='LineId'),
        )
    # templates define the groups on both sides
    pred = predicted.map(normalize_template)
    true = truth.map(normalize_template)

    ga = grouping_accuracy(pred, true)
    pa = parsing_accuracy(pred, true)
    pga, rga, f_ga = fga(pred, true)
    pta, rta, f_ta = fta(pred, true)
    n_logs = len(pred)
    n_predicted = pred.nunique()
    n_truth = true.nunique()

    report = EvaluationReport(
        dataset=dataset,
        ga=ga,
        pa=pa,
        pga=pga,
        rga=rga,
        fga=f_ga,
        pta=pta,
        rta=rta,
        fta=f_ta,
        parsing_time_s=parsing_time_s,
        n_logs=n_logs,
        n_predicted_templates=n_predicted,
        n_truth_templates=n_truth,
        template_density=template_density(n_predicted, n_logs),
        truth_template_density=template_density(n_truth, n_logs),
        config=dict(config) if config is not None else {},
    )
    logger.info(
        'Evaluation of >>%s<<: GA %.4f, PA %.4f, FGA %.4f, FTA %.4f',
        dataset,
        ga,
        pa,
        f_ga,
        f_ta,
    )

    return report


def report_table(
    reports: list[EvaluationReport],
) -> pd.DataFrame:
    return pd.DataFrame([report.as_row() for report in reports])


def format_report(
    report: EvaluationReport,
) -> str:
    table = report_table([report])
    columns = ['dataset', 'ga', 'pa', 'fga', 'fta', 'parsing_time_s', 'n_logs']
    columns.extend(('n_predicted_templates', 'n_truth_templates', 'template_density'))
    return table.loc[:, columns].to_string(index=False, float_format=lambda x: f'{x:.3f}')


def write_report(
    report: EvaluationReport,
    dir: str | Path,
) -> Path:
    if isinstance(dir, str):
        dir = Path(dir)
    path = dir / f'{report.dataset}_report.csv'
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        report_table([report]).to_csv(
            path, index=False, encoding='utf-8', lineterminator='\n'
        )
    except OSError as error:
        raise OutputWriteError(f'Cannot write >>{path}<<: {error}') from error
    logger.info('Evaluation report saved to %s.', path)

    return path
