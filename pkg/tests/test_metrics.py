import random
import time

import pandas as pd
import pytest

from loglshd.errors import CoverageMismatchError
from loglshd.metrics import (
    evaluate,
    fga,
    format_report,
    fta,
    grouping_accuracy,
    normalize_template,
    parsing_accuracy,
    template_density,
    time_parse,
    write_report,
)
from loglshd.types import StructuredOutput


def _labels(groups: list[list[int]], names: list[str] | None = None) -> dict[int, str]:
    if names is None:
        names = [f'group {idx}' for idx in range(len(groups))]
    return {line_id: name for members, name in zip(groups, names) for line_id in members}


def test_ga_identical():
    truth = _labels([[1, 2], [3, 4]])
    assert grouping_accuracy(truth, truth) == 1.0


def test_ga_single_predicted_group():
    truth = _labels([[1, 2], [3, 4]])
    predicted = _labels([[1, 2, 3, 4]])
    assert grouping_accuracy(predicted, truth) == 0.0


def test_ga_partial():
    truth = _labels([[1, 2], [3, 4], [5]])
    predicted = _labels([[1, 2], [3], [4, 5]])
    assert grouping_accuracy(predicted, truth) == pytest.approx(2 / 5)


def test_pa():
    truth = {idx: 'Found block <*> locally' for idx in range(1, 11)}
    assert parsing_accuracy(truth, truth) == 1.0
    predicted = dict(truth)
    for idx in (2, 5, 9):
        predicted[idx] = 'Found <*>'
    assert parsing_accuracy(predicted, truth) == pytest.approx(0.7)


def test_pa_normalises_whitespace():
    predicted = {1: ' Found  block <*>\tlocally'}
    assert parsing_accuracy(predicted, {1: 'Found block <*> locally'}) == 1.0


def test_fga_examples():
    truth = _labels([[1, 2], [3, 4]])
    assert fga(truth, truth) == (1.0, 1.0, 1.0)

    pga, rga, f1 = fga(_labels([[1, 2], [3], [4]]), truth)
    assert pga == pytest.approx(1 / 3)
    assert rga == pytest.approx(1 / 2)
    assert f1 == pytest.approx(0.4)

    assert fga(_labels([[1, 3], [2, 4]]), truth) == (0.0, 0.0, 0.0)


def test_fta_examples():
    groups = [[1, 2], [3, 4]]
    truth = _labels(groups, ['open <*>', 'close <*>'])
    assert fta(truth, truth) == (1.0, 1.0, 1.0)

    predicted = _labels(groups, ['open <*>', 'close file'])
    pta, rta, f1 = fta(predicted, truth)
    assert (pta, rta) == (0.5, 0.5)
    assert f1 == pytest.approx(0.5)

    assert fta(_labels([[1, 3], [2, 4]], ['open <*>', 'close <*>']), truth) == (
        0.0,
        0.0,
        0.0,
    )


def test_ga_ignores_template_strings():
    groups = [[1, 4], [2], [3, 5, 6]]
    truth = _labels([[1, 4], [2, 3], [5, 6]])
    first = _labels(groups, ['a', 'b', 'c'])
    second = _labels(groups, ['c', 'a', 'b'])
    assert grouping_accuracy(first, truth) == grouping_accuracy(second, truth)
    assert fga(first, truth) == fga(second, truth)


@pytest.mark.parametrize('metric', [grouping_accuracy, parsing_accuracy, fga, fta])
def test_coverage_mismatch(metric):
    with pytest.raises(CoverageMismatchError):
        metric({1: 'a', 2: 'b'}, {1: 'a', 3: 'b'})
    with pytest.raises(CoverageMismatchError):
        metric({}, {})


# independent reference: groups as explicit member sets


def _members(labels: dict[int, str]) -> dict[str, frozenset[int]]:
    groups: dict[str, set[int]] = {}
    for line_id, label in labels.items():
        groups.setdefault(label, set()).add(line_id)
    return {label: frozenset(members) for label, members in groups.items()}


def _harmonic(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2.0 * p * r / (p + r)


def _reference(predicted: dict[int, str], truth: dict[int, str]):
    pred_groups = _members(predicted)
    truth_groups = _members(truth)
    n = len(truth)

    ga = sum(pred_groups[predicted[idx]] == truth_groups[truth[idx]] for idx in truth) / n
    pa = sum(predicted[idx] == truth[idx] for idx in truth) / n

    truth_sets = set(truth_groups.values())
    correct_groups = sum(members in truth_sets for members in pred_groups.values())
    pga = correct_groups / len(pred_groups)
    rga = correct_groups / len(truth_groups)

    correct_templates = sum(
        truth_groups.get(label) == members for label, members in pred_groups.items()
    )
    pta = correct_templates / len(pred_groups)
    rta = correct_templates / len(truth_groups)

    return ga, pa, (pga, rga, _harmonic(pga, rga)), (pta, rta, _harmonic(pta, rta))


def test_metrics_match_reference():
    rng = random.Random(21)
    names = [f'tpl {idx} <*>' for idx in range(8)]
    for _ in range(200):
        n = rng.randint(1, 50)
        n_truth = rng.randint(1, 8)
        truth = {idx: rng.choice(names[:n_truth]) for idx in range(1, n + 1)}
        if rng.random() < 0.5:
            # perturb a copy of the truth
            predicted = dict(truth)
            for idx in rng.sample(sorted(truth), rng.randint(0, n)):
                predicted[idx] = rng.choice(names)
        else:
            predicted = {idx: rng.choice(names) for idx in truth}

        ga, pa, fga_ref, fta_ref = _reference(predicted, truth)
        assert grouping_accuracy(predicted, truth) == ga
        assert parsing_accuracy(predicted, truth) == pa
        assert fga(predicted, truth) == fga_ref
        assert fta(predicted, truth) == fta_ref


@pytest.mark.parametrize(
    ('n_templates', 'n_logs', 'density'),
    [(11, 21320, 0.516), (338, 23921, 14.130), (1, 1000, 1.0)],
)
def test_template_density(n_templates, n_logs, density):
    assert template_density(n_templates, n_logs) == pytest.approx(density, abs=5e-4)


def test_template_density_no_logs():
    with pytest.raises(ValueError):
        template_density(3, 0)


def test_normalize_template():
    assert normalize_template('  a\t <*>\n b ') == 'a <*> b'


def test_time_parse():
    result, elapsed = time_parse(lambda: time.sleep(0.01) or 'done')
    assert result == 'done'
    assert elapsed >= 0.01


def _structured(templates: list[str]) -> StructuredOutput:
    rows = pd.DataFrame(
        {
            'LineId': range(1, len(templates) + 1),
            'Content': templates,
            'EventId': templates,
            'EventTemplate': templates,
        }
    )
    inventory = rows.groupby(['EventId', 'EventTemplate'], sort=False).size()
    return StructuredOutput(rows=rows, templates=inventory.reset_index(name='Occurrences'))


def test_evaluate_report(tmp_path):
    predicted = _structured(['open <*>', 'open <*>', 'close  x'])
    truth = pd.Series(['open <*>', 'open <*>', 'close <*>'], index=[1, 2, 3])
    report = evaluate(predicted, truth, 'demo', parsing_time_s=0.5, config={'seed': 0})
    assert report.ga == 1.0
    assert report.pa == pytest.approx(2 / 3)
    assert report.fga == 1.0
    assert (report.pta, report.rta) == (0.5, 0.5)
    assert report.n_logs == 3
    assert report.n_predicted_templates == report.n_truth_templates == 2
    assert report.template_density == pytest.approx(2 / 3 * 1000)

    text = format_report(report)
    assert 'demo' in text
    assert '0.500' in text

    path = write_report(report, tmp_path)
    assert path.name == 'demo_report.csv'
    (row,) = pd.read_csv(path).to_dict('records')
    assert row['dataset'] == 'demo'
    assert row['config.seed'] == 0
    assert row['parsing_time_s'] == 0.5
