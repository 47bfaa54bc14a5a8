import string
from pathlib import Path
from typing import Final

import numpy as np
import pandas as pd

from loglshd.constants import PLACEHOLDER
from loglshd.errors import OutputWriteError
from loglshd.loggers import synthetic as logger
from loglshd.parsing import STRUCTURED_COLUMNS
from loglshd.types import Alphabet, SyntheticSpec, event_id_of

SYNTHETIC_HEADER_FORMAT: Final[str] = '<Date> <Time> <Level> <Content>'
SYNTHETIC_CONTENT_FORMAT: Final[str] = '<Content>'
SYNTHETIC_DATE: Final[str] = '2024-01-01'
SYNTHETIC_LEVELS: Final[tuple[str, ...]] = ('INFO', 'WARN', 'DEBUG')

_LETTERS: Final[np.ndarray] = np.array(list(string.ascii_lowercase))


def synthetic_log_format(
    spec: SyntheticSpec,
) -> str:
    return SYNTHETIC_HEADER_FORMAT if spec.with_header else SYNTHETIC_CONTENT_FORMAT


def _words(
    rng: np.random.Generator,
    n: int,
    min_len: int,
    max_len: int,
) -> list[str]:
    lengths = rng.integers(min_len, max_len + 1, size=n)
    letters = _LETTERS[rng.integers(0, len(_LETTERS), size=(n, max_len))]
    return [''.join(row[:length]) for row, length in zip(letters, lengths)]


def _static_vocabulary(
    rng: np.random.Generator,
    n: int,
) -> list[str]:
    # distinct words, so templates share no static token
    vocabulary: dict[str, None] = {}
    while len(vocabulary) < n:
        for word in _words(rng, n - len(vocabulary), 3, 8):
            vocabulary.setdefault(word, None)

    return list(vocabulary)


def _mixed_values(
    rng: np.random.Generator,
    n: int,
) -> list[str]:
    """numbers, hex codes, identifiers and decimals, each containing digits"""
    kinds = rng.integers(0, 4, size=n)
    numbers = rng.integers(0, 1_000_000, size=n)
    decimals = rng.random(size=n) * 1000.0
    values: list[str] = []
    for kind, number, decimal in zip(kinds, numbers, decimals):
        if kind == 0:
            values.append(str(number))
        elif kind == 1:
            values.append(f'0x{number:x}')
        elif kind == 2:
            values.append(f'id_{number}')
        else:
            values.append(f'{decimal:.2f}')

    return values


def _alphabetic_values(
    rng: np.random.Generator,
    n: int,
    vocabulary: set[str],
) -> list[str]:
    values = _words(rng, n, 4, 9)
    return [value if value not in vocabulary else f'{value}x' for value in values]


def _value_pool(
    rng: np.random.Generator,
    size: int,
    alphabet: Alphabet,
    vocabulary: set[str],
) -> list[str]:
    pool: dict[str, None] = {}
    while len(pool) < size:
        idx = len(pool)
        if alphabet == 'alphabetic':
            # neighbouring pool values differ in length
            length = 4 + idx % 8
            (value,) = _words(rng, 1, length, length)
            if value in vocabulary:
                continue
        else:
            (value,) = _mixed_values(rng, 1)
        pool.setdefault(value, None)

    return list(pool)


def _draw_values(
    rng: np.random.Generator,
    n: int,
    spec: SyntheticSpec,
    vocabulary: set[str],
) -> list[str]:
    if spec.value_pool is not None:
        pool = _value_pool(rng, spec.value_pool, spec.alphabet, vocabulary)
        return [pool[idx] for idx in rng.integers(0, len(pool), size=n)]
    elif spec.alphabet == 'alphabetic':
        return _alphabetic_values(rng, n, vocabulary)
    else:
        return _mixed_values(rng, n)


def _header(
    idx: int,
) -> str:
    time = f'{(idx // 3600) % 24:02d}:{(idx // 60) % 60:02d}:{idx % 60:02d}'
    return f'{SYNTHETIC_DATE} {time} {SYNTHETIC_LEVELS[idx % len(SYNTHETIC_LEVELS)]}'


def generate_synthetic(
    spec: SyntheticSpec,
    dir: str | Path,
    name: str = 'synthetic',
) -> tuple[Path, Path]:
    """write a log file with exactly known templates and its ground truth

    Each template consists of ``static_words`` letter-only words, distinct across
    templates, with ``variable_slots`` variables inserted at distinct gaps, so two
    variables are never adjacent. Lines of all templates are shuffled.

    Parameters
    ----------
    spec : SyntheticSpec
        corpus parameters including the seed
    dir : str | Path
        output directory
    name : str, optional
        file name stem, by default 'synthetic'

    Returns
    -------
    tuple[Path, Path]
        ``<name>.log`` and the ground truth ``<name>.log_structured.csv``
    """
    if isinstance(dir, str):
        dir = Path(dir)
    rng = np.random.default_rng(spec.seed)

    vocabulary = _static_vocabulary(rng, spec.n_templates * spec.static_words)
    taken = set(vocabulary)
    contents: list[str] = []
    templates: list[str] = []
    for template_idx in range(spec.n_templates):
        words = vocabulary[
            template_idx * spec.static_words : (template_idx + 1) * spec.static_words
        ]
        slots = {
            int(gap)
            for gap in rng.choice(
                spec.static_words + 1, size=spec.variable_slots, replace=False
            )
        }
        n_logs = spec.logs_per_template
        values = [_draw_values(rng, n_logs, spec, taken) for _ in range(spec.variable_slots)]

        template_tokens: list[str] = []
        # static word or index of the variable slot
        layout: list[str | int] = []
        slot_idx = 0
        for gap in range(spec.static_words + 1):
            if gap in slots:
                template_tokens.append(PLACEHOLDER)
                layout.append(slot_idx)
                slot_idx += 1
            if gap < spec.static_words:
                template_tokens.append(words[gap])
                layout.append(words[gap])
        template = ' '.join(template_tokens)
        templates.extend([template] * n_logs)
        for log_idx in range(n_logs):
            contents.append(
                ' '.join(
                    token if isinstance(token, str) else values[token][log_idx]
                    for token in layout
                )
            )
        logger.debug('Template %d: %s', template_idx, template)

    order = rng.permutation(len(contents))
    contents = [contents[idx] for idx in order]
    templates = [templates[idx] for idx in order]
    if spec.with_header:
        lines = [f'{_header(idx)} {content}' for idx, content in enumerate(contents)]
    else:
        lines = contents

    event_ids = {template: event_id_of(template) for template in set(templates)}
    path_log = dir / f'{name}.log'
    path_truth = dir / f'{name}.log_structured.csv'
    truth = pd.DataFrame(
        {
            'LineId': np.arange(1, len(contents) + 1),
            'Content': contents,
            'EventId': [event_ids[template] for template in templates],
            'EventTemplate': templates,
        },
        columns=list(STRUCTURED_COLUMNS),
    )
    try:
        dir.mkdir(parents=True, exist_ok=True)
        with open(path_log, 'w', encoding='utf-8', newline='\n') as file:
            file.writelines(f'{line}\n' for line in lines)
        truth.to_csv(path_truth, index=False, encoding='utf-8', lineterminator='\n')
    except OSError as error:
        raise OutputWriteError(
            f'Cannot write synthetic corpus to >>{dir}<<: {error}'
        ) from error

    logger.info(
        'Synthetic corpus with %d templates and %d lines saved to %s.',
        spec.n_templates,
        len(lines),
        path_log,
    )

    return path_log, path_truth
