import re
import tomllib
from collections.abc import Iterable
from importlib import resources
from pathlib import Path
from typing import Any, cast

import pandas as pd

from loglshd.constants import CONTENT_FIELD, PLACEHOLDER, PRESETS
from loglshd.errors import (
    ConfigurationError,
    CorpusReadError,
    LogFormatError,
    OutputWriteError,
    PreprocessRuleError,
)
from loglshd.loggers import parsing as logger
from loglshd.types import (
    EMPTY_HEADERS,
    DatasetSettings,
    LineId,
    LogFormat,
    LogRecord,
    MismatchPolicy,
    PreprocessRule,
    RejectsReport,
    StructuredOutput,
)

STRUCTURED_COLUMNS: tuple[str, ...] = ('LineId', 'Content', 'EventId', 'EventTemplate')
TEMPLATE_COLUMNS: tuple[str, ...] = ('EventId', 'EventTemplate', 'Occurrences')


def compile_log_format(
    pattern: str,
    content_field: str = CONTENT_FIELD,
) -> LogFormat:
    """build the line pattern of a benchmark-style log format

    Literal text between the ``<Field>`` markers is used as a regular-expression
    fragment, runs of spaces match any whitespace run. Every field captures lazily,
    the whole line has to match.

    Parameters
    ----------
    pattern : str
        log format such as ``<Date> <Time> <Level> <Content>``
    content_field : str, optional
        name of the field holding the log message, by default 'Content'

    Returns
    -------
    LogFormat
        compiled format

    Raises
    ------
    LogFormatError
        no fields, duplicate field names, missing content field or an invalid fragment
    """
    splitters = re.split(r'(<[^<>]+>)', pattern)
    fields: list[str] = []
    separators: list[str] = []
    regex = ''
    for idx, splitter in enumerate(splitters):
        if idx % 2 == 0:
            fragment = re.sub(' +', r'\\s+', splitter)
            separators.append(fragment)
            regex += fragment
        else:
            name = splitter.strip('<').strip('>')
            if not name.isidentifier():
                raise LogFormatError(f'Invalid field name >>{name}<< in >>{pattern}<<')
            fields.append(name)
            regex += f'(?P<{name}>.*?)'

    if not fields:
        raise LogFormatError(f'Format >>{pattern}<< does not define any field')
    if len(set(fields)) != len(fields):
        raise LogFormatError(f'Field names must be unique, got: >>{pattern}<<')

    try:
        compiled = re.compile(regex)
    except re.error as error:
        raise LogFormatError(
            f'Format >>{pattern}<< is not a valid pattern: {error}'
        ) from error

    return LogFormat(
        pattern=pattern,
        fields=tuple(fields),
        separators=tuple(separators),
        content_field=content_field,
        regex=compiled,
    )


def compile_rules(
    patterns: Iterable[str],
) -> tuple[PreprocessRule, ...]:
    rules: list[PreprocessRule] = []
    for pattern in patterns:
        try:
            compiled = re.compile(pattern)
        except re.error as error:
            raise PreprocessRuleError(
                f'Preprocessing rule >>{pattern}<< does not compile: {error}'
            ) from error
        rules.append(PreprocessRule(pattern=pattern, regex=compiled))

    return tuple(rules)


def _decode(
    raw: bytes,
    line_number: int,
    rejects: RejectsReport,
) -> str:
    try:
        return raw.decode('utf-8')
    except UnicodeDecodeError:
        rejects.replaced_encoding += 1
        rejects.add(line_number, 'invalid UTF-8 bytes replaced')
        return raw.decode('utf-8', errors='replace')


def _split_line(
    line: str,
    log_format: LogFormat,
) -> tuple[dict[str, str], str, tuple[str, ...]] | None:
    match = log_format.regex.fullmatch(line)
    if match is None:
        return None

    headers: dict[str, str] = {}
    separators: list[str] = []
    content = ''
    pos = 0
    for name in log_format.fields:
        start, end = match.span(name)
        if start < 0:
            # field inside an optional fragment which did not participate
            value = ''
            separators.append('')
        else:
            value = line[start:end]
            separators.append(line[pos:start])
            pos = end
        if name == log_format.content_field:
            content = value
        else:
            headers[name] = value
    separators.append(line[pos:])

    return headers, content, tuple(separators)


def parse_log_file(
    path: str | Path,
    log_format: LogFormat,
    on_mismatch: MismatchPolicy = 'skip',
    rejects: RejectsReport | None = None,
) -> list[LogRecord]:
    """read a raw log file line by line and split each line into header fields
    and content

    Line IDs enumerate the accepted records starting at 1 in file order. Lines
    not matching the format are recorded in the rejects report by their physical
    line number and either skipped or passed on with the whole line as content.

    Parameters
    ----------
    path : str | Path
        raw log file
    log_format : LogFormat
        compiled log format
    on_mismatch : MismatchPolicy, optional
        treatment of lines not matching the format, by default 'skip'
    rejects : RejectsReport | None, optional
        report which is filled inplace, by default None

    Returns
    -------
    list[LogRecord]
        accepted records in file order

    Raises
    ------
    CorpusReadError
        file does not exist or cannot be read
    """
    if isinstance(path, str):
        path = Path(path)
    if rejects is None:
        rejects = RejectsReport()

    records: list[LogRecord] = []
    line_id = 0
    line_number = 0
    try:
        with open(path, 'rb') as file:
            for line_number, raw in enumerate(file, start=1):
                line = _decode(raw.rstrip(b'\r\n'), line_number, rejects)
                parts = _split_line(line, log_format)
                if parts is None:
                    if on_mismatch == 'whole-line' and line:
                        rejects.passed_through += 1
                        rejects.add(
                            line_number, 'format mismatch, whole line used as content'
                        )
                        headers, content, separators = EMPTY_HEADERS, line, ()
                    else:
                        rejects.skipped += 1
                        rejects.add(line_number, 'format mismatch')
                        continue
                else:
                    headers, content, separators = parts
                    if not content:
                        rejects.skipped += 1
                        rejects.add(line_number, 'empty content')
                        continue

                line_id += 1
                records.append(
                    LogRecord(
                        line_id=LineId(line_id),
                        header_values=headers or EMPTY_HEADERS,
                        content=content,
                        separators=separators,
                    )
                )
    except OSError as error:
        raise CorpusReadError(f'Cannot read log file >>{path}<<: {error}') from error

    if rejects.skipped or rejects.passed_through:
        logger.warning(
            '%d of %d lines did not match the format (skipped: %d, passed through: %d)',
            rejects.skipped + rejects.passed_through,
            line_number,
            rejects.skipped,
            rejects.passed_through,
        )
    if rejects.replaced_encoding:
        logger.warning('%d lines contained invalid UTF-8 bytes', rejects.replaced_encoding)
    logger.info('Reading completed. Records accepted: %d of %d lines', line_id, line_number)

    return records


def preprocess(
    content: str,
    rules: Iterable[PreprocessRule],
) -> str:
    for rule in rules:
        content = rule.regex.sub(PLACEHOLDER, content)
    return content


def _write_frame(
    frame: pd.DataFrame,
    path: Path,
) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, encoding='utf-8', lineterminator='\n')
    except OSError as error:
        raise OutputWriteError(f'Cannot write >>{path}<<: {error}') from error


def write_structured(
    output: StructuredOutput,
    dir: str | Path,
    dataset_name: str,
) -> tuple[Path, Path]:
    if isinstance(dir, str):
        dir = Path(dir)
    path_structured = dir / f'{dataset_name}_structured.csv'
    path_templates = dir / f'{dataset_name}_templates.csv'

    _write_frame(output.rows.loc[:, list(STRUCTURED_COLUMNS)], path_structured)
    _write_frame(output.templates.loc[:, list(TEMPLATE_COLUMNS)], path_templates)
    logger.info('Structured output saved to %s and %s.', path_structured, path_templates)

    return path_structured, path_templates


def write_rejects(
    rejects: RejectsReport,
    dir: str | Path,
    dataset_name: str,
) -> Path:
    if isinstance(dir, str):
        dir = Path(dir)
    path = dir / f'{dataset_name}_rejects.txt'
    lines = [f'{entry.line_number}\t{entry.reason}\n' for entry in rejects.entries]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as file:
            file.writelines(lines)
    except OSError as error:
        raise OutputWriteError(f'Cannot write >>{path}<<: {error}') from error

    return path


def read_templates_csv(
    path: str | Path,
) -> pd.Series:
    """read the ``EventTemplate`` column of a structured CSV file, either a ground
    truth file or a parsing result, indexed by line ID

    Files without a ``LineId`` column are numbered in row order starting at 1.
    """
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except (OSError, pd.errors.ParserError) as error:
        raise CorpusReadError(f'Cannot read structured file >>{path}<<: {error}') from error

    if 'EventTemplate' not in df.columns:
        raise CorpusReadError(f'Structured file >>{path}<< has no EventTemplate column')
    if 'LineId' in df.columns:
        index = pd.Index(df['LineId'].astype(int), name='LineId')
    else:
        index = pd.RangeIndex(1, len(df) + 1, name='LineId')

    return pd.Series(df['EventTemplate'].to_numpy(), index=index, name='EventTemplate')


def _dataset_settings(
    name: str,
    table: Any,
    source: str,
) -> DatasetSettings:
    if not isinstance(table, dict):
        raise ConfigurationError(f'Dataset >>{name}<< in {source} is not a table')
    settings: dict[str, Any] = {}
    if 'log_format' in table:
        if not isinstance(table['log_format'], str):
            raise ConfigurationError(f'log_format of >>{name}<< in {source} must be a string')
        settings['log_format'] = table['log_format']
    if 'regex' in table:
        regex = table['regex']
        if not isinstance(regex, list) or not all(isinstance(x, str) for x in regex):
            raise ConfigurationError(f'regex of >>{name}<< in {source} must be a string list')
        settings['regex'] = list(regex)
    if 'jaccard_threshold' in table:
        threshold = table['jaccard_threshold']
        if not isinstance(threshold, int | float) or not 0.0 < threshold <= 1.0:
            raise ConfigurationError(
                f'jaccard_threshold of >>{name}<< in {source} must be in (0, 1]'
            )
        settings['jaccard_threshold'] = float(threshold)
    for key in ('log_file', 'ground_truth'):
        if key in table:
            settings[key] = str(table[key])

    return cast(DatasetSettings, settings)


def _parse_config(
    config: dict[str, Any],
    source: str,
) -> dict[str, DatasetSettings]:
    datasets = config.get('datasets', {})
    if not isinstance(datasets, dict):
        raise ConfigurationError(f'Section >>datasets<< in {source} is not a table')
    return {
        name: _dataset_settings(name, table, source) for name, table in datasets.items()
    }


def load_config(
    path: str | Path,
) -> dict[str, DatasetSettings]:
    if isinstance(path, str):
        path = Path(path)
    if not path.exists():
        raise ConfigurationError(f'Provided config path does not exist: >>{path}<<')

    try:
        with open(path, 'rb') as config_file:
            config = tomllib.load(config_file)
    except tomllib.TOMLDecodeError as error:
        raise ConfigurationError(
            f'Config file >>{path}<< is not valid TOML: {error}'
        ) from error

    return _parse_config(config, str(path))


def load_preset(
    name: str,
) -> dict[str, DatasetSettings]:
    if name not in PRESETS:
        raise ConfigurationError(f'Unknown preset >>{name}<<, available: {PRESETS}')
    preset = resources.files('loglshd.presets').joinpath(f'{name}.toml')
    with preset.open('rb') as config_file:
        config = tomllib.load(config_file)

    return _parse_config(config, f'preset {name}')
