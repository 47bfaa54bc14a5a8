from __future__ import annotations

import enum
import hashlib
import re
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Literal, NewType, NotRequired, TypeAlias, TypedDict

import numpy as np
import numpy.typing as npt
import pandas as pd

from loglshd.errors import ConfigurationError, GroupingStrategyError, LogFormatError


class LoggingLevels(enum.IntEnum):
    DEBUG = 10
    INFO = 20
    WARNING = 30
    ERROR = 40
    CRITICAL = 50


LineId = NewType('LineId', int)
GroupId: TypeAlias = LineId  # representative line of an initial group
ClusterId: TypeAlias = LineId  # smallest line contained in a cluster
EventId: TypeAlias = str
Token: TypeAlias = str
ShingleSet: TypeAlias = frozenset[str]
CharSequence: TypeAlias = npt.NDArray[np.int64]
CandidatePair: TypeAlias = tuple[GroupId, GroupId]
Position: TypeAlias = Literal['first', 'p25', 'p50', 'p75', 'last']
MismatchPolicy: TypeAlias = Literal['skip', 'whole-line']
Alphabet: TypeAlias = Literal['alphabetic', 'mixed']

POSITION_FRACTIONS: Mapping[Position, float] = MappingProxyType(
    {
        'first': 0.0,
        'p25': 0.25,
        'p50': 0.5,
        'p75': 0.75,
        'last': 1.0,
    }
)
EMPTY_HEADERS: Mapping[str, str] = MappingProxyType({})


# ** corpus


class DatasetSettings(TypedDict):
    log_format: NotRequired[str]
    regex: NotRequired[list[str]]
    jaccard_threshold: NotRequired[float]
    log_file: NotRequired[str]
    ground_truth: NotRequired[str]


@dataclass(frozen=True, kw_only=True, slots=True)
class LogFormat:
    pattern: str
    fields: tuple[str, ...]
    # regular-expression fragments before, between and after the fields
    separators: tuple[str, ...]
    content_field: str
    regex: re.Pattern[str] = field(compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(set(self.fields)) != len(self.fields):
            raise LogFormatError(f'Field names must be unique, got: >>{self.pattern}<<')
        if self.fields.count(self.content_field) != 1:
            raise LogFormatError(
                f'Format >>{self.pattern}<< needs exactly one >>{self.content_field}<< field'
            )

    @property
    def header_fields(self) -> tuple[str, ...]:
        return tuple(name for name in self.fields if name != self.content_field)


@dataclass(frozen=True, kw_only=True, slots=True)
class LogRecord:
    line_id: LineId
    header_values: Mapping[str, str]
    content: str
    # matched text around each field, len(fields) + 1 entries
    separators: tuple[str, ...] = ()

    def join(self, log_format: LogFormat) -> str:
        if not self.separators:
            return self.content
        parts: list[str] = []
        for sep, name in zip(self.separators, log_format.fields):
            parts.append(sep)
            if name == log_format.content_field:
                parts.append(self.content)
            else:
                parts.append(self.header_values.get(name, ''))
        parts.append(self.separators[-1])
        return ''.join(parts)


@dataclass(frozen=True, kw_only=True, slots=True)
class PreprocessRule:
    pattern: str
    regex: re.Pattern[str] = field(compare=False, repr=False)
    replacement: Literal['<*>'] = '<*>'


@dataclass(frozen=True, slots=True)
class Reject:
    line_number: int
    reason: str


@dataclass(kw_only=True, slots=True)
class RejectsReport:
    entries: list[Reject] = field(default_factory=list)
    skipped: int = 0
    passed_through: int = 0
    replaced_encoding: int = 0

    def add(self, line_number: int, reason: str) -> None:
        self.entries.append(Reject(line_number, reason))


class ContentStore(Mapping[LineId, str]):
    """read-only lookup of contents by line ID for contiguous IDs starting at 1"""

    __slots__ = ('_contents',)

    def __init__(self, contents: Sequence[str]) -> None:
        self._contents = contents

    def __getitem__(self, line_id: LineId) -> str:
        if line_id < 1:
            raise KeyError(line_id)
        try:
            return self._contents[line_id - 1]
        except IndexError:
            raise KeyError(line_id) from None

    def __iter__(self) -> Iterator[LineId]:
        return (LineId(idx) for idx in range(1, len(self._contents) + 1))

    def __len__(self) -> int:
        return len(self._contents)


@dataclass(frozen=True, kw_only=True, slots=True)
class StructuredOutput:
    # columns LineId, Content, EventId, EventTemplate
    rows: pd.DataFrame
    # columns EventId, EventTemplate, Occurrences
    templates: pd.DataFrame

    def validate(self) -> None:
        if not self.rows['LineId'].is_unique:
            raise ValueError('Line IDs in structured output are not unique')
        if int(self.templates['Occurrences'].sum()) != len(self.rows):
            raise ValueError('Template occurrences do not add up to the number of rows')
        missing = set(self.rows['EventId']) - set(self.templates['EventId'])
        if missing:
            raise ValueError(f'Event IDs without inventory entry: {sorted(missing)}')


# ** grouping


@dataclass(frozen=True, kw_only=True, slots=True)
class GroupingStrategy:
    use_token_count: bool = True
    use_content_length: bool = True
    positions: tuple[Position, ...] = ()

    def __post_init__(self) -> None:
        if not (self.use_token_count or self.use_content_length or self.positions):
            raise GroupingStrategyError('At least one grouping criterion must be enabled')
        unknown = [pos for pos in self.positions if pos not in POSITION_FRACTIONS]
        if unknown:
            raise GroupingStrategyError(f'Unknown positions: {unknown}')
        if len(set(self.positions)) != len(self.positions):
            raise GroupingStrategyError(f'Duplicate positions: {self.positions}')

    @property
    def spec(self) -> str:
        parts: list[str] = []
        if self.use_token_count and self.use_content_length:
            parts.append('base')
        elif self.use_token_count:
            parts.append('tokens')
        elif self.use_content_length:
            parts.append('length')
        parts.extend(self.positions)
        return '+'.join(parts)


@dataclass(frozen=True, kw_only=True, slots=True)
class GroupKey:
    token_count: int | None = None
    content_length: int | None = None
    position_chars: tuple[str, ...] | None = None


@dataclass(frozen=True, kw_only=True, slots=True)
class InitialGroup:
    key: GroupKey
    member_ids: tuple[LineId, ...]

    @property
    def representative_id(self) -> LineId:
        return self.member_ids[0]

    @property
    def group_id(self) -> GroupId:
        return self.representative_id


# ** clustering


@dataclass(frozen=True, slots=True, eq=False)
class MinHashSignature:
    values: npt.NDArray[np.uint64]

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MinHashSignature):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    def __hash__(self) -> int:
        return hash(self.values.tobytes())


@dataclass(frozen=True, kw_only=True, slots=True)
class Cluster:
    cluster_id: ClusterId
    member_group_ids: tuple[GroupId, ...]
    all_line_ids: tuple[LineId, ...]


# ** extraction


@dataclass(frozen=True, slots=True)
class AlignmentPath:
    steps: tuple[tuple[int, int], ...]
    cost: int


def event_id_of(text: str) -> EventId:
    return hashlib.md5(text.encode('utf-8')).hexdigest()[:8]


@dataclass(frozen=True, slots=True)
class Template:
    text: str

    @property
    def event_id(self) -> EventId:
        return event_id_of(self.text)


# ** evaluation


@dataclass(frozen=True, kw_only=True, slots=True)
class EvaluationReport:
    dataset: str
    ga: float
    pa: float
    pga: float
    rga: float
    fga: float
    pta: float
    rta: float
    fta: float
    parsing_time_s: float | None
    n_logs: int
    n_predicted_templates: int
    n_truth_templates: int
    template_density: float
    truth_template_density: float
    config: Mapping[str, Any] = field(default_factory=dict)

    def as_row(self) -> dict[str, Any]:
        row = asdict(self)
        config = row.pop('config')
        for key, val in config.items():
            row[f'config.{key}'] = val
        return row


# ** orchestration


@dataclass(frozen=True, kw_only=True, slots=True)
class RunConfig:
    dataset: str
    log_file: Path
    log_format: LogFormat
    rules: tuple[PreprocessRule, ...] = ()
    strategy: GroupingStrategy = field(
        default_factory=lambda: GroupingStrategy(positions=('first', 'p25', 'p50'))
    )
    jaccard_threshold: float = 0.9
    signature_length: int = 50
    seed: int = 0
    sample_size: int = 10
    output_dir: Path = Path('.')
    ground_truth: Path | None = None
    on_mismatch: MismatchPolicy = 'skip'
    dtw_band: int | None = None
    threads: int = 1
    show_progress: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.jaccard_threshold <= 1.0:
            raise ConfigurationError(
                f'Jaccard threshold must be in (0, 1], got {self.jaccard_threshold}'
            )
        if self.signature_length < 1:
            raise ConfigurationError('Signature length must be at least 1')
        if self.sample_size < 1:
            raise ConfigurationError('Sample size must be at least 1')
        if self.threads < 1:
            raise ConfigurationError('Number of threads must be at least 1')
        if self.dtw_band is not None and self.dtw_band < 1:
            raise ConfigurationError('DTW band width must be at least 1')
        if self.on_mismatch not in ('skip', 'whole-line'):
            raise ConfigurationError(f'Unknown mismatch policy >>{self.on_mismatch}<<')

    def echo(self) -> dict[str, Any]:
        return {
            'dataset': self.dataset,
            'log_file': str(self.log_file),
            'log_format': self.log_format.pattern,
            'regex': ' || '.join(rule.pattern for rule in self.rules),
            'strategy': self.strategy.spec,
            'jaccard_threshold': self.jaccard_threshold,
            'signature_length': self.signature_length,
            'seed': self.seed,
            'sample_size': self.sample_size,
            'dtw_band': self.dtw_band,
            'on_mismatch': self.on_mismatch,
        }


@dataclass(frozen=True, kw_only=True, slots=True)
class SyntheticSpec:
    n_templates: int
    logs_per_template: int
    variable_slots: int = 1
    alphabet: Alphabet = 'mixed'
    static_words: int = 6
    value_pool: int | None = None
    with_header: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        counts = (self.n_templates, self.logs_per_template, self.variable_slots)
        if min(counts) < 1 or self.static_words < 1:
            raise ConfigurationError('All synthetic corpus counts must be at least 1')
        if self.variable_slots > self.static_words + 1:
            raise ConfigurationError(
                'Too many variable slots to keep them apart: '
                f'{self.variable_slots} slots for {self.static_words} static words'
            )
        if self.value_pool is not None and self.value_pool < 1:
            raise ConfigurationError('Value pool size must be at least 1')
        if self.alphabet not in ('alphabetic', 'mixed'):
            raise ConfigurationError(f'Unknown alphabet >>{self.alphabet}<<')


@dataclass(frozen=True, kw_only=True, slots=True)
class RunStats:
    n_records: int
    n_rejected: int
    n_initial_groups: int
    n_clusters: int
    n_templates: int
    parsing_time_s: float
    num_bands: int | None
    rows_per_band: int | None


@dataclass(frozen=True, kw_only=True, slots=True)
class PipelineResult:
    output: StructuredOutput
    report: EvaluationReport | None
    stats: RunStats
    paths: tuple[Path, ...]
