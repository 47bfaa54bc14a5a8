from typing import Final

from loglshd.types import LoggingLevels, MismatchPolicy

LOGGING_LEVEL_PARSING: Final[LoggingLevels] = LoggingLevels.INFO
LOGGING_LEVEL_GROUPING: Final[LoggingLevels] = LoggingLevels.INFO
LOGGING_LEVEL_CLUSTERING: Final[LoggingLevels] = LoggingLevels.INFO
LOGGING_LEVEL_EXTRACTION: Final[LoggingLevels] = LoggingLevels.INFO
LOGGING_LEVEL_METRICS: Final[LoggingLevels] = LoggingLevels.INFO
LOGGING_LEVEL_PIPELINE: Final[LoggingLevels] = LoggingLevels.INFO
LOGGING_LEVEL_SYNTHETIC: Final[LoggingLevels] = LoggingLevels.INFO

PLACEHOLDER: Final[str] = '<*>'
# stands in for placeholders introduced by alignment until tokens are generalised
FOLD_MARK: Final[str] = '\uffff'
CONTENT_FIELD: Final[str] = 'Content'
SHINGLE_FILTER: Final[str] = r'^[a-zA-Z]+[.,]*$'

DEFAULT_STRATEGY: Final[str] = 'base+first+p25+p50'
DEFAULT_JACCARD_THRESHOLD: Final[float] = 0.9
DEFAULT_SIGNATURE_LENGTH: Final[int] = 50
DEFAULT_SEED: Final[int] = 0
DEFAULT_SAMPLE_SIZE: Final[int] = 10
DEFAULT_THREADS: Final[int] = 1
DEFAULT_MISMATCH_POLICY: Final[MismatchPolicy] = 'skip'

# largest value of the 32-bit permuted hash space, used for empty shingle sets
MINHASH_SENTINEL: Final[int] = (1 << 32) - 1
BAND_HASH_KEY: Final[bytes] = b'loglshd-band'
BAND_WEIGHT_FALSE_POSITIVE: Final[float] = 0.5
BAND_WEIGHT_FALSE_NEGATIVE: Final[float] = 0.5

SWEEP_THRESHOLDS: Final[tuple[float, ...]] = (
    1.0,
    0.95,
    0.9,
    0.85,
    0.8,
    0.75,
    0.7,
    0.65,
    0.6,
    0.55,
    0.5,
)
SWEEP_STRATEGIES: Final[tuple[str, ...]] = (
    'base',
    'base+first',
    'base+p25',
    'base+p50',
    'base+p75',
    'base+last',
)
PRESETS: Final[tuple[str, ...]] = ('loghub2',)
