import logging

from loglshd.constants import (
    LOGGING_LEVEL_CLUSTERING,
    LOGGING_LEVEL_EXTRACTION,
    LOGGING_LEVEL_GROUPING,
    LOGGING_LEVEL_METRICS,
    LOGGING_LEVEL_PARSING,
    LOGGING_LEVEL_PIPELINE,
    LOGGING_LEVEL_SYNTHETIC,
)

parsing = logging.getLogger('loglshd.parsing')
parsing.setLevel(LOGGING_LEVEL_PARSING)
grouping = logging.getLogger('loglshd.grouping')
grouping.setLevel(LOGGING_LEVEL_GROUPING)
clustering = logging.getLogger('loglshd.clustering')
clustering.setLevel(LOGGING_LEVEL_CLUSTERING)
extraction = logging.getLogger('loglshd.extraction')
extraction.setLevel(LOGGING_LEVEL_EXTRACTION)
metrics = logging.getLogger('loglshd.metrics')
metrics.setLevel(LOGGING_LEVEL_METRICS)
pipeline = logging.getLogger('loglshd.pipeline')
pipeline.setLevel(LOGGING_LEVEL_PIPELINE)
synthetic = logging.getLogger('loglshd.synthetic')
synthetic.setLevel(LOGGING_LEVEL_SYNTHETIC)

ALL = (parsing, grouping, clustering, extraction, metrics, pipeline, synthetic)


def set_level(level: int) -> None:
    for logger in ALL:
        logger.setLevel(level)
