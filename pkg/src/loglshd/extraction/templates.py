from collections.abc import Mapping, Sequence

import numpy as np
import pandas as pd

from loglshd.common import map_ordered
from loglshd.errors import EmptyClusterError
from loglshd.extraction.common import (
    PLACEHOLDER_UNIT,
    finalise_skeleton,
    merge_placeholders,
)
from loglshd.extraction.dtw import dtw_align, to_char_sequence
from loglshd.loggers import extraction as logger
from loglshd.parsing import STRUCTURED_COLUMNS, TEMPLATE_COLUMNS
from loglshd.types import (
    Cluster,
    LineId,
    LogRecord,
    StructuredOutput,
    Template,
)


def sample_representatives(
    cluster: Cluster,
    contents: Mapping[LineId, str],
    k: int,
    seed: int,
) -> list[str]:
    """draw up to ``k`` member contents without replacement, ordered by line ID

    The draw depends only on the seed and the cluster ID.
    """
    if not cluster.all_line_ids:
        raise EmptyClusterError(f'Cluster {cluster.cluster_id} has no members')
    if k < 1:
        raise ValueError('Sample size must be at least 1')

    line_ids = cluster.all_line_ids
    if len(line_ids) > k:
        rng = np.random.default_rng([seed, cluster.cluster_id])
        chosen = rng.choice(len(line_ids), size=k, replace=False)
        line_ids = tuple(line_ids[idx] for idx in sorted(chosen))

    return [contents[line_id] for line_id in line_ids]


def _fold(
    skeleton: np.ndarray,
    content: np.ndarray,
    band: int | None,
) -> np.ndarray:
    # keep aligned equal characters, each index of either side at most once;
    # anything skipped in between becomes a placeholder
    path = dtw_align(skeleton, content, band=band)
    units: list[int] = []
    prev_i = prev_j = -1
    for i, j in path.steps:
        if i <= prev_i or j <= prev_j:
            continue
        if skeleton[i] != content[j]:
            continue
        if i > prev_i + 1 or j > prev_j + 1:
            units.append(PLACEHOLDER_UNIT)
        units.append(int(skeleton[i]))
        prev_i, prev_j = i, j
    if prev_i < len(skeleton) - 1 or prev_j < len(content) - 1:
        units.append(PLACEHOLDER_UNIT)

    return np.array(units, dtype=np.int64)


def common_skeleton(
    contents: Sequence[str],
    band: int | None = None,
) -> Template:
    """fold the contents pairwise by DTW alignment into their common skeleton

    Characters not shared by all contents collapse into placeholders, tokens
    touched by such a placeholder are generalised to a single one and adjacent
    placeholders are merged. A single content is its own template up to merged
    placeholders.
    """
    if not contents:
        raise EmptyClusterError('Cannot extract a template from no contents')
    if len(contents) == 1:
        return Template(merge_placeholders(contents[0]))

    skeleton = to_char_sequence(contents[0])
    for content in contents[1:]:
        skeleton = _fold(skeleton, to_char_sequence(content), band)
        if len(skeleton) == 1 and skeleton[0] == PLACEHOLDER_UNIT:
            break

    return Template(finalise_skeleton(skeleton.tolist()))


def extract_template(
    cluster: Cluster,
    contents: Mapping[LineId, str],
    k: int,
    seed: int,
    band: int | None = None,
) -> Template:
    samples = sample_representatives(cluster, contents, k, seed)
    template = common_skeleton(samples, band=band)
    logger.debug('Cluster %d: %s', cluster.cluster_id, template.text)
    return template


def _inventory(
    rows: pd.DataFrame,
) -> pd.DataFrame:
    if rows.empty:
        return pd.DataFrame(columns=list(TEMPLATE_COLUMNS))
    inventory = (
        rows.groupby(['EventId', 'EventTemplate'], sort=False)
        .size()
        .reset_index(name='Occurrences')
    )
    return inventory[list(TEMPLATE_COLUMNS)]


def assign_templates(
    clusters: Sequence[Cluster],
    records: Sequence[LogRecord],
    k: int,
    seed: int,
    contents: Mapping[LineId, str] | None = None,
    band: int | None = None,
    threads: int = 1,
    show_progress: bool = False,
) -> StructuredOutput:
    """extract one template per cluster and assign it to all cluster members

    Parameters
    ----------
    clusters : Sequence[Cluster]
        clusters partitioning the line IDs of the records
    records : Sequence[LogRecord]
        parsed records in ascending line ID order, their raw contents end up in
        the structured rows
    k : int
        number of sampled representatives per cluster
    seed : int
        sampling seed
    contents : Mapping[LineId, str] | None, optional
        preprocessed contents templates are extracted from, by default None
        (the raw record contents)
    band : int | None, optional
        Sakoe-Chiba band width of the alignment, by default None
    threads : int, optional
        worker threads, by default 1
    show_progress : bool, optional
        display a progress bar, by default False

    Returns
    -------
    StructuredOutput
        rows in record order and the template inventory in order of first
        occurrence
    """
    if contents is None:
        contents = {record.line_id: record.content for record in records}

    line_ids = pd.Index([record.line_id for record in records], dtype=np.int64)
    member_positions: list[np.ndarray] = []
    covered = np.zeros(len(records), dtype=bool)
    for cluster in clusters:
        positions = line_ids.get_indexer(list(cluster.all_line_ids))
        if (positions < 0).any():
            raise ValueError(f'Cluster {cluster.cluster_id} contains unknown line IDs')
        covered[positions] = True
        member_positions.append(positions)
    if not covered.all():
        raise ValueError('Clusters do not cover all records')

    templates = map_ordered(
        lambda cluster: extract_template(cluster, contents, k, seed, band),
        clusters,
        threads=threads,
        progress=show_progress,
        desc='Extracting templates',
    )

    event_ids = np.full(len(records), None, dtype=object)
    event_templates = np.full(len(records), None, dtype=object)
    for positions, template in zip(member_positions, templates):
        event_ids[positions] = template.event_id
        event_templates[positions] = template.text

    rows = pd.DataFrame(
        {
            'LineId': line_ids.to_numpy(),
            'Content': [record.content for record in records],
            'EventId': event_ids,
            'EventTemplate': event_templates,
        },
        columns=list(STRUCTURED_COLUMNS),
    )
    output = StructuredOutput(rows=rows, templates=_inventory(rows))
    logger.info(
        'Extracted %d templates from %d clusters for %d lines.',
        len(output.templates),
        len(clusters),
        len(rows),
    )

    return output
