import math
from collections.abc import Iterable, Mapping
from typing import cast

from loglshd.errors import GroupingStrategyError
from loglshd.loggers import grouping as logger
from loglshd.types import (
    POSITION_FRACTIONS,
    GroupingStrategy,
    GroupKey,
    InitialGroup,
    LineId,
    Position,
    Token,
)


def parse_strategy(
    spec: str,
) -> GroupingStrategy:
    """parse a compact strategy string such as ``base+first+p25+p50``

    ``base`` enables token count and content length, ``tokens`` and ``length``
    enable them separately, position names add positional characters.
    """
    use_token_count = False
    use_content_length = False
    positions: list[Position] = []
    parts = [part.strip().lower() for part in spec.split('+') if part.strip()]
    if not parts:
        raise GroupingStrategyError('Empty grouping strategy')

    for part in parts:
        if part == 'base':
            use_token_count = use_content_length = True
        elif part == 'tokens':
            use_token_count = True
        elif part == 'length':
            use_content_length = True
        elif part in POSITION_FRACTIONS:
            positions.append(cast(Position, part))
        else:
            raise GroupingStrategyError(
                f'Unknown grouping criterion >>{part}<< in >>{spec}<<'
            )

    # canonical order, independent of the spelling
    order = tuple(POSITION_FRACTIONS)
    positions.sort(key=order.index)

    return GroupingStrategy(
        use_token_count=use_token_count,
        use_content_length=use_content_length,
        positions=tuple(positions),
    )


def tokenize(
    content: str,
) -> list[Token]:
    return content.split()


def position_index(
    fraction: float,
    length: int,
) -> int:
    return math.floor(fraction * (length - 1))


def group_key(
    content: str,
    strategy: GroupingStrategy,
) -> GroupKey:
    position_chars: tuple[str, ...] | None = None
    if strategy.positions:
        length = len(content)
        position_chars = tuple(
            content[position_index(POSITION_FRACTIONS[pos], length)]
            for pos in strategy.positions
        )

    return GroupKey(
        token_count=len(tokenize(content)) if strategy.use_token_count else None,
        content_length=len(content) if strategy.use_content_length else None,
        position_chars=position_chars,
    )


def build_initial_groups(
    contents: Mapping[LineId, str] | Iterable[tuple[LineId, str]],
    strategy: GroupingStrategy,
) -> list[InitialGroup]:
    """partition preprocessed contents by their structural key

    Parameters
    ----------
    contents : Mapping[LineId, str] | Iterable[tuple[LineId, str]]
        preprocessed content per line ID, iterated in ascending line ID order
    strategy : GroupingStrategy
        enabled grouping criteria

    Returns
    -------
    list[InitialGroup]
        groups ordered by the line ID of their first member, the first member
        being the representative
    """
    items = contents.items() if isinstance(contents, Mapping) else contents
    buckets: dict[GroupKey, list[LineId]] = {}
    for line_id, content in items:
        key = group_key(content, strategy)
        members = buckets.get(key)
        if members is None:
            buckets[key] = [line_id]
        else:
            members.append(line_id)

    # dict preserves insertion order, i.e. first occurrence
    groups = [
        InitialGroup(key=key, member_ids=tuple(sorted(members)))
        for key, members in buckets.items()
    ]
    groups.sort(key=lambda group: group.representative_id)
    logger.info(
        'Initial grouping with strategy >>%s<<: %d groups.', strategy.spec, len(groups)
    )

    return groups
