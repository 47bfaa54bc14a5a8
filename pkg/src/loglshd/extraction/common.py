import re
from collections.abc import Iterable
from typing import Final

from loglshd.constants import FOLD_MARK, PLACEHOLDER

PLACEHOLDER_UNIT: Final[int] = -1

_PLACEHOLDER_RUN: Final[re.Pattern[str]] = re.compile(r'<\*>(?:\s*<\*>)+')
_WHITESPACE_SPLIT: Final[re.Pattern[str]] = re.compile(r'(\s+)')
# optional key prefix and opening brackets, then the body, then closing punctuation
_TOKEN_PARTS: Final[re.Pattern[str]] = re.compile(
    r'(?P<head>(?:[A-Za-z_][\w.\-]*[=:])?[(\[{"\']*)'
    r'(?P<body>.*?)'
    r'(?P<tail>[)\]}"\'.,;:]*)',
    re.DOTALL,
)


def merge_placeholders(
    text: str,
) -> str:
    """collapse runs of placeholders separated only by whitespace into one"""
    return _PLACEHOLDER_RUN.sub(PLACEHOLDER, text)


def generalise_tokens(
    text: str,
    mark: str = PLACEHOLDER,
) -> str:
    """replace every whitespace-delimited token containing ``mark`` by a single
    placeholder, keeping a ``key=`` prefix as well as surrounding brackets, quotes
    and trailing punctuation

    >>> generalise_tokens('Found block rdd_<*>_<*> locally')
    'Found block <*> locally'
    >>> generalise_tokens('user=<*>x, done')
    'user=<*>, done'
    """
    parts = _WHITESPACE_SPLIT.split(text)
    for idx, part in enumerate(parts):
        if mark not in part:
            continue
        match = _TOKEN_PARTS.fullmatch(part)
        assert match is not None
        parts[idx] = f'{match["head"]}{PLACEHOLDER}{match["tail"]}'

    return ''.join(parts)


def render_units(
    units: Iterable[int],
) -> str:
    """turn skeleton units into text, alignment placeholders as ``FOLD_MARK``"""
    return ''.join(FOLD_MARK if unit == PLACEHOLDER_UNIT else chr(unit) for unit in units)


def finalise_skeleton(
    units: Iterable[int],
) -> str:
    text = generalise_tokens(render_units(units), mark=FOLD_MARK)
    return merge_placeholders(text)
