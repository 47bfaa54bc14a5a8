from loglshd.extraction.common import generalise_tokens, merge_placeholders
from loglshd.extraction.dtw import dtw_align, to_char_sequence
from loglshd.extraction.templates import (
    assign_templates,
    common_skeleton,
    extract_template,
    sample_representatives,
)

__all__ = [
    'assign_templates',
    'common_skeleton',
    'dtw_align',
    'extract_template',
    'generalise_tokens',
    'merge_placeholders',
    'sample_representatives',
    'to_char_sequence',
]
