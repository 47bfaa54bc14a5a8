import itertools
import random

import pytest

from loglshd.errors import GroupingStrategyError
from loglshd.grouping import (
    build_initial_groups,
    group_key,
    parse_strategy,
    position_index,
    tokenize,
)
from loglshd.types import GroupingStrategy, GroupKey, LineId

BASE = GroupingStrategy()


@pytest.mark.parametrize(
    ('content', 'tokens'),
    [
        ('Found block rdd_42_20 locally', ['Found', 'block', 'rdd_42_20', 'locally']),
        ('a', ['a']),
        ('a   b', ['a', 'b']),
        (' \tpadded\t ', ['padded']),
    ],
)
def test_tokenize(content, tokens):
    assert tokenize(content) == tokens


def test_parse_strategy():
    strategy = parse_strategy('base+p50+first+p25')
    assert strategy.use_token_count and strategy.use_content_length
    assert strategy.positions == ('first', 'p25', 'p50')
    assert strategy.spec == 'base+first+p25+p50'
    assert parse_strategy('tokens+last') == GroupingStrategy(
        use_token_count=True, use_content_length=False, positions=('last',)
    )
    assert parse_strategy('p75').spec == 'p75'


@pytest.mark.parametrize('spec', ['', 'base+p33', 'first+first'])
def test_parse_strategy_invalid(spec):
    with pytest.raises(GroupingStrategyError):
        parse_strategy(spec)


def test_strategy_needs_criterion():
    with pytest.raises(GroupingStrategyError):
        GroupingStrategy(use_token_count=False, use_content_length=False)


def test_position_index():
    assert [position_index(f, 8) for f in (0.0, 0.25, 0.5, 0.75, 1.0)] == [0, 1, 3, 5, 7]
    assert {position_index(f, 1) for f in (0.0, 0.5, 1.0)} == {0}


def test_group_key_forced_by_definition():
    key = group_key('abcd', parse_strategy('base+first+last'))
    assert key == GroupKey(token_count=1, content_length=4, position_chars=('a', 'd'))

    key = group_key('x', parse_strategy('first+p50+last'))
    assert key.position_chars == ('x', 'x', 'x')
    assert key.token_count is None
    assert key.content_length is None


def test_group_key_equal_for_same_shape():
    key_a = group_key('Found block A locally', BASE)
    key_b = group_key('Found block B locally', BASE)
    assert key_a == key_b == GroupKey(token_count=4, content_length=21)


def test_placeholder_counts_as_characters():
    key = group_key('to <*>', parse_strategy('base+last'))
    assert key == GroupKey(token_count=2, content_length=6, position_chars=('>',))


def test_identical_contents_one_group():
    contents = {LineId(idx): 'same line' for idx in range(1, 6)}
    (group,) = build_initial_groups(contents, parse_strategy('base+first+p25+p50'))
    assert group.member_ids == (1, 2, 3, 4, 5)
    assert group.representative_id == 1


def test_distinct_lengths_singletons():
    contents = {LineId(idx): 'x' * idx for idx in range(1, 6)}
    groups = build_initial_groups(contents, BASE)
    assert [group.member_ids for group in groups] == [(1,), (2,), (3,), (4,), (5,)]


def _random_contents(rng: random.Random, n: int) -> dict[LineId, str]:
    words = ['ab', 'cd', 'efg', 'h', 'ijk', 'lm']
    return {
        LineId(idx): ' '.join(rng.choice(words) for _ in range(rng.randint(1, 4)))
        for idx in range(1, n + 1)
    }


@pytest.mark.parametrize('spec', ['base', 'base+first+p25+p50', 'length+last', 'tokens'])
def test_partition_matches_pairwise_key_equality(spec):
    rng = random.Random(7)
    strategy = parse_strategy(spec)
    for _ in range(5):
        contents = _random_contents(rng, 50)
        groups = build_initial_groups(contents, strategy)

        label = {}
        for group in groups:
            assert list(group.member_ids) == sorted(group.member_ids)
            for line_id in group.member_ids:
                assert line_id not in label
                label[line_id] = group.group_id
        assert set(label) == set(contents)

        for x, y in itertools.combinations(contents, 2):
            same_key = group_key(contents[x], strategy) == group_key(contents[y], strategy)
            assert same_key == (label[x] == label[y])

        firsts = [group.representative_id for group in groups]
        assert firsts == sorted(firsts)


def test_finer_strategy_refines_partition():
    rng = random.Random(11)
    contents = _random_contents(rng, 50)
    coarse = build_initial_groups(contents, parse_strategy('base+first'))
    fine = build_initial_groups(contents, parse_strategy('base+first+p50'))
    coarse_label = {
        line_id: group.group_id for group in coarse for line_id in group.member_ids
    }
    for group in fine:
        assert len({coarse_label[line_id] for line_id in group.member_ids}) == 1
    assert len(fine) >= len(coarse)


def test_accepts_pairs():
    groups = build_initial_groups([(LineId(1), 'a b'), (LineId(2), 'c d')], BASE)
    assert [group.member_ids for group in groups] == [(1, 2)]
