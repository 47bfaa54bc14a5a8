import itertools
import random

import networkx as nx
import numpy as np
import pytest

from loglshd.clustering import (
    LshIndex,
    candidate_probability,
    estimate_jaccard,
    filter_tokens,
    find_candidate_pairs,
    merge_clusters,
    minhash,
    optimize_bands,
)
from loglshd.constants import MINHASH_SENTINEL
from loglshd.errors import SignatureLengthError
from loglshd.grouping import build_initial_groups, parse_strategy, tokenize
from loglshd.types import LineId, MinHashSignature


@pytest.mark.parametrize(
    ('tokens', 'shingles'),
    [
        (['Found', 'block', 'rdd_42_20', 'locally'], {'Found', 'block', 'locally'}),
        (['sent,', 'received,', 'sec'], {'sent,', 'received,', 'sec'}),
        (['<*>', '42', 'a.b'], set()),
        (['word', 'word', 'word.'], {'word', 'word.'}),
    ],
)
def test_filter_tokens(tokens, shingles):
    assert filter_tokens(tokens) == frozenset(shingles)


def test_minhash_deterministic():
    shingles = frozenset({'Found', 'block', 'locally'})
    assert minhash(shingles, 50, 0) == minhash(frozenset(shingles), 50, 0)
    assert minhash(shingles, 50, 0) != minhash(shingles, 50, 1)
    assert len(minhash(shingles, 50, 0)) == 50


def test_minhash_empty_set_is_sentinel():
    signature = minhash(frozenset(), 16, 3)
    assert signature.values.tolist() == [MINHASH_SENTINEL] * 16
    assert minhash(frozenset(), 16, 4) == signature
    assert estimate_jaccard(signature, minhash(frozenset({'word'}), 16, 3)) == 0.0


def test_minhash_invalid_length():
    with pytest.raises(ValueError):
        minhash(frozenset({'a'}), 0, 0)


def test_estimate_jaccard_bounds():
    a = MinHashSignature(np.array([1, 2, 3, 4], dtype=np.uint64))
    b = MinHashSignature(np.array([5, 6, 7, 8], dtype=np.uint64))
    c = MinHashSignature(np.array([1, 2, 7, 8], dtype=np.uint64))
    assert estimate_jaccard(a, a) == 1.0
    assert estimate_jaccard(a, b) == 0.0
    assert estimate_jaccard(a, c) == 0.5


def test_estimate_jaccard_length_mismatch():
    with pytest.raises(SignatureLengthError):
        estimate_jaccard(minhash(frozenset({'a'}), 10, 0), minhash(frozenset({'a'}), 20, 0))


def test_estimate_jaccard_averaged_over_seeds():
    a = frozenset({'a', 'b', 'c'})
    b = frozenset({'a', 'b', 'd'})
    estimates = [
        estimate_jaccard(minhash(a, 50, seed), minhash(b, 50, seed)) for seed in range(200)
    ]
    assert abs(np.mean(estimates) - 0.5) <= 0.1


@pytest.mark.parametrize('threshold', [0.5, 0.65, 0.8, 0.9, 0.95])
def test_optimize_bands_factorises(threshold):
    b, r = optimize_bands(50, threshold)
    assert b * r == 50


def test_optimize_bands_longer_bands_for_higher_threshold():
    _, r_low = optimize_bands(50, 0.5)
    _, r_high = optimize_bands(50, 0.9)
    assert r_high > r_low


@pytest.mark.parametrize('threshold', [0.0, -0.1, 1.5])
def test_optimize_bands_invalid_threshold(threshold):
    with pytest.raises(ValueError):
        optimize_bands(50, threshold)


def test_candidate_probability_ends():
    assert candidate_probability(0.0, 10, 5) == 0.0
    assert candidate_probability(1.0, 10, 5) == 1.0


def test_lsh_index_rejects_wrong_length():
    index = LshIndex(5, 10)
    assert index.signature_length == 50
    with pytest.raises(SignatureLengthError):
        index.insert(LineId(1), minhash(frozenset({'a'}), 20, 0))


def test_identical_signatures_always_candidates():
    signature = minhash(frozenset({'x', 'y'}), 50, 0)
    signatures = {LineId(1): signature, LineId(4): signature}
    assert find_candidate_pairs(signatures, 10, 5) == {(1, 4)}


def test_disjoint_signatures_no_spurious_candidates():
    rng = np.random.default_rng(5)
    values = rng.permutation(2 * 1000 * 50).reshape(2000, 50).astype(np.uint64)
    signatures = {LineId(idx): MinHashSignature(row) for idx, row in enumerate(values)}
    assert find_candidate_pairs(signatures, 10, 5) == set()


def test_candidate_pairs_match_band_scan():
    rng = np.random.default_rng(9)
    b, r = 3, 2
    signatures = {
        LineId(idx): MinHashSignature(rng.integers(0, 2, size=b * r).astype(np.uint64))
        for idx in range(1, 101)
    }
    expected = set()
    for x, y in itertools.combinations(sorted(signatures), 2):
        for band in range(b):
            part = slice(band * r, (band + 1) * r)
            if np.array_equal(signatures[x].values[part], signatures[y].values[part]):
                expected.add((x, y))
                break
    assert find_candidate_pairs(signatures, b, r) == expected


def _random_contents(rng: random.Random, n: int) -> dict[LineId, str]:
    words = ['open', 'close', 'sent,', 'bytes', 'user', 'rx', 'tx.']
    noise = ['42', 'a_1', '<*>', '0x1f']
    contents = {}
    for idx in range(1, n + 1):
        tokens = [rng.choice(words) for _ in range(rng.randint(1, 4))]
        tokens += [rng.choice(noise) for _ in range(rng.randint(0, 2))]
        rng.shuffle(tokens)
        contents[LineId(idx)] = ' '.join(tokens)
    return contents


def _cluster_labels(clusters) -> dict[LineId, LineId]:
    return {
        gid: cluster.cluster_id for cluster in clusters for gid in cluster.member_group_ids
    }


def test_exact_path_matches_shingle_equality():
    contents = _random_contents(random.Random(3), 300)
    groups = build_initial_groups(contents, parse_strategy('base+first+p25+p50'))[:100]
    clusters = merge_clusters(groups, 1.0, 50, 0, contents)
    label = _cluster_labels(clusters)

    shingles = {
        group.group_id: filter_tokens(tokenize(contents[group.representative_id]))
        for group in groups
    }
    for x, y in itertools.combinations(shingles, 2):
        assert (shingles[x] == shingles[y]) == (label[x] == label[y])


def test_clusters_partition_lines():
    contents = _random_contents(random.Random(4), 200)
    groups = build_initial_groups(contents, parse_strategy('base+first'))
    for threshold in (1.0, 0.7):
        clusters = merge_clusters(groups, threshold, 50, 0, contents)
        line_ids = [line_id for cluster in clusters for line_id in cluster.all_line_ids]
        assert sorted(line_ids) == sorted(contents)
        for cluster in clusters:
            assert cluster.cluster_id == min(cluster.all_line_ids)
        cluster_ids = [cluster.cluster_id for cluster in clusters]
        assert cluster_ids == sorted(cluster_ids)


def test_lsh_clusters_refine_oracle_components():
    agreements = 0
    total = 0
    for seed in range(20):
        contents = _random_contents(random.Random(100 + seed), 120)
        groups = build_initial_groups(contents, parse_strategy('base+first+p50'))[:30]
        clusters = merge_clusters(groups, 0.7, 50, seed, contents)
        label = _cluster_labels(clusters)

        signatures = {
            group.group_id: minhash(
                filter_tokens(tokenize(contents[group.representative_id])), 50, seed
            )
            for group in groups
        }
        # components of the brute-force verification graph
        graph = nx.Graph()
        graph.add_nodes_from(signatures)
        graph.add_edges_from(
            (x, y)
            for x, y in itertools.combinations(signatures, 2)
            if estimate_jaccard(signatures[x], signatures[y]) >= 0.7
        )
        oracle = {
            gid: min(component)
            for component in nx.connected_components(graph)
            for gid in component
        }

        for x, y in itertools.combinations(signatures, 2):
            same_oracle = oracle[x] == oracle[y]
            same_lsh = label[x] == label[y]
            if same_lsh:
                assert same_oracle
            agreements += same_oracle == same_lsh
            total += 1

    assert agreements / total >= 0.95


def _oracle_components(signatures, threshold: float) -> dict[LineId, LineId]:
    graph = nx.Graph()
    graph.add_nodes_from(signatures)
    graph.add_edges_from(
        (x, y)
        for x, y in itertools.combinations(signatures, 2)
        if estimate_jaccard(signatures[x], signatures[y]) >= threshold
    )
    return {
        gid: min(component)
        for component in nx.connected_components(graph)
        for gid in component
    }


def test_higher_threshold_refines_components():
    for seed in range(10):
        contents = _random_contents(random.Random(200 + seed), 150)
        groups = build_initial_groups(contents, parse_strategy('base+first+p50'))[:40]
        signatures = {
            group.group_id: minhash(
                filter_tokens(tokenize(contents[group.representative_id])), 50, seed
            )
            for group in groups
        }
        partitions = [_oracle_components(signatures, t) for t in (0.5, 0.7, 0.9)]
        for lower, higher in zip(partitions, partitions[1:]):
            for x, y in itertools.combinations(signatures, 2):
                if higher[x] == higher[y]:
                    assert lower[x] == lower[y]

        # exact matching never joins groups that LSH merging keeps apart
        exact = _cluster_labels(merge_clusters(groups, 1.0, 50, seed, contents))
        merged = _cluster_labels(merge_clusters(groups, 0.5, 50, seed, contents))
        for x, y in itertools.combinations(signatures, 2):
            if exact[x] == exact[y]:
                assert merged[x] == merged[y]


def test_proxifier_pair():
    first = 'proxy.example.com:443 close, 403 bytes sent, 426 bytes received, lifetime <1 sec'
    second = (
        'proxy.example.com:443 close, 1124 bytes (1.09 KB) sent, 529 bytes received, '
        'lifetime <1 sec'
    )
    contents = {LineId(1): first, LineId(2): second}
    groups = build_initial_groups(contents, parse_strategy('base'))
    assert len(groups) == 2

    shingles = [filter_tokens(tokenize(content)) for content in (first, second)]
    assert shingles[0] == shingles[1]

    assert len(merge_clusters(groups, 1.0, 50, 0, contents)) == 1
    assert len(merge_clusters(groups, 0.9, 50, 0, contents)) == 1


def test_merge_invalid_threshold():
    with pytest.raises(ValueError):
        merge_clusters([], 0.0, 50, 0, {})


def test_merge_deterministic_across_threads():
    contents = _random_contents(random.Random(8), 200)
    groups = build_initial_groups(contents, parse_strategy('base+first'))
    single = merge_clusters(groups, 0.6, 50, 7, contents, threads=1)
    pooled = merge_clusters(groups, 0.6, 50, 7, contents, threads=8)
    assert single == pooled
