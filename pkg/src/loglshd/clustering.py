import functools
import hashlib
import itertools
import re
from collections import defaultdict
from collections.abc import Iterable, Iterator, Mapping, Sequence
from typing import Final

import numpy as np
import numpy.typing as npt
from datasketch import MinHash
from networkx.utils import UnionFind
from scipy.integrate import quad

from loglshd.common import map_ordered
from loglshd.constants import (
    BAND_HASH_KEY,
    BAND_WEIGHT_FALSE_NEGATIVE,
    BAND_WEIGHT_FALSE_POSITIVE,
    MINHASH_SENTINEL,
    SHINGLE_FILTER,
)
from loglshd.errors import SignatureLengthError
from loglshd.grouping import tokenize
from loglshd.loggers import clustering as logger
from loglshd.types import (
    CandidatePair,
    Cluster,
    ClusterId,
    GroupId,
    InitialGroup,
    LineId,
    MinHashSignature,
    ShingleSet,
    Token,
)

SHINGLE_PATTERN: Final[re.Pattern[str]] = re.compile(SHINGLE_FILTER)


def filter_tokens(
    tokens: Iterable[Token],
) -> ShingleSet:
    return frozenset(token for token in tokens if SHINGLE_PATTERN.fullmatch(token))


@functools.lru_cache(maxsize=16)
def _permutations(
    d: int,
    seed: int,
) -> npt.NDArray[np.uint64]:
    # (2, d) coefficients of the permutations, shared by all signatures of a run
    return MinHash(num_perm=d, seed=seed).permutations


def minhash(
    shingles: ShingleSet,
    d: int,
    seed: int,
) -> MinHashSignature:
    """MinHash signature of a shingle set with ``d`` permutation hash functions
    derived from the seed

    An empty set yields the sentinel ``2**32 - 1`` in every position.
    """
    if d < 1:
        raise ValueError('Signature length must be at least 1')
    if not shingles:
        return MinHashSignature(np.full(d, MINHASH_SENTINEL, dtype=np.uint64))
    hasher = MinHash(num_perm=d, seed=seed, permutations=_permutations(d, seed))
    hasher.update_batch([shingle.encode('utf-8') for shingle in sorted(shingles)])

    return MinHashSignature(np.array(hasher.hashvalues, dtype=np.uint64))


def estimate_jaccard(
    a: MinHashSignature,
    b: MinHashSignature,
) -> float:
    if len(a) != len(b):
        raise SignatureLengthError(
            f'Cannot compare signatures of length {len(a)} and {len(b)}'
        )
    return np.count_nonzero(a.values == b.values) / len(a)


def candidate_probability(
    s: float,
    b: int,
    r: int,
) -> float:
    return 1.0 - (1.0 - s**r) ** b


def _false_positive_area(
    threshold: float,
    b: int,
    r: int,
) -> float:
    area, _ = quad(lambda s: candidate_probability(s, b, r), 0.0, threshold)
    return area


def _false_negative_area(
    threshold: float,
    b: int,
    r: int,
) -> float:
    area, _ = quad(lambda s: 1.0 - candidate_probability(s, b, r), threshold, 1.0)
    return area


def optimize_bands(
    d: int,
    threshold: float,
) -> tuple[int, int]:
    """choose bands ``b`` and rows per band ``r`` with ``b * r == d`` minimising the
    weighted false positive and false negative areas of the S-curve
    ``1 - (1 - s^r)^b`` around the threshold

    Ties are resolved towards fewer bands.
    """
    if d < 1:
        raise ValueError('Signature length must be at least 1')
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f'Threshold must be in (0, 1], got {threshold}')

    best: tuple[float, int, int] | None = None
    for b in range(1, d + 1):
        if d % b != 0:
            continue
        r = d // b
        error = BAND_WEIGHT_FALSE_POSITIVE * _false_positive_area(
            threshold, b, r
        ) + BAND_WEIGHT_FALSE_NEGATIVE * _false_negative_area(threshold, b, r)
        if best is None or error < best[0]:
            best = (error, b, r)

    assert best is not None
    _, b, r = best
    return b, r


def band_hash(
    band: npt.NDArray[np.uint64],
) -> int:
    digest = hashlib.blake2b(
        np.ascontiguousarray(band, dtype='<u8').tobytes(),
        key=BAND_HASH_KEY,
        digest_size=8,
    ).digest()
    return int.from_bytes(digest, 'little', signed=False)


class LshIndex:
    def __init__(
        self,
        num_bands: int,
        rows_per_band: int,
    ) -> None:
        if num_bands < 1 or rows_per_band < 1:
            raise ValueError('Bands and rows per band must be at least 1')
        self.num_bands = num_bands
        self.rows_per_band = rows_per_band
        self.buckets: list[defaultdict[int, list[GroupId]]] = [
            defaultdict(list) for _ in range(num_bands)
        ]

    def __repr__(self) -> str:
        return (
            f'LshIndex(num_bands={self.num_bands}, '
            f'rows_per_band={self.rows_per_band}, '
            f'number of buckets: {sum(len(band) for band in self.buckets)})'
        )

    @property
    def signature_length(self) -> int:
        return self.num_bands * self.rows_per_band

    def insert(
        self,
        key: GroupId,
        signature: MinHashSignature,
    ) -> None:
        if len(signature) != self.signature_length:
            raise SignatureLengthError(
                f'Index expects signatures of length {self.signature_length}, '
                f'got {len(signature)}'
            )
        r = self.rows_per_band
        for band_idx, band in enumerate(self.buckets):
            band[band_hash(signature.values[band_idx * r : (band_idx + 1) * r])].append(key)

    def candidate_pairs(self) -> set[CandidatePair]:
        pairs: set[CandidatePair] = set()
        for band in self.buckets:
            for members in band.values():
                if len(members) < 2:
                    continue
                for x, y in itertools.combinations(members, 2):
                    pairs.add((x, y) if x < y else (y, x))
        return pairs


def find_candidate_pairs(
    signatures: Mapping[GroupId, MinHashSignature],
    b: int,
    r: int,
) -> set[CandidatePair]:
    index = LshIndex(b, r)
    for key in sorted(signatures):
        index.insert(key, signatures[key])
    return index.candidate_pairs()


def _clusters_from_components(
    components: Iterable[Iterable[GroupId]],
    groups_by_id: Mapping[GroupId, InitialGroup],
) -> list[Cluster]:
    clusters: list[Cluster] = []
    for component in components:
        member_group_ids = tuple(sorted(component))
        all_line_ids = tuple(
            sorted(
                itertools.chain.from_iterable(
                    groups_by_id[gid].member_ids for gid in member_group_ids
                )
            )
        )
        clusters.append(
            Cluster(
                cluster_id=ClusterId(all_line_ids[0]),
                member_group_ids=member_group_ids,
                all_line_ids=all_line_ids,
            )
        )
    clusters.sort(key=lambda cluster: cluster.cluster_id)

    return clusters


def representative_shingles(
    groups: Sequence[InitialGroup],
    contents: Mapping[LineId, str],
) -> Iterator[tuple[GroupId, ShingleSet]]:
    for group in groups:
        yield group.group_id, filter_tokens(tokenize(contents[group.representative_id]))


def merge_exact(
    groups: Sequence[InitialGroup],
    contents: Mapping[LineId, str],
) -> list[Cluster]:
    """merge initial groups whose representatives have identical shingle sets"""
    buckets: dict[tuple[str, ...], list[GroupId]] = {}
    for gid, shingles in representative_shingles(groups, contents):
        buckets.setdefault(tuple(sorted(shingles)), []).append(gid)

    groups_by_id = {group.group_id: group for group in groups}
    return _clusters_from_components(buckets.values(), groups_by_id)


def merge_clusters(
    groups: Sequence[InitialGroup],
    threshold: float,
    d: int,
    seed: int,
    contents: Mapping[LineId, str],
    threads: int = 1,
) -> list[Cluster]:
    """merge initial groups into clusters by comparing their representatives

    With a threshold of 1 shingle sets are compared directly. Otherwise MinHash
    signatures of the representatives are bucketed band-wise, candidate pairs with
    an estimated Jaccard similarity of at least the threshold are verified and the
    connected components of the verified pairs form the clusters.

    Parameters
    ----------
    groups : Sequence[InitialGroup]
        initial groups, their group IDs being their representatives' line IDs
    threshold : float
        Jaccard threshold in (0, 1]
    d : int
        signature length
    seed : int
        seed of the MinHash hash family
    contents : Mapping[LineId, str]
        preprocessed content per line ID
    threads : int, optional
        worker threads for signature computation, by default 1

    Returns
    -------
    list[Cluster]
        clusters ordered by cluster ID (smallest contained line ID)
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f'Threshold must be in (0, 1], got {threshold}')

    if threshold >= 1.0:
        clusters = merge_exact(groups, contents)
        logger.info(
            'Exact shingle matching merged %d groups into %d clusters.',
            len(groups),
            len(clusters),
        )
        return clusters

    group_ids: list[GroupId] = []
    shingle_sets: list[ShingleSet] = []
    for gid, shingles in representative_shingles(groups, contents):
        group_ids.append(gid)
        shingle_sets.append(shingles)
    signatures = map_ordered(lambda s: minhash(s, d, seed), shingle_sets, threads)

    union_find = UnionFind(group_ids)
    # identical signatures estimate a similarity of 1 and always collide
    duplicates: dict[bytes, list[GroupId]] = {}
    for gid, signature in zip(group_ids, signatures):
        duplicates.setdefault(signature.values.tobytes(), []).append(gid)
    distinct: dict[GroupId, MinHashSignature] = {}
    for gid, signature in zip(group_ids, signatures):
        members = duplicates[signature.values.tobytes()]
        if members[0] == gid:
            distinct[gid] = signature
            union_find.union(*members)

    b, r = optimize_bands(d, threshold)
    pairs = sorted(find_candidate_pairs(distinct, b, r))
    verified = 0
    for x, y in pairs:
        if estimate_jaccard(distinct[x], distinct[y]) >= threshold:
            union_find.union(x, y)
            verified += 1
    logger.debug(
        'LSH with b=%d, r=%d: %d distinct signatures, %d candidate pairs, %d verified.',
        b,
        r,
        len(distinct),
        len(pairs),
        verified,
    )

    groups_by_id = {group.group_id: group for group in groups}
    clusters = _clusters_from_components(union_find.to_sets(), groups_by_id)
    logger.info(
        'LSH merging (T=%.2f) merged %d groups into %d clusters.',
        threshold,
        len(groups),
        len(clusters),
    )

    return clusters
