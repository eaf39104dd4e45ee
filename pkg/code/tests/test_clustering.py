from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from conftest import make_profile
from services.clustering_service import cluster_experts
from utils.errors import DivisibilityError, PlacementError


def _intra(c: np.ndarray, clusters) -> int:
    return sum(int(c[i, j]) for cl in clusters for i, j in combinations(cl, 2))


def _pairings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, other in enumerate(rest):
        for tail in _pairings(rest[:i] + rest[i + 1:]):
            yield [[first, other]] + tail


def test_two_strong_pairs():
    c = np.array([[0, 10, 1, 0],
                  [10, 0, 0, 1],
                  [1, 0, 0, 8],
                  [0, 1, 8, 0]])
    clusters = cluster_experts(make_profile(c), 2)
    assert sorted(sorted(cl) for cl in clusters) == [[0, 1], [2, 3]]


def test_all_zero_fills_ascending():
    clusters = cluster_experts(make_profile(np.zeros((8, 8), dtype=np.int64)), 4)
    assert clusters == [[0, 1], [2, 3], [4, 5], [6, 7]]


def test_planted_pairs_are_recovered():
    rng = np.random.default_rng(0)
    noise = rng.integers(0, 10, size=(8, 8))
    c = np.triu(noise, 1)
    c = c + c.T
    perm = rng.permutation(8)
    planted = [sorted(perm[i:i + 2].tolist()) for i in range(0, 8, 2)]
    for a, b in planted:
        c[a, b] = c[b, a] = 50
    clusters = cluster_experts(make_profile(c), 4)
    assert sorted(sorted(cl) for cl in clusters) == sorted(planted)

    # planted pairing is the best of all 105 pairings
    all_pairings = list(_pairings(list(range(8))))
    assert len(all_pairings) == 105
    assert max(_intra(c, p) for p in all_pairings) == _intra(c, planted)


def test_clusters_partition_experts(tiny_trace):
    from services.profiling_service import profile_layer
    clusters = cluster_experts(profile_layer(tiny_trace, 0), 4)
    assert sorted(e for cl in clusters for e in cl) == list(range(16))
    assert {len(cl) for cl in clusters} == {4}


def test_one_expert_per_cluster():
    c = np.array([[0, 3, 1], [3, 0, 2], [1, 2, 0]])
    clusters = cluster_experts(make_profile(c), 3)
    assert clusters[0] == [0]
    assert sorted(e for cl in clusters for e in cl) == [0, 1, 2]


def test_indivisible_counts_are_rejected():
    with pytest.raises(DivisibilityError) as err:
        cluster_experts(make_profile(np.zeros((10, 10), dtype=np.int64)), 4)
    assert "divides" in str(err.value)
    with pytest.raises(PlacementError):
        cluster_experts(make_profile(np.zeros((4, 4), dtype=np.int64)), 0)


def _greedy_by_means(c, n_clusters):
    """Plain-loop rendering of the greedy rule with mean co-activations and lowest-index ties."""
    n = len(c)
    size = n // n_clusters
    free = list(range(n))

    def mean(e, members):
        return Fraction(sum(c[e][m] for m in members), len(members))

    clusters = []
    for ci in range(n_clusters):
        if ci == 0:
            best = (0, 1)
            for i in range(n):
                for j in range(i + 1, n):
                    if c[i][j] > c[best[0]][best[1]]:
                        best = (i, j)
            cluster = list(best) if size >= 2 else [best[0]]
        else:
            chosen = [e for cl in clusters for e in cl]
            seed = free[0]
            for e in free:
                if mean(e, chosen) < mean(seed, chosen):
                    seed = e
            cluster = [seed]
        for e in cluster:
            free.remove(e)
        while len(cluster) < size:
            pick = free[0]
            for e in free:
                if mean(e, cluster) > mean(pick, cluster):
                    pick = e
            cluster.append(pick)
            free.remove(pick)
        clusters.append(cluster)
    return clusters


@pytest.mark.parametrize("seed", range(120))
def test_matches_greedy_by_means(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.choice([2, 4, 6, 8, 9, 12, 16]))
    n_clusters = int(rng.choice([d for d in range(1, n + 1) if n % d == 0]))
    # narrow value ranges force ties
    upper = np.triu(rng.integers(0, int(rng.choice([2, 4, 50])), size=(n, n)), 1)
    c = upper + upper.T
    assert cluster_experts(make_profile(c), n_clusters) == _greedy_by_means(c.tolist(), n_clusters)


def _planted_profile(rng, n=16, n_clusters=4):
    perm = rng.permutation(n)
    planted = [perm[i:i + n // n_clusters] for i in range(0, n, n // n_clusters)]
    upper = np.triu(rng.integers(0, 20, size=(n, n)), 1)
    c = upper + upper.T
    for members in planted:
        for i, j in combinations(members, 2):
            c[i, j] = c[j, i] = c[i, j] + int(rng.integers(15, 40))
    return c


def test_beats_random_partitions_on_planted_profiles():
    rng = np.random.default_rng(2024)
    trials, wins = 60, 0
    for _ in range(trials):
        c = _planted_profile(rng)
        greedy = cluster_experts(make_profile(c), 4)
        perm = rng.permutation(16)
        random_partition = [perm[i:i + 4].tolist() for i in range(0, 16, 4)]
        wins += _intra(c, greedy) > _intra(c, random_partition)
    assert wins >= 0.95 * trials
