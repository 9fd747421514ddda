import itertools
import math

import numpy as np
import pytest

from topostyle.errors import IntegrityError
from topostyle.stats import DistanceMatrix, one_vs_rest, permutation_test


def two_cluster_matrix():
    v = np.array([[0, 0, 10, 10], [0, 0, 10, 10], [10, 10, 0, 0], [10, 10, 0, 0]], float)
    return DistanceMatrix("abcd", v)


def random_matrix(n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    v = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    return DistanceMatrix([f"x{i}" for i in range(n)], v)


def enumerate_q(dm, labels_a):
    """Hand enumeration of every split: fraction at or below the observed."""
    ids = list(dm.ids)
    v = dm.values

    def stat(a):
        b = [i for i in range(len(ids)) if i not in a]
        return np.mean([v[i, j] for i in a for j in b])

    obs = stat([ids.index(x) for x in labels_a])
    stats = [stat(list(c)) for c in itertools.combinations(range(len(ids)), len(labels_a))]
    return sum(s <= obs + 1e-12 for s in stats) / len(stats)


def test_two_clusters_exhaustive():
    out = permutation_test(two_cluster_matrix(), ["a", "b"])
    assert out.mode == "exhaustive" and out.n_permutations == 6
    assert out.observed == 10
    assert out.q == 1.0 and out.flag == "MAX"
    assert enumerate_q(two_cluster_matrix(), ["a", "b"]) == 1.0


def test_mixed_split_not_extreme():
    out = permutation_test(two_cluster_matrix(), ["a", "c"])
    assert out.observed == 5 and out.q == pytest.approx(4 / 6) and out.flag == "NONE"


def test_constant_matrix_ties():
    n = 12
    v = np.full((n, n), 3.0)
    np.fill_diagonal(v, 0)
    dm = DistanceMatrix(range(n), v)
    with pytest.warns(RuntimeWarning, match="tie"):
        out = permutation_test(dm, ["0", "1", "2", "3"])
    assert out.q == 1.0 and out.flag == "NONE"
    assert out.significant


def test_eleven_splits_cannot_be_significant():
    dm = random_matrix(11, 0)
    v = dm.values.copy()
    v[10, :10] += 50
    v[:10, 10] += 50
    dm = DistanceMatrix(dm.ids, v)
    out = permutation_test(dm, dm.ids[:10])
    assert out.mode == "exhaustive" and out.n_permutations == 11
    assert out.flag == "MAX" and out.q == 1.0
    assert not out.attainable and not out.significant


def test_monte_carlo_add_one_never_zero_or_one():
    dm = random_matrix(30, 1)
    out = permutation_test(dm, dm.ids[:10], n_perms=500, seed=4)
    assert out.mode == "monte-carlo" and out.n_permutations == 500
    assert 0 < out.q < 1
    assert out.q == out.n_le / 501


def test_monte_carlo_agrees_with_exhaustive():
    for seed in range(3):
        dm = random_matrix(9, seed)
        labels = dm.ids[:4]  # C(9, 4) = 126 splits
        exact = permutation_test(dm, labels, n_perms=10_000)
        assert exact.q == pytest.approx(enumerate_q(dm, labels))
        mc = permutation_test(dm, labels, n_perms=100_000, seed=seed + 10, method="monte-carlo")
        assert mc.mode == "monte-carlo"
        assert abs(mc.q - exact.q) <= 0.02


def test_seed_determinism_and_worker_independence():
    dm = random_matrix(25, 2)
    a = permutation_test(dm, dm.ids[:7], n_perms=3500, seed=42)
    b = permutation_test(dm, dm.ids[:7], n_perms=3500, seed=42)
    c = permutation_test(dm, dm.ids[:7], n_perms=3500, seed=42, workers=3)
    assert a == b == c
    assert permutation_test(dm, dm.ids[:7], n_perms=3500, seed=43) != a


def test_relabelling_equivariance():
    dm = random_matrix(8, 5)
    perm = np.random.default_rng(0).permutation(8)
    ids = [f"y{i}" for i in range(8)]
    relabelled = DistanceMatrix([ids[p] for p in perm], dm.values[np.ix_(perm, perm)])
    labels = dm.ids[:3]
    mapped = [ids[dm.ids.index(x)] for x in labels]
    assert permutation_test(dm, labels).q == permutation_test(relabelled, mapped).q


def test_scale_invariance():
    dm = random_matrix(10, 6)
    scaled = DistanceMatrix(dm.ids, dm.values * 7.3)
    assert permutation_test(dm, dm.ids[:3]).q == permutation_test(scaled, dm.ids[:3]).q


def test_flags_imply_extreme_q():
    rng = np.random.default_rng(8)
    seen = set()
    for _ in range(200):
        n = int(rng.integers(4, 9))
        dm = random_matrix(n, int(rng.integers(1 << 30)))
        k = int(rng.integers(1, n))
        if 2 * k == n:
            continue
        labels = list(rng.choice(dm.ids, k, replace=False))
        out = permutation_test(dm, labels)
        total = math.comb(n, k)
        if out.flag == "MAX":
            assert out.q == 1.0
        if out.flag == "MIN":
            assert out.q == pytest.approx(1 / total)
        seen.add(out.flag)
    assert {"MAX", "MIN"} <= seen


def test_contract_violations():
    dm = two_cluster_matrix()
    with pytest.raises(ValueError):
        permutation_test(dm, [])
    with pytest.raises(ValueError):
        permutation_test(dm, list("abcd"))
    with pytest.raises(IntegrityError):
        permutation_test(dm, ["a", "zz"])
    with pytest.raises(IntegrityError):
        permutation_test(DistanceMatrix("abc"), ["a"])


def test_one_vs_rest_sizes():
    ids = [f"p{i}" for i in range(100)]
    groups = {i: f"artist{k // 10}" for k, i in enumerate(ids)}
    dm = random_matrix(100, 9)
    dm = DistanceMatrix(ids, dm.values)
    out = one_vs_rest(dm, groups, "artist3", n_perms=200, seed=1)
    assert (out.size_a, out.size_b) == (10, 90) and out.mode == "monte-carlo"

    sub = DistanceMatrix(ids[:50], dm.values[:50, :50])
    out = one_vs_rest(sub, groups, "artist0", n_perms=200, seed=1)
    assert (out.size_a, out.size_b) == (10, 40)


@pytest.mark.filterwarnings("ignore:every split")
def test_one_vs_rest_smallest_instance():
    dm = DistanceMatrix(["u", "v"], [[0, 2], [2, 0]])
    out = one_vs_rest(dm, {"u": "g1", "v": "g2"}, "g1")
    assert out.mode == "exhaustive" and out.n_permutations == 2


def test_one_vs_rest_rejects_bad_target():
    dm = DistanceMatrix(["u", "v"], [[0, 2], [2, 0]])
    with pytest.raises(ValueError):
        one_vs_rest(dm, {"u": "g", "v": "g"}, "g")
    with pytest.raises(ValueError):
        one_vs_rest(dm, {"u": "g", "v": "g"}, "other")


def test_distance_matrix_csv_round_trip(tmp_path):
    dm = random_matrix(5, 3)
    dm.to_csv(tmp_path / "d.csv")
    back = DistanceMatrix.from_csv(tmp_path / "d.csv")
    assert back.ids == dm.ids and np.array_equal(back.values, dm.values)


def test_distance_matrix_validation():
    with pytest.raises(IntegrityError):
        DistanceMatrix("ab", [[0, 1], [2, 0]]).validate()
    with pytest.raises(IntegrityError):
        DistanceMatrix("ab", [[1, 1], [1, 0]]).validate()
    with pytest.raises(ValueError):
        DistanceMatrix("aa")
