"""Brute-force references used by the tests."""
from __future__ import annotations

import itertools

import numpy as np


def matchings(n: int, m: int):
    """Every partial injective matching between range(n) and range(m)."""
    for k in range(min(n, m) + 1):
        for left in itertools.combinations(range(n), k):
            for right in itertools.permutations(range(m), k):
                yield list(zip(left, right))


def brute_distances(a, b) -> tuple[float, float]:
    """(bottleneck, 1-Wasserstein) by enumerating all matchings-with-diagonal."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    best_inf = best_one = np.inf
    for pairs in matchings(len(a), len(b)):
        used_a = {i for i, _ in pairs}
        used_b = {j for _, j in pairs}
        linf, l1 = [], []
        for i, j in pairs:
            d = np.abs(a[i] - b[j])
            linf.append(d.max())
            l1.append(d.sum())
        for i in range(len(a)):
            if i not in used_a:
                linf.append((a[i, 1] - a[i, 0]) / 2)
                l1.append(a[i, 1] - a[i, 0])
        for j in range(len(b)):
            if j not in used_b:
                linf.append((b[j, 1] - b[j, 0]) / 2)
                l1.append(b[j, 1] - b[j, 0])
        best_inf = min(best_inf, max(linf, default=0.0))
        best_one = min(best_one, sum(l1))
    return float(best_inf), float(best_one)


def random_diagram(rng, k: int, high: int = 256) -> np.ndarray:
    births = rng.integers(0, high - 1, k)
    lengths = rng.integers(1, 60, k)
    return np.stack([births, np.minimum(births + lengths, high)], axis=1).astype(float)
