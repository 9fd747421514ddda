"""Permutation tests on average cross-sample distances.

The test statistic for a split of the pooled ids into samples ``A`` and
``B`` is the mean distance between an element of ``A`` and an element of
``B``. Splits keep the observed sample sizes. When the number of splits
``C(n, |A|)`` does not exceed the permutation budget every split is
enumerated; otherwise splits are drawn uniformly at random.
"""
from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import IntegrityError
from .metrics import cross_average

log = logging.getLogger(__name__)

DEFAULT_N_PERMS = 10_000
DEFAULT_ALPHA = 0.05
BLOCK_SIZE = 1000
# relative tolerance for deciding that two statistics tie
TIE_RTOL = 1e-12


class DistanceMatrix:
    """Symmetric pairwise distances over an ordered list of ids.

    Missing entries are NaN until filled; lookups of missing entries raise
    ``IntegrityError``.
    """

    def __init__(self, ids, values=None):
        self.ids = tuple(str(i) for i in ids)
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("ids must be unique")
        n = len(self.ids)
        if values is None:
            values = np.full((n, n), np.nan)
            np.fill_diagonal(values, 0.0)
        values = np.array(values, dtype=np.float64)
        if values.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got {values.shape}")
        self.values = values
        self._index = {k: i for i, k in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def __repr__(self) -> str:
        return f"DistanceMatrix(n={len(self)})"

    def index_of(self, id_) -> int:
        try:
            return self._index[str(id_)]
        except KeyError:
            raise IntegrityError(f"id {id_!r} is not in the distance matrix") from None

    def __getitem__(self, key) -> float:
        i, j = (self.index_of(k) for k in key)
        v = self.values[i, j]
        if np.isnan(v):
            raise IntegrityError(f"missing distance for {key}")
        return float(v)

    def __setitem__(self, key, value: float) -> None:
        i, j = (self.index_of(k) for k in key)
        self.values[i, j] = self.values[j, i] = value

    @property
    def complete(self) -> bool:
        return not np.isnan(self.values).any()

    def validate(self) -> None:
        v = self.values
        if np.isnan(v).any():
            raise IntegrityError("distance matrix has missing entries")
        if not np.array_equal(v, v.T):
            raise IntegrityError("distance matrix is not symmetric")
        if (v < 0).any() or (np.diag(v) != 0).any():
            raise IntegrityError("distances must be non-negative with a zero diagonal")

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["", *self.ids])
        for name, row in zip(self.ids, self.values):
            writer.writerow([name, *(repr(float(x)) for x in row)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "DistanceMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise IntegrityError(f"{path}: empty distance matrix file")
        ids = rows[0][1:]
        if [r[0] for r in rows[1:]] != ids:
            raise IntegrityError(f"{path}: row and column ids differ")
        values = [[float(x) if x else 0.0 for x in r[1:]] for r in rows[1:]]
        dm = cls(ids, values)
        dm.validate()
        return dm


@dataclass(frozen=True)
class PermutationOutcome:
    """Result of one permutation test.

    ``q`` is the fraction of split statistics at or below the observed one
    (add-one corrected in Monte-Carlo mode). ``flag`` is ``"MAX"`` or
    ``"MIN"`` when the observed statistic is strictly above or below every
    other split's statistic, else ``"NONE"``.
    """

    observed: float
    q: float
    n_permutations: int
    n_le: int
    n_ge: int
    mode: str
    seed: int | None
    flag: str
    significant: bool
    attainable: bool
    alpha: float
    size_a: int
    size_b: int

    def to_dict(self) -> dict:
        return asdict(self)


def _split_statistics(values: np.ndarray, masks: np.ndarray, size_a: int) -> np.ndarray:
    """Average cross distance for every boolean row of ``masks``."""
    m = masks.astype(np.float64)
    size_b = values.shape[0] - size_a
    cross = np.einsum("ij,ij->i", m @ values, 1.0 - m)
    return cross / (size_a * size_b)


def _random_masks(n: int, size_a: int, count: int, seed: int, block: int) -> np.ndarray:
    rng = np.random.default_rng([seed, block])
    picks = rng.random((count, n)).argsort(axis=1)[:, :size_a]
    masks = np.zeros((count, n), dtype=bool)
    np.put_along_axis(masks, picks, True, axis=1)
    return masks


def _all_masks(n: int, size_a: int) -> np.ndarray:
    combos = np.array(list(itertools.combinations(range(n), size_a)), dtype=np.int64)
    masks = np.zeros((len(combos), n), dtype=bool)
    np.put_along_axis(masks, combos, True, axis=1)
    return masks


def permutation_test(
    dmat: DistanceMatrix,
    labels_a,
    n_perms: int = DEFAULT_N_PERMS,
    seed: int = 0,
    alpha: float = DEFAULT_ALPHA,
    workers: int = 1,
    method: str = "auto",
) -> PermutationOutcome:
    """Two-sample permutation test with the average cross distance statistic.

    Parameters
    ----------
    dmat : DistanceMatrix
        Complete distances over the pooled sample.
    labels_a : iterable of ids
        Sample ``A``; the complement in ``dmat`` is sample ``B``.
    n_perms : int
        Random split budget. Enumeration is used when there are at most
        this many distinct splits.
    seed : int
        Seed for the Monte-Carlo draws. Draws come in fixed blocks of
        ``BLOCK_SIZE`` seeded by ``(seed, block index)``, so results do not
        depend on ``workers``.
    alpha : float
        Two-sided level: significant when ``q <= alpha/2`` or
        ``q >= 1 - alpha/2``, provided the split count can resolve
        ``alpha/2`` at all.
    method : {"auto", "exhaustive", "monte-carlo"}
        ``"auto"`` enumerates whenever that is no more work than sampling.
    """
    if n_perms < 1:
        raise ValueError("n_perms must be >= 1")
    if method not in ("auto", "exhaustive", "monte-carlo"):
        raise ValueError(f"unknown method {method!r}")
    ids_a = list(dict.fromkeys(str(i) for i in labels_a))
    idx_a = [dmat.index_of(i) for i in ids_a]
    n = len(dmat)
    size_a = len(idx_a)
    size_b = n - size_a
    if size_a == 0 or size_b == 0:
        raise ValueError("sample A must be a non-empty proper subset of the ids")
    dmat.validate()
    values = dmat.values

    observed_mask = np.zeros(n, dtype=bool)
    observed_mask[idx_a] = True
    ids_b = [dmat.ids[i] for i in range(n) if not observed_mask[i]]
    observed = cross_average(dmat, ids_a, ids_b)
    tol = TIE_RTOL * max(1.0, abs(observed))

    n_splits = math.comb(n, size_a)
    if method == "exhaustive" or (method == "auto" and n_splits <= n_perms):
        mode = "exhaustive"
        masks = _all_masks(n, size_a)
        stats = _split_statistics(values, masks, size_a)
        same = (masks == observed_mask).all(axis=1)
        if size_a == size_b:
            # the complement is the same partition with the roles swapped
            same |= (masks == ~observed_mask).all(axis=1)
        n_le = int((stats <= observed + tol).sum())
        n_ge = int((stats >= observed - tol).sum())
        total = len(stats)
        q = n_le / total
        others = stats[~same]
        used_seed = None
    else:
        mode = "monte-carlo"
        blocks = [(b, min(BLOCK_SIZE, n_perms - b * BLOCK_SIZE)) for b in range(-(-n_perms // BLOCK_SIZE))]

        def run(block):
            b, count = block
            masks = _random_masks(n, size_a, count, seed, b)
            stats = _split_statistics(values, masks, size_a)
            same = (masks == observed_mask).all(axis=1)
            if size_a == size_b:
                same |= (masks == ~observed_mask).all(axis=1)
            return stats, same

        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(run, blocks))
        else:
            parts = [run(b) for b in blocks]
        stats = np.concatenate([p[0] for p in parts])
        same = np.concatenate([p[1] for p in parts])
        n_le = int((stats <= observed + tol).sum()) + 1
        n_ge = int((stats >= observed - tol).sum()) + 1
        total = len(stats) + 1
        q = n_le / total
        others = stats[~same]
        used_seed = seed

    if others.size and (others > observed + tol).all():
        flag = "MIN"
    elif others.size and (others < observed - tol).all():
        flag = "MAX"
    else:
        flag = "NONE"

    attainable = 1.0 / total <= alpha / 2
    significant = attainable and (q <= alpha / 2 or q >= 1 - alpha / 2)
    if n_le == total and n_ge == total:
        warnings.warn("every split statistic ties with the observed one", RuntimeWarning, stacklevel=2)
    if not attainable:
        log.info("%d splits cannot resolve alpha/2 = %g; reporting the flag only", total, alpha / 2)

    return PermutationOutcome(
        observed=observed,
        q=q,
        n_permutations=len(stats),
        n_le=n_le,
        n_ge=n_ge,
        mode=mode,
        seed=used_seed,
        flag=flag,
        significant=bool(significant),
        attainable=bool(attainable),
        alpha=alpha,
        size_a=size_a,
        size_b=size_b,
    )


def one_vs_rest(
    dmat: DistanceMatrix,
    groups: dict,
    target,
    n_perms: int = DEFAULT_N_PERMS,
    seed: int = 0,
    alpha: float = DEFAULT_ALPHA,
    workers: int = 1,
) -> PermutationOutcome:
    """Test one group's ids against all remaining ids of ``dmat``."""
    members = [i for i in dmat.ids if groups.get(i) == target]
    if not members:
        raise ValueError(f"group {target!r} has no members in the distance matrix")
    if len(members) == len(dmat):
        raise ValueError(f"group {target!r} covers the whole collection")
    return permutation_test(dmat, members, n_perms=n_perms, seed=seed, alpha=alpha, workers=workers)
