"""Partition values and the small amount of algebra the rest of the package needs.

A partition of ``m`` units is stored as a tuple of positive integer labels in
first-appearance order: unit 0 is always in cluster 1, the first unit not in
cluster 1 opens cluster 2, and so on. With that convention two partitions are
equal exactly when their label tuples are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

MAX_ENUMERATION_UNITS = 12


class ResourceLimitError(RuntimeError):
    """Raised when a brute-force enumeration would be too large."""


@dataclass(frozen=True)
class Partition:
    """Canonical cluster-label vector (labels start at 1)."""

    labels: tuple[int, ...]

    def __post_init__(self):
        expected = 1
        for lab in self.labels:
            if lab > expected or lab < 1:
                raise ValueError(f"labels {self.labels} are not in canonical form")
            if lab == expected:
                expected += 1

    @property
    def m(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> int:
        return max(self.labels, default=0)

    @property
    def sizes(self) -> tuple[int, ...]:
        counts = [0] * self.k
        for lab in self.labels:
            counts[lab - 1] += 1
        return tuple(counts)

    def blocks(self) -> list[list[int]]:
        """Clusters as lists of 0-based unit indices, in label order."""
        out: list[list[int]] = [[] for _ in range(self.k)]
        for i, lab in enumerate(self.labels):
            out[lab - 1].append(i)
        return out

    def as_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __getitem__(self, i):
        return self.labels[i]

    def __repr__(self) -> str:
        return f"Partition{self.labels}"


EMPTY = Partition(())


def canonical_labels(raw: Sequence[int] | np.ndarray) -> tuple[int, ...]:
    seen: dict = {}
    out = []
    for lab in raw:
        lab = int(lab)
        if lab not in seen:
            seen[lab] = len(seen) + 1
        out.append(seen[lab])
    return tuple(out)


def canonicalize(raw_labels: Sequence[int] | np.ndarray) -> Partition:
    """Relabel clusters by order of first appearance.

    >>> canonicalize([3, 1, 3, 1]).labels
    (1, 2, 1, 2)
    """
    if len(raw_labels) == 0:
        raise ValueError("cannot canonicalize an empty label vector")
    return Partition(canonical_labels(raw_labels))


def canonicalize_rows(labels: np.ndarray) -> np.ndarray:
    """Canonicalize every row of a 2-d integer array (labels in output start at 1)."""
    labels = np.asarray(labels)
    n, m = labels.shape
    out = np.zeros((n, m), dtype=np.int64)
    if n == 0 or m == 0:
        return out
    # remap through a per-row lookup keyed on the original label value
    lo = labels.min()
    span = int(labels.max() - lo) + 1
    lookup = np.zeros((n, span), dtype=np.int64)
    nxt = np.ones(n, dtype=np.int64)
    rows = np.arange(n)
    shifted = labels - lo
    for j in range(m):
        lab = shifted[:, j]
        cur = lookup[rows, lab]
        new = cur == 0
        lookup[rows[new], lab[new]] = nxt[new]
        nxt[new] += 1
        out[:, j] = lookup[rows, lab]
    return out


def _as_partition(p) -> Partition:
    return p if isinstance(p, Partition) else canonicalize(p)


def _pair_counts(p: Sequence[int], q: Sequence[int]) -> tuple[float, float, float, float]:
    n = len(p)
    table: dict[tuple[int, int], int] = {}
    rows: dict[int, int] = {}
    cols: dict[int, int] = {}
    for a, b in zip(p, q):
        table[(a, b)] = table.get((a, b), 0) + 1
        rows[a] = rows.get(a, 0) + 1
        cols[b] = cols.get(b, 0) + 1
    index = sum(comb(v, 2) for v in table.values())
    sum_rows = sum(comb(v, 2) for v in rows.values())
    sum_cols = sum(comb(v, 2) for v in cols.values())
    return index, sum_rows, sum_cols, comb(n, 2)


def adjusted_rand_index(p, q) -> float:
    """Hubert-Arabie adjusted Rand index between two partitions of the same units.

    When the chance-corrected denominator vanishes (both partitions all
    singletons, both a single cluster, or m < 2) the result is 1.0 for
    identical partitions and 0.0 otherwise.
    """
    p = _as_partition(p)
    q = _as_partition(q)
    if p.m != q.m:
        raise ValueError(f"partition sizes differ: {p.m} != {q.m}")
    index, a, b, total = _pair_counts(p.labels, q.labels)
    if total == 0:
        return 1.0
    expected = a * b / total
    max_index = 0.5 * (a + b)
    denom = max_index - expected
    if denom == 0:
        return 1.0 if p == q else 0.0
    return (index - expected) / denom


def ari_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise adjusted Rand index for two (n, m) arrays of labels.

    Labels must be integers in ``0..L-1`` or ``1..L`` (any small non-negative
    range works); rows need not be canonical.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("label arrays must have the same shape")
    n, m = a.shape
    if m < 2:
        return np.ones(n)
    L = int(max(a.max(), b.max())) + 1
    offsets = (np.arange(n, dtype=np.int64) * L * L)[:, None]
    cont = np.bincount((offsets + a * L + b).ravel(), minlength=n * L * L)
    cont = cont.reshape(n, L, L).astype(np.float64)
    index = (cont * (cont - 1) / 2).sum(axis=(1, 2))
    rs = cont.sum(axis=2)
    cs = cont.sum(axis=1)
    sa = (rs * (rs - 1) / 2).sum(axis=1)
    sb = (cs * (cs - 1) / 2).sum(axis=1)
    total = m * (m - 1) / 2
    expected = sa * sb / total
    denom = 0.5 * (sa + sb) - expected
    out = np.empty(n)
    ok = denom != 0
    out[ok] = (index[ok] - expected[ok]) / denom[ok]
    same = np.all(canonicalize_rows(a[~ok]) == canonicalize_rows(b[~ok]), axis=1)
    out[~ok] = np.where(same, 1.0, 0.0)
    return out


def restrict(p, keep: Iterable[int]) -> Partition:
    """Partition induced on the units in ``keep`` (0-based), canonicalized.

    Units are taken in increasing index order regardless of the order of ``keep``.
    """
    p = _as_partition(p)
    idx = sorted(set(int(i) for i in keep))
    for i in idx:
        if i < 0 or i >= p.m:
            raise ValueError(f"unit index {i} out of range for m={p.m}")
    if not idx:
        return EMPTY
    return Partition(canonical_labels([p.labels[i] for i in idx]))


def is_compatible(rho_t, rho_prev, gamma_t: Sequence[int]) -> bool:
    """True when the two partitions agree on the units flagged ``gamma == 1``."""
    rho_t = _as_partition(rho_t)
    rho_prev = _as_partition(rho_prev)
    if not (rho_t.m == rho_prev.m == len(gamma_t)):
        raise ValueError("partition and gamma sizes differ")
    fixed = [i for i, g in enumerate(gamma_t) if g]
    return restrict(rho_t, fixed) == restrict(rho_prev, fixed)


def _restricted_growth(m: int):
    # restricted growth strings enumerate set partitions in lexicographic order
    if m == 0:
        yield ()
        return
    labels = [1] * m
    maxes = [1] * m
    while True:
        yield tuple(labels)
        j = m - 1
        while j > 0 and labels[j] == maxes[j - 1] + 1:
            j -= 1
        if j == 0:
            return
        labels[j] += 1
        maxes[j] = max(maxes[j - 1], labels[j])
        for r in range(j + 1, m):
            labels[r] = 1
            maxes[r] = maxes[j]


def enumerate_partitions(m: int) -> list[Partition]:
    """All set partitions of ``m`` units in lexicographic canonical order."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if m > MAX_ENUMERATION_UNITS:
        raise ResourceLimitError(
            f"refusing to enumerate Bell({m}) partitions (limit m <= {MAX_ENUMERATION_UNITS})"
        )
    return [Partition(lab) for lab in _restricted_growth(m)]


def co_clustered_pairs(p) -> set[tuple[int, int]]:
    p = _as_partition(p)
    return {(i, j) for i, j in combinations(range(p.m), 2) if p.labels[i] == p.labels[j]}
