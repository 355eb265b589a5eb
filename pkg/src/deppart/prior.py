"""Forward simulation of the temporal random partition prior and its exact small-m conditionals.

At every time step after the first, each unit independently keeps its
cluster relation from the previous step with probability ``alpha_t``
(``gamma = 1``). The kept units form a reduced partition copied from the
previous step and the remaining units are seated one at a time, in random
order, with the EPPF's predictive weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log
from typing import Sequence

import numpy as np

from .eppf import EppfSpec, crp_log_prob, niw_log_marginal_stats, sppm_log_weight
from .partition import (
    Partition,
    ResourceLimitError,
    ari_batch,
    canonical_labels,
    canonicalize_rows,
    enumerate_partitions,
)

MAX_TABLE_UNITS = 10


def seed_sequence(seed) -> np.random.SeedSequence:
    """Accept an int, a sequence of ints or an existing SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


@dataclass(frozen=True)
class TrpmParams:
    m: int
    T: int
    alpha: tuple[float, ...]
    eppf: EppfSpec = field(default_factory=EppfSpec)

    def __post_init__(self):
        if self.m < 1 or self.T < 1:
            raise ValueError("need m >= 1 and T >= 1")
        alpha = tuple(float(a) for a in np.broadcast_to(self.alpha, (self.T,)))
        if any(not 0.0 <= a <= 1.0 for a in alpha):
            raise ValueError(f"alpha values must lie in [0, 1], got {alpha}")
        object.__setattr__(self, "alpha", alpha)
        if self.eppf.kind == "sppm" and self.eppf.coords.shape[0] != self.m:
            raise ValueError("number of coordinates does not match m")


@dataclass(frozen=True)
class PriorDraw:
    partitions: tuple[Partition, ...]
    gammas: np.ndarray  # (T, m) of 0/1

    @property
    def labels(self) -> np.ndarray:
        return np.array([p.labels for p in self.partitions], dtype=np.int64)


class _Seating:
    """Cluster bookkeeping for sequential seating at one time step."""

    def __init__(self, spec: EppfSpec):
        self.spec = spec
        self.count: dict[int, int] = {}
        self.stats: dict[int, list[float]] = {}
        self.next_id = 0

    def add(self, cid: int, unit: int):
        self.count[cid] = self.count.get(cid, 0) + 1
        self.next_id = max(self.next_id, cid + 1)
        if self.spec.kind == "sppm":
            x, y = self.spec.coords[unit]
            st = self.stats.setdefault(cid, [0.0] * 5)
            st[0] += x
            st[1] += y
            st[2] += x * x
            st[3] += y * y
            st[4] += x * y

    def log_weights(self, unit: int) -> tuple[list[int], np.ndarray]:
        ids = list(self.count)
        w = np.empty(len(ids) + 1)
        spec = self.spec
        if spec.kind == "crp":
            for j, cid in enumerate(ids):
                w[j] = log(self.count[cid])
            w[-1] = log(spec.M)
        else:
            x, y = spec.coords[unit]
            nu0 = spec.nu0
            for j, cid in enumerate(ids):
                n = self.count[cid]
                st = self.stats[cid]
                w[j] = (log(n)
                        + niw_log_marginal_stats(n + 1, st[0] + x, st[1] + y, st[2] + x * x,
                                                 st[3] + y * y, st[4] + x * y, nu0)
                        - niw_log_marginal_stats(n, *st, nu0))
            w[-1] = log(spec.M) + niw_log_marginal_stats(1, x, y, x * x, y * y, x * y, nu0)
        return ids, w


def _draw_step(prev: Sequence[int] | None, alpha: float, spec: EppfSpec, m: int,
               rng: np.random.Generator) -> tuple[tuple[int, ...], np.ndarray]:
    if prev is None:
        gamma = np.zeros(m, dtype=np.int8)
    else:
        gamma = (rng.random(m) < alpha).astype(np.int8)
    seats = _Seating(spec)
    labels = [-1] * m
    if prev is not None:
        for i in np.flatnonzero(gamma):
            labels[i] = prev[i]
            seats.add(prev[i], i)
    free = np.flatnonzero(gamma == 0)
    for i in rng.permutation(free):
        ids, lw = seats.log_weights(i)
        p = np.exp(lw - lw.max())
        j = rng.choice(len(p), p=p / p.sum())
        cid = ids[j] if j < len(ids) else max(seats.next_id, m + 1)
        labels[i] = cid
        seats.add(cid, i)
    return canonical_labels(labels), gamma


def sample_joint_prior(params: TrpmParams, seed) -> PriorDraw:
    """One draw of (gamma_1, rho_1, ..., gamma_T, rho_T) from the temporal partition prior.

    Each time step consumes its own child stream of ``SeedSequence(seed)``.
    """
    streams = seed_sequence(seed).spawn(params.T)
    parts = []
    gammas = np.zeros((params.T, params.m), dtype=np.int8)
    prev = None
    for t in range(params.T):
        rng = np.random.default_rng(streams[t])
        labels, gamma = _draw_step(prev, params.alpha[t], params.eppf, params.m, rng)
        gammas[t] = gamma
        parts.append(Partition(labels))
        prev = labels
    return PriorDraw(tuple(parts), gammas)


def _crp_batch(n: int, m: int, alpha: Sequence[float], M: float,
               rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    T = len(alpha)
    labels = np.empty((n, T, m), dtype=np.int64)
    gammas = np.zeros((n, T, m), dtype=np.int8)
    rows = np.arange(n)
    width = 2 * m
    prev = None
    for t in range(T):
        if prev is None:
            fixed = np.zeros((n, m), dtype=bool)
        else:
            fixed = rng.random((n, m)) < alpha[t]
        lab = np.where(fixed, (prev - 1) if prev is not None else 0, -1)
        counts = np.zeros((n, width), dtype=np.float64)
        if prev is not None:
            fr, fc = np.nonzero(fixed)
            np.add.at(counts, (fr, lab[fr, fc]), 1.0)
        nxt = np.full(n, m, dtype=np.int64)
        order = np.argsort(rng.random((n, m)), axis=1)
        for pos in range(m):
            u = order[:, pos]
            free = ~fixed[rows, u]
            cum = np.cumsum(counts, axis=1)
            r = rng.random(n) * (cum[:, -1] + M)
            j = (cum <= r[:, None]).sum(axis=1)
            is_new = j >= width
            choice = np.where(is_new, nxt, j)
            fr = rows[free]
            lab[fr, u[free]] = choice[free]
            counts[fr, choice[free]] += 1.0
            nxt[free & is_new] += 1
        prev = canonicalize_rows(lab)
        labels[:, t] = prev
        gammas[:, t] = fixed
    return labels, gammas


def sample_prior_batch(params: TrpmParams, n_draws: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Many independent prior draws as arrays ``labels (n, T, m)`` and ``gammas (n, T, m)``.

    The CRP case is vectorized across draws; the spatial case loops over draws,
    with draw ``r`` using ``sample_joint_prior`` on the r-th child seed.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    ss = seed_sequence(seed)
    if params.eppf.kind == "crp":
        return _crp_batch(n_draws, params.m, params.alpha, params.eppf.M,
                          np.random.default_rng(ss))
    labels = np.empty((n_draws, params.T, params.m), dtype=np.int64)
    gammas = np.empty((n_draws, params.T, params.m), dtype=np.int8)
    for r, child in enumerate(ss.spawn(n_draws)):
        d = sample_joint_prior(params, child)
        labels[r] = d.labels
        gammas[r] = d.gammas
    return labels, gammas


def _pair_bits(labels: np.ndarray) -> np.ndarray:
    # one bit per unordered pair (i < j), set when i and j share a cluster
    m = labels.shape[1]
    bits = np.zeros(labels.shape[0], dtype=np.int64)
    b = 0
    for i in range(m):
        for j in range(i + 1, m):
            bits |= (labels[:, i] == labels[:, j]).astype(np.int64) << b
            b += 1
    return bits


def _subset_pair_mask(subset: int, m: int) -> int:
    mask = 0
    b = 0
    for i in range(m):
        for j in range(i + 1, m):
            if (subset >> i) & 1 and (subset >> j) & 1:
                mask |= 1 << b
            b += 1
    return mask


def partition_log_probs(parts: Sequence[Partition], eppf: EppfSpec) -> np.ndarray:
    """Log probabilities of a full list of partitions of m units (normalized over the list)."""
    if eppf.kind == "crp":
        return np.array([crp_log_prob(p, eppf.M) for p in parts])
    lw = np.array([sppm_log_weight(p, eppf) for p in parts])
    mx = lw.max()
    return lw - (mx + np.log(np.exp(lw - mx).sum()))


def exact_conditional_table(rho_prev, alpha: float, eppf: EppfSpec) -> dict[Partition, float]:
    """Exact one-step transition law Pr(rho_t | rho_{t-1}) by enumeration.

    Sums over all 2^m keep-sets; for each, the EPPF is renormalized over the
    partitions that agree with ``rho_prev`` on the kept units.
    """
    rho_prev = rho_prev if isinstance(rho_prev, Partition) else Partition(canonical_labels(rho_prev))
    m = rho_prev.m
    if m > MAX_TABLE_UNITS:
        raise ResourceLimitError(f"exact tables are limited to m <= {MAX_TABLE_UNITS}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    parts = enumerate_partitions(m)
    arr = np.array([p.labels for p in parts], dtype=np.int64)
    prob = np.exp(partition_log_probs(parts, eppf))
    bits = _pair_bits(arr)
    prev_bits = _pair_bits(np.array([rho_prev.labels]))[0]
    diff = bits ^ prev_bits
    table = np.zeros(len(parts))
    for subset in range(1 << m):
        size = bin(subset).count("1")
        w = alpha ** size * (1.0 - alpha) ** (m - size)
        if w == 0.0:
            continue
        ok = (diff & _subset_pair_mask(subset, m)) == 0
        z = prob[ok].sum()
        table[ok] += w * prob[ok] / z
    return {p: float(v) for p, v in zip(parts, table)}


@dataclass(frozen=True)
class LaggedAri:
    """Monte Carlo mean lagged ARI. Index ``l - 1`` holds lag ``l``."""

    lags: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    n_draws: int


def lagged_ari_from_labels(labels: np.ndarray) -> np.ndarray:
    """Per-draw lagged ARI averaged over start times, shape (n, T-1)."""
    n, T, _ = labels.shape
    out = np.zeros((n, max(T - 1, 0)))
    for lag in range(1, T):
        acc = np.zeros(n)
        for t in range(T - lag):
            acc += ari_batch(labels[:, t], labels[:, t + lag])
        out[:, lag - 1] = acc / (T - lag)
    return out


def lagged_ari_summary(params: TrpmParams, n_draws: int, seed) -> LaggedAri:
    """Mean ARI between partitions ``lag`` steps apart, with Monte Carlo standard errors.

    The standard error is NaN when ``n_draws == 1``.
    """
    labels, _ = sample_prior_batch(params, n_draws, seed)
    per_draw = lagged_ari_from_labels(labels)
    mean = per_draw.mean(axis=0)
    if n_draws > 1:
        se = per_draw.std(axis=0, ddof=1) / np.sqrt(n_draws)
    else:
        se = np.full(mean.shape, np.nan)
    return LaggedAri(np.arange(1, params.T), mean, se, n_draws)
