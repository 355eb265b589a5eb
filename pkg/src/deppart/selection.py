"""Fit criteria and posterior summaries computed from saved draws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .partition import Partition, ari_batch, canonical_labels, canonicalize_rows


def _as_matrix(loglik) -> np.ndarray:
    ll = np.asarray(loglik, dtype=float)
    if ll.ndim == 1:
        ll = ll[:, None]
    return ll.reshape(ll.shape[0], -1)


def lppd(loglik) -> float:
    ll = _as_matrix(loglik)
    S = ll.shape[0]
    return float(np.sum(logsumexp(ll, axis=0) - np.log(S)))


def waic(loglik) -> float:
    """WAIC on the deviance scale, -2 (lppd - p_waic); smaller is better.

    ``loglik`` is S draws by n data points (trailing axes are flattened).
    """
    ll = _as_matrix(loglik)
    if ll.shape[0] < 2:
        raise ValueError("WAIC needs at least two draws")
    if not np.all(np.isfinite(ll)):
        raise ValueError("log-likelihood contains non-finite values")
    p_waic = np.sum(np.var(ll, axis=0, ddof=1))
    return float(-2.0 * (lppd(ll) - p_waic))


def lpml(loglik) -> float:
    """Sum of log conditional predictive ordinates (harmonic-mean estimator); larger is better."""
    ll = _as_matrix(loglik)
    if ll.shape[0] < 1:
        raise ValueError("LPML needs at least one draw")
    S = ll.shape[0]
    log_cpo = -(logsumexp(-ll, axis=0) - np.log(S))
    bad = np.flatnonzero(~np.isfinite(log_cpo))
    if bad.size:
        raise FloatingPointError(f"conditional predictive ordinate is not finite for datum {bad[0]}")
    return float(log_cpo.sum())


def coclustering_matrix(labels) -> np.ndarray:
    """Posterior co-clustering probabilities from an (S, m) array of label draws."""
    lab = np.asarray(labels)
    if lab.ndim != 2 or lab.shape[0] < 1:
        raise ValueError("need an (S, m) array with at least one draw")
    S, m = lab.shape
    P = np.zeros((m, m))
    for s in range(S):
        row = lab[s]
        P += row[:, None] == row[None, :]
    return P / S


def binder_loss(labels, P) -> np.ndarray:
    """Expected Binder loss sum_{i<j} |1(c_i = c_j) - P_ij| for each row of ``labels``."""
    lab = np.atleast_2d(np.asarray(labels))
    iu = np.triu_indices(lab.shape[1], 1)
    same = lab[:, :, None] == lab[:, None, :]
    return np.abs(same[:, iu[0], iu[1]] - P[iu]).sum(axis=1)


def vi_lower_bound(labels, P) -> np.ndarray:
    """Jensen lower bound on the expected variation-of-information loss for each row of ``labels``."""
    lab = np.atleast_2d(np.asarray(labels))
    m = lab.shape[1]
    row_p = np.log2(P.sum(axis=1))
    out = np.empty(lab.shape[0])
    for r, c in enumerate(lab):
        same = (c[:, None] == c[None, :]).astype(float)
        out[r] = np.sum(np.log2(same.sum(axis=1)) - 2.0 * np.log2((same * P).sum(axis=1)) + row_p) / m
    return out


LOSSES = {"binder": binder_loss, "vi_lb": vi_lower_bound}


def point_estimate_partition(labels, loss: str = "vi_lb") -> Partition:
    """Sampled partition with the smallest expected loss; ties go to the earliest draw."""
    if loss not in LOSSES:
        raise ValueError(f"unknown loss {loss!r}; choose from {sorted(LOSSES)}")
    lab = canonicalize_rows(np.asarray(labels))
    P = coclustering_matrix(lab)
    uniq, first = np.unique(lab, axis=0, return_index=True)
    order = np.argsort(first)
    uniq = uniq[order]
    scores = LOSSES[loss](uniq, P)
    best = int(np.argmin(np.round(scores, 12)))
    return Partition(canonical_labels(uniq[best]))


def credible_interval(draws, level: float = 0.95, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Equal-tailed interval."""
    q = (1.0 - level) / 2.0
    x = np.asarray(draws, dtype=float)
    return np.quantile(x, q, axis=axis), np.quantile(x, 1.0 - q, axis=axis)


def lagged_ari_matrix(partitions) -> np.ndarray:
    """ARI between every pair of a sequence of partitions (T x T)."""
    lab = np.array([np.asarray(p, dtype=np.int64) for p in partitions])
    T = lab.shape[0]
    A = np.ones((T, T))
    for a in range(T):
        for b in range(a + 1, T):
            A[a, b] = A[b, a] = ari_batch(lab[a][None], lab[b][None])[0]
    return A


@dataclass
class EstimateReport:
    partitions: list[Partition]
    lagged_ari: np.ndarray
    intervals: dict[str, tuple[float, float, float]]  # name -> (mean, lower, upper)
    mu_lower: np.ndarray   # (m, T)
    mu_upper: np.ndarray
    mu_mean: np.ndarray
    waic: float
    lpml: float

    def to_dict(self) -> dict:
        return {
            "waic": self.waic,
            "lpml": self.lpml,
            "partitions": [list(p.labels) for p in self.partitions],
            "lagged_ari": self.lagged_ari.tolist(),
            "intervals": {k: list(v) for k, v in self.intervals.items()},
        }


def estimate_report(chain, loss: str = "vi_lb", level: float = 0.95) -> EstimateReport:
    """Point-estimate partitions per time, their lagged ARI, intervals and fit criteria."""
    T = chain.labels.shape[1]
    parts = [point_estimate_partition(chain.labels[:, t], loss) for t in range(T)]
    intervals = {}
    for name, x in chain.scalar_draws().items():
        lo, hi = credible_interval(x, level)
        intervals[name] = (float(np.mean(x)), float(lo), float(hi))
    mu_lo, mu_hi = credible_interval(chain.mu, level)
    ll = chain.loglik.reshape(chain.loglik.shape[0], -1)
    return EstimateReport(
        partitions=parts,
        lagged_ari=lagged_ari_matrix(parts),
        intervals=intervals,
        mu_lower=mu_lo,
        mu_upper=mu_hi,
        mu_mean=chain.mu.mean(axis=0),
        waic=waic(ll) if ll.shape[0] >= 2 else float("nan"),
        lpml=lpml(ll),
    )
