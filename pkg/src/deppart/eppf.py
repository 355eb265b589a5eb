"""Marginal partition laws: the Chinese restaurant process and a spatial PPM.

The spatial product partition model weights a partition by
``prod_j M (|S_j| - 1)! g(s*_j)``, where ``g`` is the marginal likelihood of
the cluster's (standardized) coordinates under a bivariate normal with a
normal-inverse-Wishart prior ``NIW(0, 1, nu0, I)``. Only unnormalized weights
and weight ratios are ever needed by the samplers.

For ratios between partitions of *different* unit counts (the reduced
partitions of the gamma update) the spatial weight is divided by the CRP
normalizer ``M (M+1) ... (M+n-1)``, so that it coincides with the CRP EPPF
whenever all coordinates are identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma, log, pi
from typing import Sequence

import numpy as np

from .partition import Partition, canonicalize

LOG_PI = log(pi)


@dataclass(frozen=True)
class EppfSpec:
    """Which partition law to use and its parameters.

    ``coords`` are the (already standardized) unit locations, an ``m x 2``
    array, required for ``kind == "sppm"``.
    """

    kind: str = "crp"
    M: float = 1.0
    nu0: float = 5.0
    coords: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("crp", "sppm"):
            raise ValueError(f"unknown EPPF kind {self.kind!r}")
        if not self.M > 0:
            raise ValueError(f"concentration M must be positive, got {self.M}")
        if self.kind == "sppm":
            if self.coords is None:
                raise ValueError("the spatial PPM needs coordinates")
            c = np.asarray(self.coords, dtype=float)
            if c.ndim != 2 or c.shape[1] != 2:
                raise ValueError("coords must be an m x 2 array")
            if not np.all(np.isfinite(c)):
                raise ValueError("coords contain non-finite values")
            if not self.nu0 > 1:
                raise ValueError(f"nu0 must exceed 1 for 2-d locations, got {self.nu0}")
            object.__setattr__(self, "coords", c)


def _check_M(M: float):
    if not M > 0:
        raise ValueError(f"concentration M must be positive, got {M}")


def log_rising(M: float, n: int) -> float:
    """log of M (M+1) ... (M+n-1)."""
    return lgamma(M + n) - lgamma(M)


def crp_log_prob(p, M: float) -> float:
    """Exact log probability of a partition under CRP(M); the empty partition has log-prob 0."""
    _check_M(M)
    p = p if isinstance(p, Partition) else canonicalize(p)
    if p.m == 0:
        return 0.0
    sizes = p.sizes
    return len(sizes) * log(M) + sum(lgamma(s) for s in sizes) - log_rising(M, p.m)


def crp_log_prob_sizes(sizes: Sequence[int], M: float) -> float:
    n = sum(sizes)
    if n == 0:
        return 0.0
    return len(sizes) * log(M) + sum(lgamma(s) for s in sizes) - log_rising(M, n)


def log_multigamma2(a: float) -> float:
    return 0.5 * LOG_PI + lgamma(a) + lgamma(a - 0.5)


def niw_log_marginal_stats(n: int, sx: float, sy: float, sxx: float, syy: float,
                           sxy: float, nu0: float) -> float:
    """Closed-form NIW(0, 1, nu0, I) log marginal from sufficient statistics."""
    if n == 0:
        return 0.0
    kn = 1.0 + n
    # posterior scale matrix I + sum x x' - (sum x)(sum x)' / (n + 1)
    a = 1.0 + sxx - sx * sx / kn
    d = 1.0 + syy - sy * sy / kn
    b = sxy - sx * sy / kn
    logdet = log(a * d - b * b)
    nun = nu0 + n
    return (-n * LOG_PI
            + log_multigamma2(0.5 * nun) - log_multigamma2(0.5 * nu0)
            - 0.5 * nun * logdet
            - log(kn))


def niw_log_marginal(points, nu0: float) -> float:
    """Log marginal likelihood of 2-d points under N(m, V) with (m, V) ~ NIW(0, 1, nu0, I).

    The empty set has log marginal 0.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite coordinates")
    if not nu0 > 1:
        raise ValueError(f"nu0 must exceed 1, got {nu0}")
    n = pts.shape[0]
    if n == 0:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return niw_log_marginal_stats(n, x.sum(), y.sum(), (x * x).sum(), (y * y).sum(),
                                  (x * y).sum(), nu0)


def _coords_for(spec: EppfSpec, units: Sequence[int] | None, m: int) -> np.ndarray:
    coords = spec.coords
    if units is None:
        if coords.shape[0] != m:
            raise ValueError("partition size does not match number of coordinates")
        return coords
    return coords[np.asarray(units, dtype=int)]


def sppm_log_weight(p, spec: EppfSpec, units: Sequence[int] | None = None) -> float:
    """Unnormalized log spatial-PPM weight: sum over clusters of log cohesion + log similarity.

    ``units`` maps partition positions to rows of ``spec.coords`` when ``p`` is
    a partition of a subset of the units.
    """
    if spec.kind != "sppm" or spec.coords is None:
        raise ValueError("sppm_log_weight needs an sppm spec with coordinates")
    p = p if isinstance(p, Partition) else canonicalize(p)
    if p.m == 0:
        return 0.0
    coords = _coords_for(spec, units, p.m)
    total = 0.0
    for block in p.blocks():
        total += log(spec.M) + lgamma(len(block)) + niw_log_marginal(coords[block], spec.nu0)
    return total


def partition_log_prob(p, spec: EppfSpec, units: Sequence[int] | None = None) -> float:
    """Log probability used for (reduced) partitions.

    Exact for the CRP. For the spatial PPM this is the cohesion-similarity
    product divided by the CRP normalizer, i.e. defined only up to a factor
    that depends on which units are present.
    """
    if spec.kind == "crp":
        return crp_log_prob(p, spec.M)
    p = p if isinstance(p, Partition) else canonicalize(p)
    return sppm_log_weight(p, spec, units) - log_rising(spec.M, p.m)


def seating_log_weights(partial: Sequence[int], seated: Sequence[int], new_unit: int,
                        spec: EppfSpec) -> np.ndarray:
    """Unnormalized log weights for placing ``new_unit`` given already seated units.

    ``partial`` holds cluster labels (1..k) of the units listed in ``seated``.
    Returns k+1 values: joining clusters 1..k, then opening a new cluster.
    """
    partial = list(partial)
    seated = list(seated)
    if len(partial) != len(seated):
        raise ValueError("partial labels and seated units differ in length")
    if new_unit in seated:
        raise ValueError(f"unit {new_unit} is already seated")
    k = max(partial, default=0)
    members: list[list[int]] = [[] for _ in range(k)]
    for lab, u in zip(partial, seated):
        members[lab - 1].append(u)
    out = np.empty(k + 1)
    if spec.kind == "crp":
        for j in range(k):
            out[j] = log(len(members[j]))
        out[k] = log(spec.M)
        return out
    coords = spec.coords
    s_new = coords[[new_unit]]
    for j in range(k):
        pts = coords[members[j]]
        out[j] = (log(len(members[j]))
                  + niw_log_marginal(np.vstack([pts, s_new]), spec.nu0)
                  - niw_log_marginal(pts, spec.nu0))
    out[k] = log(spec.M) + niw_log_marginal(s_new, spec.nu0)
    return out


def standardize_coords(coords) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-axis centering and scaling to unit standard deviation.

    Returns the standardized array plus the means and standard deviations so
    results can be mapped back to the original units.
    """
    c = np.asarray(coords, dtype=float)
    mean = c.mean(axis=0)
    sd = c.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return (c - mean) / sd, mean, sd
