"""Synthetic panels drawn from the partition prior with normal cluster atoms.

``sim1``: partitions from the temporal CRP prior, atoms iid N(theta, tau^2) per
(cluster, time), responses N(atom, sigma^2).

``sim2``: as ``sim1`` but atoms follow an AR(1) along cluster lineages. A cluster
at time t that contains units kept from t-1 inherits the atom of their t-1
cluster as its parent, ``mu*_t ~ N(phi1 * parent, tau^2 (1 - phi1^2))``; any
other cluster draws from the stationary N(0, tau^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eppf import EppfSpec
from .prior import TrpmParams, sample_joint_prior, seed_sequence


@dataclass
class SynthConfig:
    mode: str = "sim1"
    m: int = 50
    T: int = 5
    alpha: float = 0.5
    M: float = 1.0
    sigma: float = 1.0
    tau: float = 5.0
    theta: float = 0.0
    phi1: float = 0.0
    n_replicates: int = 1

    def validate(self):
        if self.mode not in ("sim1", "sim2"):
            raise ValueError(f"unknown synth mode {self.mode!r}; use 'sim1' or 'sim2'")
        if self.m < 1 or self.T < 1 or self.n_replicates < 1:
            raise ValueError("m, T and n_replicates must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not (self.sigma > 0 and self.tau > 0 and self.M > 0):
            raise ValueError("sigma, tau and M must be positive")
        if not -1.0 < self.phi1 < 1.0:
            raise ValueError("phi1 must lie in (-1, 1)")
        return self

    @classmethod
    def sim1(cls, alpha: float, **kw) -> "SynthConfig":
        return cls(mode="sim1", m=50, T=5, alpha=alpha, M=1.0, sigma=1.0, tau=5.0, theta=0.0, **kw)

    @classmethod
    def sim2(cls, alpha: float, phi1: float, **kw) -> "SynthConfig":
        return cls(mode="sim2", m=25, T=10, alpha=alpha, M=1.0, sigma=1.0, tau=10.0, phi1=phi1, **kw)


@dataclass
class SynthData:
    Y: np.ndarray          # (m, T)
    labels: np.ndarray     # (T, m) canonical, 1-based
    gammas: np.ndarray     # (T, m)
    mu: np.ndarray         # (m, T) mean of each unit's cluster
    atoms: list[np.ndarray] = field(default_factory=list)  # per time, indexed by label - 1


def generate(config: SynthConfig, seed) -> SynthData:
    config.validate()
    ss = seed_sequence(seed)
    part_seed, atom_seed = ss.spawn(2)
    c = config
    params = TrpmParams(c.m, c.T, (c.alpha,) * c.T, EppfSpec("crp", c.M))
    draw = sample_joint_prior(params, part_seed)
    labels = draw.labels
    rng = np.random.default_rng(atom_seed)
    atoms = []
    for t in range(c.T):
        k = labels[t].max()
        if c.mode == "sim1" or t == 0:
            a = rng.normal(c.theta if c.mode == "sim1" else 0.0, c.tau, size=k)
        else:
            a = np.empty(k)
            kept = np.flatnonzero(draw.gammas[t])
            for j in range(k):
                members = kept[labels[t, kept] == j + 1]
                if members.size:
                    parent = atoms[t - 1][labels[t - 1, members[0]] - 1]
                    a[j] = rng.normal(c.phi1 * parent, c.tau * np.sqrt(1.0 - c.phi1 ** 2))
                else:
                    a[j] = rng.normal(0.0, c.tau)
        atoms.append(a)
    mu = np.stack([atoms[t][labels[t] - 1] for t in range(c.T)], axis=1)
    Y = mu + rng.normal(0.0, c.sigma, size=mu.shape)
    return SynthData(Y=Y, labels=labels, gammas=draw.gammas, mu=mu, atoms=atoms)


def generate_replicates(config: SynthConfig, seed) -> list[SynthData]:
    children = seed_sequence(seed).spawn(config.n_replicates)
    return [generate(config, ch) for ch in children]


def lag1_autocorrelation(Y: np.ndarray) -> np.ndarray:
    """Per-unit lag-1 autocorrelation of rows of Y about a known zero mean.

    Using the known mean keeps the estimator centred at 0 for serially
    independent symmetric series, unlike the sample-mean version whose bias is
    about -1/T.
    """
    Y = np.asarray(Y, dtype=float)
    T = Y.shape[1]
    num = (Y[:, :-1] * Y[:, 1:]).sum(axis=1) / (T - 1)
    den = (Y * Y).sum(axis=1) / T
    return num / den
