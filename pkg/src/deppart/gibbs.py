"""Posterior simulation for the hierarchical Gaussian model with a dependent partition prior.

Model (indices: unit i, time t, cluster j)::

    Y_it | Y_i,t-1  ~ N(mu*_{c_it,t} + eta_i Y_i,t-1, sigma*^2_{c_it,t} (1 - eta_i^2))   (t > 1)
    Y_i1            ~ N(mu*_{c_i1,1}, sigma*^2_{c_i1,1})
    xi_i = logit((eta_i + 1) / 2) ~ Laplace(a, b)
    (mu*_jt, sigma*_jt) ~ N(theta_t, tau^2) x U(0, A_sigma)
    theta_t | theta_t-1 ~ N(phi0 + phi1 theta_t-1, lambda^2 (1 - phi1^2)),  theta_1 ~ N(phi0, lambda^2)
    tau ~ U(0, A_tau),  phi0 ~ N(0, s2),  phi1 ~ U(-1, 1),  lambda ~ U(0, A_lambda)
    partitions ~ temporal random partition prior with alpha_t ~ Beta(a_alpha, b_alpha)

Switching off ``likelihood_ar`` pins eta at 0, ``atom_ar`` pins phi1 at 0 and
``partition_dependence`` pins alpha at 0, which recovers the simpler
simulation model with independent partitions.

All time indices in this module are 0-based.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import _kernels as K
from .eppf import EppfSpec
from .partition import Partition, canonical_labels, canonicalize_rows

log = logging.getLogger(__name__)

FIXABLE = ("alpha", "theta", "tau", "phi0", "phi1", "lambda", "eta")


class NumericalError(RuntimeError):
    """A Metropolis step produced a NaN acceptance ratio."""

    def __init__(self, message: str, sweep: int | None = None, state: dict | None = None):
        super().__init__(message)
        self.sweep = sweep
        self.state = state

    def __reduce__(self):
        return (type(self), (str(self), self.sweep, self.state))


@dataclass
class Dataset:
    """Responses ``Y`` (m x T), optional standardized coordinates (m x 2) and identifiers."""

    Y: np.ndarray
    coords: np.ndarray | None = None
    unit_ids: list[str] | None = None
    time_ids: list[str] | None = None

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=np.float64)
        if self.Y.ndim != 2:
            raise ValueError("Y must be an m x T matrix")
        if not np.all(np.isfinite(self.Y)):
            bad = np.argwhere(~np.isfinite(self.Y))[0]
            raise ValueError(f"Y has a non-finite entry at unit {bad[0]}, time {bad[1]}")
        if self.coords is not None:
            self.coords = np.asarray(self.coords, dtype=np.float64)
            if self.coords.shape != (self.m, 2):
                raise ValueError(f"coords must be {self.m} x 2, got {self.coords.shape}")
            if not np.all(np.isfinite(self.coords)):
                raise ValueError("coords contain non-finite values")
        if self.unit_ids is None:
            self.unit_ids = [str(i + 1) for i in range(self.m)]
        if self.time_ids is None:
            self.time_ids = [str(t + 1) for t in range(self.T)]

    @property
    def m(self) -> int:
        return self.Y.shape[0]

    @property
    def T(self) -> int:
        return self.Y.shape[1]


@dataclass
class ModelConfig:
    partition_dependence: bool = True
    likelihood_ar: bool = False
    atom_ar: bool = False
    spatial: bool = False

    M: float = 1.0
    nu0: float = 5.0
    A_sigma: float = 5.0
    A_tau: float = 10.0
    A_lambda: float = 10.0
    s2: float = 100.0
    laplace_a: float = 0.0
    laplace_b: float = 1.0
    a_alpha: float = 1.0
    b_alpha: float = 1.0

    iterations: int = 10000
    burn_in: int = 5000
    thin: int = 5
    seed: int = 0
    # proposal sds; None means the default 0.1 * upper bound (0.2 for xi and phi1)
    prop_sigma: float | None = None
    prop_tau: float | None = None
    prop_lambda: float | None = None
    prop_phi1: float = 0.2
    prop_xi: float = 0.2

    # parameters held at a given value instead of being sampled
    fixed: dict[str, Any] = field(default_factory=dict)
    update_partitions: bool = True

    def validate(self):
        for name in ("M", "A_sigma", "A_tau", "A_lambda", "s2", "laplace_b", "a_alpha", "b_alpha"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        if self.spatial and not self.nu0 > 1:
            raise ValueError("nu0 must exceed 1")
        if self.iterations < 1 or self.burn_in < 0 or self.thin < 1:
            raise ValueError("need iterations >= 1, burn_in >= 0, thin >= 1")
        if self.burn_in >= self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        for name in ("prop_sigma", "prop_tau", "prop_lambda", "prop_phi1", "prop_xi"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        unknown = set(self.fixed) - set(FIXABLE)
        if unknown:
            raise ValueError(f"cannot fix unknown parameters {sorted(unknown)}")
        return self

    @property
    def n_saved(self) -> int:
        return len(range(self.burn_in + self.thin, self.iterations + 1, self.thin))

    def variant_name(self) -> str:
        return "part{}_lik{}_atom{}_sp{}".format(
            int(self.partition_dependence), int(self.likelihood_ar), int(self.atom_ar),
            int(self.spatial))

    def _flags(self) -> np.ndarray:
        f = np.zeros(K.N_FLAGS, dtype=np.int64)
        fixed = self.fixed
        f[K.F_SPATIAL] = self.spatial
        f[K.F_ALPHA] = self.partition_dependence and "alpha" not in fixed
        f[K.F_LIK_AR] = self.likelihood_ar
        f[K.F_ATOM_AR] = self.atom_ar
        f[K.F_THETA] = "theta" not in fixed
        f[K.F_TAU] = "tau" not in fixed
        f[K.F_PHI0] = "phi0" not in fixed
        f[K.F_PHI1] = self.atom_ar and "phi1" not in fixed
        f[K.F_LAMBDA] = "lambda" not in fixed
        f[K.F_ETA] = self.likelihood_ar and "eta" not in fixed
        f[K.F_ATOMS] = True
        f[K.F_LABELS] = self.update_partitions
        f[K.F_GAMMA] = self.update_partitions and self.partition_dependence
        return f

    def _hyper(self) -> np.ndarray:
        h = np.zeros(K.N_HYPER)
        h[K.H_M] = self.M
        h[K.H_NU0] = self.nu0
        h[K.H_A_SIGMA] = self.A_sigma
        h[K.H_A_TAU] = self.A_tau
        h[K.H_A_LAMBDA] = self.A_lambda
        h[K.H_S2] = self.s2
        h[K.H_LAP_A] = self.laplace_a
        h[K.H_LAP_B] = self.laplace_b
        h[K.H_A_ALPHA] = self.a_alpha
        h[K.H_B_ALPHA] = self.b_alpha
        h[K.H_PROP_SIGMA] = self.prop_sigma or 0.1 * self.A_sigma
        h[K.H_PROP_TAU] = self.prop_tau or 0.1 * self.A_tau
        h[K.H_PROP_LAMBDA] = self.prop_lambda or 0.1 * self.A_lambda
        h[K.H_PROP_PHI1] = self.prop_phi1
        h[K.H_PROP_XI] = self.prop_xi
        return h

    def eppf(self, coords=None) -> EppfSpec:
        if self.spatial:
            return EppfSpec("sppm", self.M, self.nu0, coords)
        return EppfSpec("crp", self.M)


@dataclass
class McmcState:
    """Complete parameter state at one sweep.

    Cluster atoms are stored by slot; ``partitions()`` gives canonical labels.
    """

    lab: np.ndarray      # (T, m) slot index of each unit
    nclus: np.ndarray    # (T,)
    size: np.ndarray     # (T, m) slot sizes
    mu: np.ndarray       # (T, m) slot means
    sig: np.ndarray      # (T, m) slot standard deviations
    gam: np.ndarray      # (T, m) 0/1
    alpha: np.ndarray    # (T,)
    theta: np.ndarray    # (T,)
    g: np.ndarray        # [tau, phi0, phi1, lambda]
    xi: np.ndarray       # (m,)
    eta: np.ndarray      # (m,)
    cstat: np.ndarray    # (T, m, 6) coordinate statistics per slot

    @property
    def T(self) -> int:
        return self.lab.shape[0]

    @property
    def m(self) -> int:
        return self.lab.shape[1]

    @property
    def tau(self) -> float:
        return float(self.g[K.G_TAU])

    @property
    def phi0(self) -> float:
        return float(self.g[K.G_PHI0])

    @property
    def phi1(self) -> float:
        return float(self.g[K.G_PHI1])

    @property
    def lam(self) -> float:
        return float(self.g[K.G_LAMBDA])

    def partitions(self) -> list[Partition]:
        return [Partition(canonical_labels(row)) for row in self.lab]

    def copy(self) -> "McmcState":
        return McmcState(**{k: v.copy() for k, v in asdict_shallow(self).items()})

    def snapshot(self) -> dict:
        return {
            "labels": canonicalize_rows(self.lab).tolist(),
            "gamma": self.gam.tolist(),
            "alpha": self.alpha.tolist(),
            "theta": self.theta.tolist(),
            "tau": self.tau, "phi0": self.phi0, "phi1": self.phi1, "lambda": self.lam,
            "eta": self.eta.tolist(),
        }

    def check(self, coords=None):
        """Structural and compatibility invariants; raises AssertionError on violation."""
        T, m = self.lab.shape
        for t in range(T):
            k = self.nclus[t]
            assert np.all((self.lab[t] >= 0) & (self.lab[t] < k)), "label outside slot range"
            counts = np.bincount(self.lab[t], minlength=m)
            assert np.array_equal(counts, self.size[t]), "slot sizes out of sync"
            assert np.all(counts[:k] > 0), "empty slot"
            assert np.all((self.sig[t, :k] > 0)), "non-positive sigma"
            if t == 0:
                assert not self.gam[0].any(), "gamma at the first time must be 0"
            else:
                fixed = np.flatnonzero(self.gam[t])
                a = canonical_labels(self.lab[t, fixed])
                b = canonical_labels(self.lab[t - 1, fixed])
                assert a == b, f"partitions at {t - 1} and {t} are incompatible"
        assert 0 < self.tau, "tau out of support"
        assert -1 < self.phi1 < 1, "phi1 out of support"
        assert 0 < self.lam, "lambda out of support"
        assert np.all(np.abs(self.eta) < 1), "eta out of support"


def asdict_shallow(obj) -> dict:
    return {f: getattr(obj, f) for f in obj.__dataclass_fields__}


def _set_fixed(state: McmcState, fixed: dict):
    T, m = state.T, state.m
    if "alpha" in fixed:
        state.alpha[:] = np.broadcast_to(np.asarray(fixed["alpha"], float), (T,))
    if "theta" in fixed:
        state.theta[:] = np.broadcast_to(np.asarray(fixed["theta"], float), (T,))
    if "tau" in fixed:
        state.g[K.G_TAU] = float(fixed["tau"])
    if "phi0" in fixed:
        state.g[K.G_PHI0] = float(fixed["phi0"])
    if "phi1" in fixed:
        state.g[K.G_PHI1] = float(fixed["phi1"])
    if "lambda" in fixed:
        state.g[K.G_LAMBDA] = float(fixed["lambda"])
    if "eta" in fixed:
        state.eta[:] = np.broadcast_to(np.asarray(fixed["eta"], float), (m,))
        state.xi[:] = np.log((1 + state.eta) / (1 - state.eta))


def _rebuild_slots(state: McmcState, labels: np.ndarray, coords: np.ndarray | None):
    T, m = labels.shape
    state.size[:] = 0
    state.cstat[:] = 0.0
    for t in range(T):
        lab = np.asarray(canonical_labels(labels[t]), dtype=np.int64) - 1
        state.lab[t] = lab
        state.nclus[t] = lab.max() + 1
        state.size[t] = np.bincount(lab, minlength=m)
        if coords is not None:
            for i in range(m):
                x, y = coords[i]
                st = state.cstat[t, lab[i]]
                st += (1.0, x, y, x * x, y * y, x * y)


def initial_state(data: Dataset, config: ModelConfig, labels: np.ndarray | None = None,
                  gamma: np.ndarray | None = None) -> McmcState:
    """Starting point: one cluster per time (unless ``labels`` given), every gamma 0.

    Atoms start at the per-time cluster means with sigma at half its upper bound.
    """
    m, T = data.m, data.T
    state = McmcState(
        lab=np.zeros((T, m), dtype=np.int64),
        nclus=np.ones(T, dtype=np.int64),
        size=np.zeros((T, m), dtype=np.int64),
        mu=np.zeros((T, m)),
        sig=np.full((T, m), 0.5 * config.A_sigma),
        gam=np.zeros((T, m), dtype=np.int64),
        alpha=np.full(T, 0.5 if config.partition_dependence else 0.0),
        theta=data.Y.mean(axis=0).copy(),
        g=np.array([0.5 * config.A_tau, 0.0, 0.0, 0.5 * config.A_lambda]),
        xi=np.zeros(m),
        eta=np.zeros(m),
        cstat=np.zeros((T, m, 6)),
    )
    state.alpha[0] = 0.0
    if labels is None:
        labels = np.ones((T, m), dtype=np.int64)
    _rebuild_slots(state, np.asarray(labels), data.coords if config.spatial else None)
    if gamma is not None:
        state.gam[:] = np.asarray(gamma, dtype=np.int64)
        state.gam[0] = 0
    for t in range(T):
        for h in range(state.nclus[t]):
            state.mu[t, h] = data.Y[state.lab[t] == h, t].mean()
    _set_fixed(state, config.fixed)
    if not config.partition_dependence:
        state.alpha[:] = 0.0
        state.gam[:] = 0
    if not config.atom_ar:
        state.g[K.G_PHI1] = 0.0
    if not config.likelihood_ar:
        state.eta[:] = 0.0
        state.xi[:] = 0.0
    return state


def seed_kernel(seed: int):
    """Seed the compiled sampler's random stream."""
    K.seed_rng(np.uint32(np.random.SeedSequence(seed).generate_state(1)[0]))


def _coords_array(data: Dataset, config: ModelConfig) -> np.ndarray:
    if config.spatial:
        if data.coords is None:
            raise ValueError("the spatial partition prior needs coordinates")
        return data.coords
    return np.zeros((data.m, 2))


def update_gamma(state: McmcState, data: Dataset, config: ModelConfig, t: int, i: int):
    """Resample gamma[t, i] (t >= 1) from its two-point full conditional."""
    if t < 1:
        raise ValueError("gamma is only updated for t >= 1")
    K.update_gamma(t, i, state.lab, state.gam, state.alpha, _coords_array(data, config),
                   config._flags(), config._hyper())
    return state


def gamma_conditional(state: McmcState, data: Dataset, config: ModelConfig, t: int, i: int) -> float:
    """Pr(gamma[t, i] = 1 | everything else)."""
    return float(K.gamma_prob_one(t, i, state.lab, state.gam, state.alpha,
                                  _coords_array(data, config), config._flags(), config._hyper()))


def update_cluster_label(state: McmcState, data: Dataset, config: ModelConfig, t: int, i: int):
    """Reallocate a free unit at time t (auxiliary-atom Gibbs step); kept units are left alone."""
    work = np.zeros(data.m + 1)
    err = K.update_label(t, i, data.Y, state.lab, state.nclus, state.size, state.mu, state.sig,
                   state.gam, state.theta, state.g, state.eta, state.cstat,
                   _coords_array(data, config), config._flags(), config._hyper(), work)
    if err != K.OK:
        raise NumericalError(f"no finite allocation weight for unit {i} at time {t}", state=state.snapshot())
    return state


def update_alpha(state: McmcState, config: ModelConfig, t: int):
    """Conjugate Beta draw of alpha[t] given gamma[t]."""
    if not config.partition_dependence:
        raise ValueError("alpha is fixed at 0 when partition dependence is off")
    K.update_alpha(t, state.gam, state.alpha, config._hyper())
    return state


def update_continuous_params(state: McmcState, data: Dataset, config: ModelConfig,
                             acc: np.ndarray | None = None):
    """One pass over atoms, theta, tau, phi0, phi1, lambda and xi/eta (toggles respected)."""
    flags = config._flags()
    hyper = config._hyper()
    acc = np.zeros((K.N_ACC, 2), dtype=np.int64) if acc is None else acc
    work = np.zeros((2, data.m + 1))
    err = K.update_atoms(data.Y, state.lab, state.nclus, state.sig, state.mu, state.theta,
                         state.g, state.eta, hyper, acc, work)
    if flags[K.F_THETA]:
        K.update_theta(state.lab, state.nclus, state.mu, state.theta, state.g)
    if err == K.OK and flags[K.F_TAU]:
        err = K.update_tau(state.nclus, state.mu, state.theta, state.g, hyper, acc)
    if flags[K.F_PHI0]:
        K.update_phi0(state.theta, state.g, hyper)
    if err == K.OK and flags[K.F_PHI1]:
        err = K.update_phi1(state.theta, state.g, hyper, acc)
    if err == K.OK and flags[K.F_LAMBDA]:
        err = K.update_lambda(state.theta, state.g, hyper, acc)
    if err == K.OK and flags[K.F_ETA]:
        err = K.update_xi(data.Y, state.lab, state.mu, state.sig, state.xi, state.eta, hyper, acc)
    if err != K.OK:
        raise NumericalError("NaN Metropolis acceptance ratio", state=state.snapshot())
    return state


def sweep(state: McmcState, data: Dataset, config: ModelConfig, acc: np.ndarray | None = None,
          _cache: dict | None = None) -> McmcState:
    """One full Gibbs sweep in the order gamma/labels per time, atoms, hyperparameters, alpha."""
    if _cache is None:
        _cache = {}
    flags = _cache.get("flags")
    if flags is None:
        flags = _cache["flags"] = config._flags()
        _cache["hyper"] = config._hyper()
        _cache["coords"] = _coords_array(data, config)
        _cache["work"] = np.zeros((2, data.m + 1))
    acc = np.zeros((K.N_ACC, 2), dtype=np.int64) if acc is None else acc
    err = K.sweep(data.Y, _cache["coords"], state.lab, state.nclus, state.size, state.mu,
                  state.sig, state.gam, state.alpha, state.theta, state.g, state.xi, state.eta,
                  state.cstat, flags, _cache["hyper"], acc, _cache["work"])
    if err != K.OK:
        raise NumericalError("NaN Metropolis ratio or allocation weights", state=state.snapshot())
    return state


def pointwise_loglik(state: McmcState, data: Dataset) -> np.ndarray:
    out = np.empty((data.m, data.T))
    K.pointwise_loglik(data.Y, state.lab, state.mu, state.sig, state.eta, out)
    return out


@dataclass
class ChainOutput:
    """Saved post-burn-in draws. Labels are canonical (1-based); arrays lead with the draw axis."""

    labels: np.ndarray    # (S, T, m)
    gamma: np.ndarray     # (S, T, m)
    alpha: np.ndarray     # (S, T)
    theta: np.ndarray     # (S, T)
    tau: np.ndarray       # (S,)
    phi0: np.ndarray      # (S,)
    phi1: np.ndarray      # (S,)
    lam: np.ndarray       # (S,)
    eta: np.ndarray       # (S, m)
    mu: np.ndarray        # (S, m, T)  mean of each unit's cluster
    sigma: np.ndarray     # (S, m, T)
    loglik: np.ndarray    # (S, m, T)
    iterations: np.ndarray  # (S,) sweep index of each saved draw
    config: dict
    seed: int
    acceptance: dict
    wall_time: float = 0.0

    @property
    def n_draws(self) -> int:
        return self.labels.shape[0]

    def scalar_draws(self) -> dict[str, np.ndarray]:
        """Named 1-d draw vectors for every scalar and per-index parameter."""
        out = {"tau": self.tau, "phi0": self.phi0, "phi1": self.phi1, "lambda": self.lam}
        for t in range(self.alpha.shape[1]):
            out[f"alpha[{t + 1}]"] = self.alpha[:, t]
        for t in range(self.theta.shape[1]):
            out[f"theta[{t + 1}]"] = self.theta[:, t]
        for i in range(self.eta.shape[1]):
            out[f"eta[{i + 1}]"] = self.eta[:, i]
        return out


ACC_NAMES = ("sigma", "tau", "lambda", "phi1", "xi")


def run_chain(data: Dataset, config: ModelConfig, init: McmcState | None = None,
              check_every: int = 0) -> ChainOutput:
    """Run the sampler and collect thinned post-burn-in draws.

    Draw ``s`` is the state after sweep ``burn_in + (s + 1) * thin``. With
    ``check_every > 0`` the state invariants are asserted every that many sweeps.
    """
    config.validate()
    if config.spatial and data.coords is None:
        raise ValueError("spatial partition prior selected but the dataset has no coordinates")
    state = init.copy() if init is not None else initial_state(data, config)
    seed_kernel(config.seed)
    m, T = data.m, data.T
    S = config.n_saved
    out = dict(
        labels=np.empty((S, T, m), dtype=np.int64), gamma=np.empty((S, T, m), dtype=np.int8),
        alpha=np.empty((S, T)), theta=np.empty((S, T)), tau=np.empty(S), phi0=np.empty(S),
        phi1=np.empty(S), lam=np.empty(S), eta=np.empty((S, m)), mu=np.empty((S, m, T)),
        sigma=np.empty((S, m, T)), loglik=np.empty((S, m, T)), iterations=np.empty(S, dtype=np.int64),
    )
    acc = np.zeros((K.N_ACC, 2), dtype=np.int64)
    cache: dict = {}
    start = time.perf_counter()
    s = 0
    for it in range(1, config.iterations + 1):
        try:
            sweep(state, data, config, acc, cache)
        except NumericalError as exc:
            raise NumericalError(f"{exc} at sweep {it}", sweep=it, state=exc.state) from None
        if check_every and it % check_every == 0:
            state.check()
        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            out["labels"][s] = canonicalize_rows(state.lab)
            out["gamma"][s] = state.gam
            out["alpha"][s] = state.alpha
            out["theta"][s] = state.theta
            out["tau"][s] = state.tau
            out["phi0"][s] = state.phi0
            out["phi1"][s] = state.phi1
            out["lam"][s] = state.lam
            out["eta"][s] = state.eta
            K.unit_means(state.lab, state.mu, state.sig, out["mu"][s], out["sigma"][s])
            K.pointwise_loglik(data.Y, state.lab, state.mu, state.sig, state.eta, out["loglik"][s])
            out["iterations"][s] = it
            s += 1
    elapsed = time.perf_counter() - start
    acceptance = {name: (float(acc[j, 1] / acc[j, 0]) if acc[j, 0] else None)
                  for j, name in enumerate(ACC_NAMES)}
    log.info("chain %s: %d sweeps in %.1fs", config.variant_name(), config.iterations, elapsed)
    return ChainOutput(**out, config=config_to_dict(config), seed=config.seed,
                       acceptance=acceptance, wall_time=elapsed)


def config_to_dict(config: ModelConfig) -> dict:
    d = asdict(config)
    d["fixed"] = {k: (np.asarray(v).tolist()) for k, v in config.fixed.items()}
    return d


# ---------------------------------------------------------------------------
# forward simulation of the full model (used for joint-distribution checks)


def sample_prior_state(m: int, T: int, config: ModelConfig, rng: np.random.Generator,
                       coords: np.ndarray | None = None) -> McmcState:
    """Draw every parameter, partition and gamma from the prior."""
    from .prior import TrpmParams, sample_joint_prior

    c = config
    fixed = c.fixed
    lam = fixed.get("lambda", rng.uniform(0, c.A_lambda))
    phi0 = fixed.get("phi0", rng.normal(0, np.sqrt(c.s2)))
    phi1 = fixed.get("phi1", rng.uniform(-1, 1)) if c.atom_ar else 0.0
    tau = fixed.get("tau", rng.uniform(0, c.A_tau))
    theta = np.empty(T)
    theta[0] = rng.normal(phi0, lam)
    for t in range(1, T):
        theta[t] = rng.normal(phi0 + phi1 * theta[t - 1], lam * np.sqrt(1 - phi1 ** 2))
    if "theta" in fixed:
        theta[:] = fixed["theta"]
    if c.partition_dependence:
        alpha = np.asarray(fixed.get("alpha", rng.beta(c.a_alpha, c.b_alpha, size=T)), float)
        alpha = np.broadcast_to(alpha, (T,)).copy()
        alpha[0] = 0.0
    else:
        alpha = np.zeros(T)
    draw = sample_joint_prior(TrpmParams(m, T, tuple(alpha), c.eppf(coords)),
                              int(rng.integers(2 ** 63)))
    if c.likelihood_ar:
        if "eta" in fixed:
            eta = np.broadcast_to(np.asarray(fixed["eta"], float), (m,)).copy()
            xi = np.log((1 + eta) / (1 - eta))
        else:
            xi = rng.laplace(c.laplace_a, c.laplace_b, size=m)
            eta = np.array([K.xi_to_eta(x) for x in xi])
    else:
        xi = np.zeros(m)
        eta = np.zeros(m)
    state = McmcState(
        lab=np.zeros((T, m), dtype=np.int64), nclus=np.zeros(T, dtype=np.int64),
        size=np.zeros((T, m), dtype=np.int64), mu=np.zeros((T, m)), sig=np.zeros((T, m)),
        gam=draw.gammas.astype(np.int64), alpha=alpha, theta=theta,
        g=np.array([tau, phi0, phi1, lam], dtype=float), xi=xi, eta=eta,
        cstat=np.zeros((T, m, 6)),
    )
    _rebuild_slots(state, draw.labels, coords if c.spatial else None)
    for t in range(T):
        k = state.nclus[t]
        state.mu[t, :k] = rng.normal(theta[t], tau, size=k)
        state.sig[t, :k] = rng.uniform(0, c.A_sigma, size=k)
        state.sig[t, k:] = 0.5 * c.A_sigma
    return state


def simulate_responses(state: McmcState, rng: np.random.Generator) -> np.ndarray:
    """Draw Y (m x T) from the likelihood given all parameters."""
    T, m = state.T, state.m
    Y = np.empty((m, T))
    for t in range(T):
        h = state.lab[t]
        mu = state.mu[t, h]
        sd = state.sig[t, h]
        if t == 0:
            Y[:, 0] = rng.normal(mu, sd)
        else:
            Y[:, t] = rng.normal(mu + state.eta * Y[:, t - 1], sd * np.sqrt(1 - state.eta ** 2))
    return Y
