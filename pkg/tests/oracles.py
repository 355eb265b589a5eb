"""Brute-force reference computations used by the test suite."""

from __future__ import annotations

import itertools

import numpy as np
from scipy import integrate, stats

from deppart.eppf import crp_log_prob
from deppart.partition import enumerate_partitions, is_compatible, restrict


def cluster_marginal(y, theta, tau, A_sigma):
    """log of the integral over mu ~ N(theta, tau^2), sigma ~ U(0, A) of prod N(y | mu, sigma^2)."""
    y = np.asarray(y, float)
    n = y.size

    def dens(s):
        cov = s * s * np.eye(n) + tau * tau * np.ones((n, n))
        return stats.multivariate_normal(np.full(n, theta), cov).pdf(y) / A_sigma

    val, _ = integrate.quad(dens, 0.0, A_sigma, epsabs=0, epsrel=1e-10, limit=200)
    return np.log(val)


def toy_posterior(Y, M, alpha, theta, tau, A_sigma):
    """Exact posterior over (rho_1, gamma_2, rho_2) for a two-time CRP model with atoms integrated out.

    Returns a dict keyed by (rho1 labels, gamma tuple, rho2 labels).
    """
    m, T = Y.shape
    assert T == 2
    parts = enumerate_partitions(m)
    cache = {}

    def lml(p, t):
        key = (p.labels, t)
        if key not in cache:
            cache[key] = sum(cluster_marginal(Y[b, t], theta, tau, A_sigma) for b in p.blocks())
        return cache[key]

    out = {}
    for r1 in parts:
        for gam in itertools.product((0, 1), repeat=m):
            keep = [i for i in range(m) if gam[i]]
            lg = sum(np.log(alpha) if g else np.log1p(-alpha) for g in gam)
            for r2 in parts:
                if not is_compatible(r2, r1, gam):
                    continue
                lp = (crp_log_prob(r1, M) + lg + crp_log_prob(r2, M)
                      - crp_log_prob(restrict(r2, keep), M) + lml(r1, 0) + lml(r2, 1))
                out[(r1.labels, gam, r2.labels)] = lp
    keys = list(out)
    lw = np.array([out[k] for k in keys])
    w = np.exp(lw - lw.max())
    w /= w.sum()
    return dict(zip(keys, w))


def gamma_conditional_enum(rho_prev, rho_t, gamma, i, alpha, M):
    """Pr(gamma_i = 1 | rho_prev, rho_t, gamma_-i) from the joint prior of one transition."""
    w = []
    for g in (0, 1):
        gam = list(gamma)
        gam[i] = g
        if not is_compatible(rho_t, rho_prev, gam):
            w.append(0.0)
            continue
        keep = [j for j in range(len(gam)) if gam[j]]
        lp = (sum(np.log(alpha) if x else np.log1p(-alpha) for x in gam)
              + crp_log_prob(rho_t, M) - crp_log_prob(restrict(rho_t, keep), M))
        w.append(np.exp(lp))
    return w[1] / (w[0] + w[1])


def niw_log_marginal_quadrature(points, nu0, nq=48, nu=20):
    """Log marginal of 2-d points under N(m, V), (m, V) ~ NIW(0, 1, nu0, I), by Gauss quadrature.

    Uses the Bartlett factorization of the precision W = V^-1 = L L', with
    L = [[c1, 0], [z, c2]], c1^2 ~ chi2(nu0), c2^2 ~ chi2(nu0 - 1), z ~ N(0, 1),
    and m = L'^-1 u with u ~ N(0, I). Then prod N(x_i | m, V) becomes
    (2 pi)^-n |W|^(n/2) exp(-sum |L' x_i - u|^2 / 2).
    """
    from scipy.special import roots_genlaguerre, roots_hermitenorm

    X = np.asarray(points, float).reshape(-1, 2)
    n = len(X)
    q1, w1 = roots_genlaguerre(nq, nu0 / 2 - 1)
    q2, w2 = roots_genlaguerre(nq, (nu0 - 1) / 2 - 1)
    z, wz = roots_hermitenorm(nq)
    u, wu = roots_hermitenorm(nu)
    w1, w2, wz, wu = (w / w.sum() for w in (w1, w2, wz, wu))
    c1 = np.sqrt(2 * q1)[:, None, None, None, None]
    c2 = np.sqrt(2 * q2)[None, :, None, None, None]
    zz = z[None, None, :, None, None]
    ua = u[None, None, None, :, None]
    ub = u[None, None, None, None, :]
    s = 0.0
    for x0, x1 in X:
        s = s + (c1 * x0 + zz * x1 - ua) ** 2 + (c2 * x1 - ub) ** 2
    w = (w1[:, None, None, None, None] * w2[None, :, None, None, None] * wz[None, None, :, None, None]
         * wu[None, None, None, :, None] * wu[None, None, None, None, :])
    integrand = w * np.exp(-0.5 * s) * ((c1 * c2) ** 2) ** (n / 2) / (2 * np.pi) ** n
    return float(np.log(integrand.sum()))


def ari_pairs(p, q):
    """ARI by explicit enumeration of unit pairs (independent of any contingency table)."""
    n = len(p)
    pairs = list(itertools.combinations(range(n), 2))
    a = sum(1 for i, j in pairs if p[i] == p[j] and q[i] == q[j])
    sp = sum(1 for i, j in pairs if p[i] == p[j])
    sq = sum(1 for i, j in pairs if q[i] == q[j])
    N = len(pairs)
    if N == 0:
        return 1.0
    expected = sp * sq / N
    denom = 0.5 * (sp + sq) - expected
    if denom == 0:
        return 1.0 if tuple(p) == tuple(q) else 0.0
    return (a - expected) / denom
