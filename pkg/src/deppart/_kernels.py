"""Compiled inner loops of the Gibbs sampler.

Cluster atoms at time t live in slots ``0..nclus[t]-1`` of the ``mu``/``sig``
rows; ``lab[t, i]`` is the slot of unit i. Slots are kept contiguous: when a
cluster empties, the last slot is moved into its place. Randomness comes from
numba's internal generator, seeded with ``seed_rng``.
"""

import math

import numpy as np
from numba import njit

LOG_2PI = math.log(2.0 * math.pi)
LOG_PI = math.log(math.pi)
VAR_FLOOR = 1e-12
ETA_BOUND = 1.0 - 1e-6

# flag indices
F_SPATIAL = 0
F_ALPHA = 1
F_LIK_AR = 2
F_ATOM_AR = 3
F_THETA = 4
F_TAU = 5
F_PHI0 = 6
F_PHI1 = 7
F_LAMBDA = 8
F_ETA = 9
F_ATOMS = 10
F_LABELS = 11
F_GAMMA = 12
N_FLAGS = 13

# hyperparameter indices
H_M = 0
H_NU0 = 1
H_A_SIGMA = 2
H_A_TAU = 3
H_A_LAMBDA = 4
H_S2 = 5
H_LAP_A = 6
H_LAP_B = 7
H_A_ALPHA = 8
H_B_ALPHA = 9
H_PROP_SIGMA = 10
H_PROP_TAU = 11
H_PROP_LAMBDA = 12
H_PROP_PHI1 = 13
H_PROP_XI = 14
N_HYPER = 15

# global parameter indices
G_TAU = 0
G_PHI0 = 1
G_PHI1 = 2
G_LAMBDA = 3

# Metropolis counters
A_SIGMA = 0
A_TAU = 1
A_LAMBDA = 2
A_PHI1 = 3
A_XI = 4
N_ACC = 5

OK = 0
ERR_NAN = 1


@njit(cache=True)
def seed_rng(seed):
    np.random.seed(seed)


@njit(cache=True)
def norm_logpdf(x, mean, var):
    if var < VAR_FLOOR:
        var = VAR_FLOOR
    d = x - mean
    return -0.5 * (LOG_2PI + math.log(var)) - 0.5 * d * d / var


@njit(cache=True)
def lmvgamma2(a):
    return 0.5 * LOG_PI + math.lgamma(a) + math.lgamma(a - 0.5)


@njit(cache=True)
def niw_logml(n, sx, sy, sxx, syy, sxy, nu0):
    if n == 0:
        return 0.0
    kn = 1.0 + n
    a = 1.0 + sxx - sx * sx / kn
    d = 1.0 + syy - sy * sy / kn
    b = sxy - sx * sy / kn
    nun = nu0 + n
    return (-n * LOG_PI + lmvgamma2(0.5 * nun) - lmvgamma2(0.5 * nu0)
            - 0.5 * nun * math.log(a * d - b * b) - math.log(kn))


@njit(cache=True)
def niw_add_ratio(st, x, y, nu0):
    """log g(S + {s}) - log g(S) for a cluster with coordinate statistics ``st``."""
    n = int(st[0])
    return (niw_logml(n + 1, st[1] + x, st[2] + y, st[3] + x * x, st[4] + y * y,
                      st[5] + x * y, nu0)
            - niw_logml(n, st[1], st[2], st[3], st[4], st[5], nu0))


@njit(cache=True)
def _stat_update(st, x, y, sgn):
    st[0] += sgn
    st[1] += sgn * x
    st[2] += sgn * y
    st[3] += sgn * x * x
    st[4] += sgn * y * y
    st[5] += sgn * x * y


@njit(cache=True)
def lik_moments(Y, i, t, mu_h, sig_h, eta_i):
    if t == 0:
        return mu_h, sig_h * sig_h
    return mu_h + eta_i * Y[i, t - 1], sig_h * sig_h * (1.0 - eta_i * eta_i)


@njit(cache=True)
def sample_categorical(logw, n):
    """Index drawn with probability proportional to exp(logw[:n]); -1 if no entry is usable."""
    mx = -np.inf
    for j in range(n):
        if math.isnan(logw[j]):
            return -1
        if logw[j] > mx:
            mx = logw[j]
    if mx == -np.inf or mx == np.inf:
        return -1
    tot = 0.0
    for j in range(n):
        tot += math.exp(logw[j] - mx)
    u = np.random.random() * tot
    acc = 0.0
    for j in range(n):
        if logw[j] == -np.inf:
            continue
        acc += math.exp(logw[j] - mx)
        if u < acc:
            return j
    # round-off: return the last admissible entry
    for j in range(n - 1, -1, -1):
        if logw[j] > -np.inf:
            return j
    return -1


@njit(cache=True)
def gamma_prob_one(t, i, lab, gam, alpha, coords, flags, hyper):
    """Full-conditional Pr(gamma[t, i] = 1 | rest); 0 when keeping i would break compatibility."""
    a = alpha[t]
    if a <= 0.0:
        return 0.0
    m = lab.shape[1]
    ci = lab[t, i]
    cp = lab[t - 1, i]
    n_fixed = 0
    n_same = 0
    for j in range(m):
        if j == i or gam[t, j] == 0:
            continue
        n_fixed += 1
        same_now = lab[t, j] == ci
        if same_now != (lab[t - 1, j] == cp):
            return 0.0
        if same_now:
            n_same += 1
    if a >= 1.0:
        return 1.0
    M = hyper[H_M]
    # log Pr(reduced partition with i) - log Pr(reduced partition without i)
    if n_same > 0:
        log_r = math.log(n_same)
    else:
        log_r = math.log(M)
    log_r -= math.log(M + n_fixed)
    if flags[F_SPATIAL]:
        st = np.zeros(6)
        for j in range(m):
            if j != i and gam[t, j] == 1 and lab[t, j] == ci:
                _stat_update(st, coords[j, 0], coords[j, 1], 1.0)
        log_r += niw_add_ratio(st, coords[i, 0], coords[i, 1], hyper[H_NU0])
    return a / (a + (1.0 - a) * math.exp(log_r))


@njit(cache=True)
def update_gamma(t, i, lab, gam, alpha, coords, flags, hyper):
    p1 = gamma_prob_one(t, i, lab, gam, alpha, coords, flags, hyper)
    if p1 >= 1.0:
        gam[t, i] = 1
    elif p1 <= 0.0:
        gam[t, i] = 0
    else:
        gam[t, i] = 1 if np.random.random() < p1 else 0


@njit(cache=True)
def _remove_unit(t, i, lab, nclus, size, mu, sig, cstat, coords, spatial):
    """Take unit i out of its cluster. Returns (was_singleton, mu, sig) of the vacated atom."""
    h = lab[t, i]
    size[t, h] -= 1
    if spatial:
        _stat_update(cstat[t, h], coords[i, 0], coords[i, 1], -1.0)
    lab[t, i] = -1
    if size[t, h] > 0:
        return False, 0.0, 0.0
    old_mu = mu[t, h]
    old_sig = sig[t, h]
    last = nclus[t] - 1
    if h != last:
        m = lab.shape[1]
        for j in range(m):
            if lab[t, j] == last:
                lab[t, j] = h
        mu[t, h] = mu[t, last]
        sig[t, h] = sig[t, last]
        size[t, h] = size[t, last]
        for q in range(6):
            cstat[t, h, q] = cstat[t, last, q]
    size[t, last] = 0
    for q in range(6):
        cstat[t, last, q] = 0.0
    nclus[t] = last
    return True, old_mu, old_sig


@njit(cache=True)
def label_log_weights(t, i, Y, lab, nclus, size, mu, sig, gam, theta, eta, cstat, coords,
                      flags, hyper, aux_mu, aux_sig, out):
    """Unnormalized log weights for unit i (already removed) at time t.

    Entries ``0..k-1`` are existing clusters, entry ``k`` the auxiliary cluster.
    Forward-incompatible choices get ``-inf``.
    """
    k = nclus[t]
    m = lab.shape[1]
    T = lab.shape[0]
    M = hyper[H_M]
    spatial = flags[F_SPATIAL]
    forced = -1
    blocked_new = False
    check_forward = t < T - 1 and gam[t + 1, i] == 1
    if check_forward:
        for j in range(m):
            if j != i and gam[t + 1, j] == 1 and lab[t + 1, j] == lab[t + 1, i]:
                forced = lab[t, j]
                blocked_new = True
                break
    y = Y[i, t]
    for h in range(k):
        if forced >= 0 and h != forced:
            out[h] = -np.inf
            continue
        mean, var = lik_moments(Y, i, t, mu[t, h], sig[t, h], eta[i])
        w = math.log(size[t, h]) + norm_logpdf(y, mean, var)
        if spatial:
            w += niw_add_ratio(cstat[t, h], coords[i, 0], coords[i, 1], hyper[H_NU0])
        out[h] = w
    if check_forward and forced < 0:
        # i has no kept partner at t+1, so it may not join a cluster holding units kept at t+1
        for j in range(m):
            if j != i and gam[t + 1, j] == 1:
                out[lab[t, j]] = -np.inf
    if blocked_new:
        out[k] = -np.inf
    else:
        mean, var = lik_moments(Y, i, t, aux_mu, aux_sig, eta[i])
        w = math.log(M) + norm_logpdf(y, mean, var)
        if spatial:
            x0 = coords[i, 0]
            x1 = coords[i, 1]
            w += niw_logml(1, x0, x1, x0 * x0, x1 * x1, x0 * x1, hyper[H_NU0])
        out[k] = w


@njit(cache=True)
def update_label(t, i, Y, lab, nclus, size, mu, sig, gam, theta, g, eta, cstat, coords,
                 flags, hyper, work):
    if gam[t, i] == 1:
        return OK
    spatial = flags[F_SPATIAL]
    was_single, old_mu, old_sig = _remove_unit(t, i, lab, nclus, size, mu, sig, cstat,
                                               coords, spatial)
    if was_single:
        aux_mu = old_mu
        aux_sig = old_sig
    else:
        aux_mu = theta[t] + g[G_TAU] * np.random.standard_normal()
        aux_sig = np.random.random() * hyper[H_A_SIGMA]
        while aux_sig <= 0.0:
            aux_sig = np.random.random() * hyper[H_A_SIGMA]
    k = nclus[t]
    label_log_weights(t, i, Y, lab, nclus, size, mu, sig, gam, theta, eta, cstat, coords,
                      flags, hyper, aux_mu, aux_sig, work)
    h = sample_categorical(work, k + 1)
    err = OK
    if h < 0:
        # no finite weight: park the unit in the auxiliary cluster so the state stays consistent
        h = k
        err = ERR_NAN
    if h == k:
        mu[t, k] = aux_mu
        sig[t, k] = aux_sig
        nclus[t] = k + 1
    lab[t, i] = h
    size[t, h] += 1
    if spatial:
        _stat_update(cstat[t, h], coords[i, 0], coords[i, 1], 1.0)
    return err


@njit(cache=True)
def _in_open(x, lo, hi):
    return x > lo and x < hi


@njit(cache=True)
def _theta_chain_logpdf(theta, phi0, phi1, lam):
    T = theta.shape[0]
    lp = norm_logpdf(theta[0], phi0, lam * lam)
    v = lam * lam * (1.0 - phi1 * phi1)
    for t in range(1, T):
        lp += norm_logpdf(theta[t], phi0 + phi1 * theta[t - 1], v)
    return lp


@njit(cache=True)
def update_atoms(Y, lab, nclus, sig, mu, theta, g, eta, hyper, acc, work):
    """Conjugate normal update of every cluster mean, then random-walk Metropolis on each sd."""
    T, m = lab.shape
    tau2 = g[G_TAU] * g[G_TAU]
    a_sig = hyper[H_A_SIGMA]
    step = hyper[H_PROP_SIGMA]
    prec = work[0]
    num = work[1]
    for t in range(T):
        k = nclus[t]
        for h in range(k):
            prec[h] = 1.0 / tau2
            num[h] = theta[t] / tau2
        for i in range(m):
            h = lab[t, i]
            mean0, var = lik_moments(Y, i, t, 0.0, sig[t, h], eta[i])
            if var < VAR_FLOOR:
                var = VAR_FLOOR
            prec[h] += 1.0 / var
            num[h] += (Y[i, t] - mean0) / var
        for h in range(k):
            pm = num[h] / prec[h]
            mu[t, h] = pm + np.random.standard_normal() / math.sqrt(prec[h])
        for h in range(k):
            prop = sig[t, h] + step * np.random.standard_normal()
            acc[A_SIGMA, 0] += 1
            if not _in_open(prop, 0.0, a_sig):
                continue
            # log-likelihood difference accumulated over members
            d = 0.0
            for i in range(m):
                if lab[t, i] != h:
                    continue
                mean, var = lik_moments(Y, i, t, mu[t, h], prop, eta[i])
                d += norm_logpdf(Y[i, t], mean, var)
                mean, var = lik_moments(Y, i, t, mu[t, h], sig[t, h], eta[i])
                d -= norm_logpdf(Y[i, t], mean, var)
            if math.isnan(d):
                return ERR_NAN
            if math.log(np.random.random()) < d:
                sig[t, h] = prop
                acc[A_SIGMA, 1] += 1
    return OK


@njit(cache=True)
def update_theta(lab, nclus, mu, theta, g):
    T = theta.shape[0]
    tau2 = g[G_TAU] * g[G_TAU]
    phi0 = g[G_PHI0]
    phi1 = g[G_PHI1]
    lam2 = g[G_LAMBDA] * g[G_LAMBDA]
    vt = lam2 * (1.0 - phi1 * phi1)
    if vt < VAR_FLOOR:
        vt = VAR_FLOOR
    for t in range(T):
        if t == 0:
            prec = 1.0 / lam2
            num = phi0 / lam2
        else:
            prec = 1.0 / vt
            num = (phi0 + phi1 * theta[t - 1]) / vt
        if t < T - 1 and phi1 != 0.0:
            prec += phi1 * phi1 / vt
            num += phi1 * (theta[t + 1] - phi0) / vt
        k = nclus[t]
        s = 0.0
        for h in range(k):
            s += mu[t, h]
        prec += k / tau2
        num += s / tau2
        theta[t] = num / prec + np.random.standard_normal() / math.sqrt(prec)


@njit(cache=True)
def _atom_mean_logpdf(nclus, mu, theta, tau):
    lp = 0.0
    for t in range(nclus.shape[0]):
        for h in range(nclus[t]):
            lp += norm_logpdf(mu[t, h], theta[t], tau * tau)
    return lp


@njit(cache=True)
def update_tau(nclus, mu, theta, g, hyper, acc):
    cur = g[G_TAU]
    prop = cur + hyper[H_PROP_TAU] * np.random.standard_normal()
    acc[A_TAU, 0] += 1
    if not _in_open(prop, 0.0, hyper[H_A_TAU]):
        return OK
    d = _atom_mean_logpdf(nclus, mu, theta, prop) - _atom_mean_logpdf(nclus, mu, theta, cur)
    if math.isnan(d):
        return ERR_NAN
    if math.log(np.random.random()) < d:
        g[G_TAU] = prop
        acc[A_TAU, 1] += 1
    return OK


@njit(cache=True)
def update_phi0(theta, g, hyper):
    T = theta.shape[0]
    phi1 = g[G_PHI1]
    lam2 = g[G_LAMBDA] * g[G_LAMBDA]
    vt = lam2 * (1.0 - phi1 * phi1)
    if vt < VAR_FLOOR:
        vt = VAR_FLOOR
    prec = 1.0 / hyper[H_S2] + 1.0 / lam2
    num = theta[0] / lam2
    for t in range(1, T):
        prec += 1.0 / vt
        num += (theta[t] - phi1 * theta[t - 1]) / vt
    g[G_PHI0] = num / prec + np.random.standard_normal() / math.sqrt(prec)


@njit(cache=True)
def update_phi1(theta, g, hyper, acc):
    cur = g[G_PHI1]
    prop = cur + hyper[H_PROP_PHI1] * np.random.standard_normal()
    acc[A_PHI1, 0] += 1
    if not _in_open(prop, -1.0, 1.0):
        return OK
    d = (_theta_chain_logpdf(theta, g[G_PHI0], prop, g[G_LAMBDA])
         - _theta_chain_logpdf(theta, g[G_PHI0], cur, g[G_LAMBDA]))
    if math.isnan(d):
        return ERR_NAN
    if math.log(np.random.random()) < d:
        g[G_PHI1] = prop
        acc[A_PHI1, 1] += 1
    return OK


@njit(cache=True)
def update_lambda(theta, g, hyper, acc):
    cur = g[G_LAMBDA]
    prop = cur + hyper[H_PROP_LAMBDA] * np.random.standard_normal()
    acc[A_LAMBDA, 0] += 1
    if not _in_open(prop, 0.0, hyper[H_A_LAMBDA]):
        return OK
    d = (_theta_chain_logpdf(theta, g[G_PHI0], g[G_PHI1], prop)
         - _theta_chain_logpdf(theta, g[G_PHI0], g[G_PHI1], cur))
    if math.isnan(d):
        return ERR_NAN
    if math.log(np.random.random()) < d:
        g[G_LAMBDA] = prop
        acc[A_LAMBDA, 1] += 1
    return OK


@njit(cache=True)
def xi_to_eta(xi):
    e = 2.0 / (1.0 + math.exp(-xi)) - 1.0
    if e > ETA_BOUND:
        e = ETA_BOUND
    elif e < -ETA_BOUND:
        e = -ETA_BOUND
    return e


@njit(cache=True)
def _unit_ar_loglik(Y, i, lab, mu, sig, eta_i):
    T = lab.shape[0]
    lp = 0.0
    for t in range(1, T):
        h = lab[t, i]
        mean, var = lik_moments(Y, i, t, mu[t, h], sig[t, h], eta_i)
        lp += norm_logpdf(Y[i, t], mean, var)
    return lp


@njit(cache=True)
def update_xi(Y, lab, mu, sig, xi, eta, hyper, acc):
    m = xi.shape[0]
    a = hyper[H_LAP_A]
    b = hyper[H_LAP_B]
    for i in range(m):
        cur = xi[i]
        prop = cur + hyper[H_PROP_XI] * np.random.standard_normal()
        eta_p = xi_to_eta(prop)
        acc[A_XI, 0] += 1
        d = (-abs(prop - a) + abs(cur - a)) / b
        d += _unit_ar_loglik(Y, i, lab, mu, sig, eta_p) - _unit_ar_loglik(Y, i, lab, mu, sig, eta[i])
        if math.isnan(d):
            return ERR_NAN
        if math.log(np.random.random()) < d:
            xi[i] = prop
            eta[i] = eta_p
            acc[A_XI, 1] += 1
    return OK


@njit(cache=True)
def update_alpha(t, gam, alpha, hyper):
    m = gam.shape[1]
    s = 0
    for i in range(m):
        s += gam[t, i]
    alpha[t] = np.random.beta(hyper[H_A_ALPHA] + s, hyper[H_B_ALPHA] + m - s)


@njit(cache=True)
def sweep(Y, coords, lab, nclus, size, mu, sig, gam, alpha, theta, g, xi, eta, cstat,
          flags, hyper, acc, work):
    """One full Gibbs sweep. Returns OK or an error code."""
    T, m = lab.shape
    for t in range(T):
        if t > 0 and flags[F_GAMMA]:
            for i in range(m):
                update_gamma(t, i, lab, gam, alpha, coords, flags, hyper)
        if flags[F_LABELS]:
            for i in range(m):
                if update_label(t, i, Y, lab, nclus, size, mu, sig, gam, theta, g, eta, cstat,
                                coords, flags, hyper, work[0]) != OK:
                    return ERR_NAN
    if flags[F_ATOMS]:
        if update_atoms(Y, lab, nclus, sig, mu, theta, g, eta, hyper, acc, work) != OK:
            return ERR_NAN
    if flags[F_THETA]:
        update_theta(lab, nclus, mu, theta, g)
    if flags[F_TAU]:
        if update_tau(nclus, mu, theta, g, hyper, acc) != OK:
            return ERR_NAN
    if flags[F_PHI0]:
        update_phi0(theta, g, hyper)
    if flags[F_ATOM_AR] and flags[F_PHI1]:
        if update_phi1(theta, g, hyper, acc) != OK:
            return ERR_NAN
    if flags[F_LAMBDA]:
        if update_lambda(theta, g, hyper, acc) != OK:
            return ERR_NAN
    if flags[F_LIK_AR] and flags[F_ETA]:
        if update_xi(Y, lab, mu, sig, xi, eta, hyper, acc) != OK:
            return ERR_NAN
    if flags[F_ALPHA]:
        for t in range(1, T):
            update_alpha(t, gam, alpha, hyper)
    return OK


@njit(cache=True)
def pointwise_loglik(Y, lab, mu, sig, eta, out):
    T, m = lab.shape
    for i in range(m):
        for t in range(T):
            h = lab[t, i]
            mean, var = lik_moments(Y, i, t, mu[t, h], sig[t, h], eta[i])
            out[i, t] = norm_logpdf(Y[i, t], mean, var)


@njit(cache=True)
def unit_means(lab, mu, sig, out_mu, out_sig):
    T, m = lab.shape
    for i in range(m):
        for t in range(T):
            h = lab[t, i]
            out_mu[i, t] = mu[t, h]
            out_sig[i, t] = sig[t, h]
