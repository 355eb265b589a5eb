"""Drivers behind the CLI commands and the simulation studies."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import io
from .eppf import EppfSpec
from .gibbs import Dataset, ModelConfig, run_chain
from .partition import adjusted_rand_index
from .prior import TrpmParams, lagged_ari_summary
from .selection import estimate_report, waic
from .synth import SynthConfig, generate, generate_replicates, lag1_autocorrelation

log = logging.getLogger(__name__)


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1, np.uint64)[0] >> 1)


# ---------------------------------------------------------------------------
# prior simulation


def simulate_prior(m: int, T: int, M: float, alphas, n_draws: int, seed: int) -> list[dict]:
    rows = []
    for a_idx, a in enumerate(alphas):
        params = TrpmParams(m, T, (float(a),) * T, EppfSpec("crp", M))
        s = lagged_ari_summary(params, n_draws, derive_seed(seed, a_idx))
        for lag, mean, se in zip(s.lags, s.mean, s.se):
            rows.append({"alpha": float(a), "lag": int(lag), "mean_ari": float(mean),
                         "se": None if np.isnan(se) else float(se), "n_draws": n_draws})
    return rows


def write_prior_grid(out_dir, rows, settings: dict):
    lines = ["alpha,lag,mean_ari,se,n_draws"]
    for r in rows:
        se = "NA" if r["se"] is None else io.FLOAT_FMT % r["se"]
        lines.append(f"{r['alpha']:g},{r['lag']},{io.FLOAT_FMT % r['mean_ari']},{se},{r['n_draws']}")
    io.write_text(Path(out_dir) / "lagged_ari.csv", "\n".join(lines) + "\n")
    io.write_json(Path(out_dir) / "summary.json", {"settings": settings, "grid": rows})


# ---------------------------------------------------------------------------
# synthetic data


def write_synth(out_dir, config: SynthConfig, seed: int):
    out = Path(out_dir)
    children = np.random.SeedSequence(seed).spawn(config.n_replicates)
    for r, child in enumerate(children):
        d = generate(config, child)
        rdir = out / f"rep_{r + 1:03d}" if config.n_replicates > 1 else out
        io.write_panel(rdir / "data.csv", d.Y)
        m, T = d.Y.shape
        lines = ["unit,t,label,mu"]
        for t in range(T):
            for i in range(m):
                lines.append(f"{i + 1},{t + 1},{d.labels[t, i]},{io.FLOAT_FMT % d.mu[i, t]}")
        io.write_text(rdir / "truth.csv", "\n".join(lines) + "\n")
        gl = ["unit,t,gamma"] + [f"{i + 1},{t + 1},{d.gammas[t, i]}" for t in range(T) for i in range(m)]
        io.write_text(rdir / "truth_gamma.csv", "\n".join(gl) + "\n")
        io.write_json(rdir / "provenance.json", {"generator": config.__dict__, "seed": seed, "replicate": r + 1})


# ---------------------------------------------------------------------------
# model fitting


VARIANT_TOGGLES = list(itertools.product((False, True), repeat=3))


def variant_configs(base: ModelConfig, all_variants: bool) -> list[ModelConfig]:
    if not all_variants:
        return [base]
    out = []
    for v, (part, lik, atom) in enumerate(VARIANT_TOGGLES):
        out.append(replace(base, partition_dependence=part, likelihood_ar=lik, atom_ar=atom,
                           seed=derive_seed(base.seed, v), fixed=dict(base.fixed)))
    return out


def _fit_one(args):
    data, cfg, out_dir, extra, record_timing = args
    chain = run_chain(data, cfg)
    with io.output_dir(out_dir):
        io.write_chain(out_dir, chain, data, extra, record_timing)
    return str(out_dir), chain.wall_time


def fit_variants(data: Dataset, configs: list[ModelConfig], out_dir, extra_meta: dict,
                 record_timing: bool = False, threads: int = 1) -> list[str]:
    jobs = [(data, cfg, Path(out_dir) / cfg.variant_name(), extra_meta, record_timing) for cfg in configs]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            done = list(ex.map(_fit_one, jobs))
    else:
        done = [_fit_one(j) for j in jobs]
    for path, secs in done:
        log.info("wrote %s (%.1fs)", path, secs)
    return [p for p, _ in done]


# ---------------------------------------------------------------------------
# reporting


def build_report(chain_dirs, out_dir, loss: str = "vi_lb", expect_dims: tuple[int, int] | None = None):
    out = Path(out_dir)
    rows = []
    ari_lines = ["model,t1,t2,ari"]
    part_lines = ["model,unit,t,label"]
    int_lines = ["model,name,mean,lower,upper"]
    summary = {}
    for d in chain_dirs:
        chain = io.read_chain(d)
        S, T, m = chain.labels.shape
        if expect_dims is not None and (m, T) != expect_dims:
            raise io.DataError(f"chain {d} has m={m}, T={T} but the dataset has m={expect_dims[0]}, T={expect_dims[1]}")
        name = Path(d).name
        rep = estimate_report(chain, loss)
        rows.append({"model": name, "waic": rep.waic, "lpml": rep.lpml})
        for a in range(T):
            for b in range(T):
                ari_lines.append(f"{name},{a + 1},{b + 1},{io.FLOAT_FMT % rep.lagged_ari[a, b]}")
        for t, p in enumerate(rep.partitions):
            part_lines += [f"{name},{i + 1},{t + 1},{lab}" for i, lab in enumerate(p.labels)]
        for k, (mean, lo, hi) in rep.intervals.items():
            int_lines.append(f"{name},{k},{io.FLOAT_FMT % mean},{io.FLOAT_FMT % lo},{io.FLOAT_FMT % hi}")
        summary[name] = rep.to_dict()
    table = ["model,waic,lpml,best_waic,best_lpml"]
    if len(rows) > 1:
        bw = min(range(len(rows)), key=lambda r: rows[r]["waic"])
        bl = max(range(len(rows)), key=lambda r: rows[r]["lpml"])
    for r, row in enumerate(rows):
        flags = ("", "") if len(rows) == 1 else (str(int(r == bw)), str(int(r == bl)))
        table.append(f"{row['model']},{io.FLOAT_FMT % row['waic']},{io.FLOAT_FMT % row['lpml']},{flags[0]},{flags[1]}")
    with io.output_dir(out):
        io.write_text(out / "comparison.csv", "\n".join(table) + "\n")
        io.write_text(out / "lagged_ari.csv", "\n".join(ari_lines) + "\n")
        io.write_text(out / "partitions.csv", "\n".join(part_lines) + "\n")
        io.write_text(out / "intervals.csv", "\n".join(int_lines) + "\n")
        io.write_json(out / "report.json", summary)
    return rows


# ---------------------------------------------------------------------------
# simulation studies


@dataclass
class Sim1Result:
    alpha: float
    ari: np.ndarray        # ARI(rho1_hat, rho2_hat) per replicate, dependent fit
    coverage: np.ndarray   # mu_it interval coverage per replicate
    waic_dep: np.ndarray
    waic_iid: np.ndarray


def sim1_fit_config(partition_dependence: bool, seed: int, iterations=10000, burn_in=5000, thin=5) -> ModelConfig:
    return ModelConfig(partition_dependence=partition_dependence, M=1.0, A_sigma=5.0, A_tau=10.0,
                       iterations=iterations, burn_in=burn_in, thin=thin, seed=seed)


def run_sim1(alpha: float, n_replicates: int, seed: int, **mcmc) -> Sim1Result:
    reps = generate_replicates(SynthConfig.sim1(alpha, n_replicates=n_replicates), seed)
    ari, cov, wd, wi = [], [], [], []
    for r, d in enumerate(reps):
        data = Dataset(d.Y)
        dep = run_chain(data, sim1_fit_config(True, derive_seed(seed, r, 1), **mcmc))
        iid = run_chain(data, sim1_fit_config(False, derive_seed(seed, r, 0), **mcmc))
        rep = estimate_report(dep)
        ari.append(adjusted_rand_index(rep.partitions[0], rep.partitions[1]))
        cov.append(np.mean((rep.mu_lower <= d.mu) & (d.mu <= rep.mu_upper)))
        wd.append(rep.waic)
        wi.append(waic(iid.loglik.reshape(iid.n_draws, -1)))
    return Sim1Result(alpha, np.array(ari), np.array(cov), np.array(wd), np.array(wi))


def run_sim2(alpha: float, phi1: float, n_replicates: int, seed: int) -> np.ndarray:
    """Mean lag-1 autocorrelation of each replicate's responses."""
    reps = generate_replicates(SynthConfig.sim2(alpha, phi1, n_replicates=n_replicates), seed)
    return np.array([lag1_autocorrelation(d.Y).mean() for d in reps])
