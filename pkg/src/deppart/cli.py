"""Command-line entry point: ``deppart {simulate-prior,synth,fit,report}``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import experiments as ex
from . import io
from .gibbs import NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

log = logging.getLogger("deppart")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="random seed (overrides mcmc.seed)")
    common.add_argument("--out", help="output directory (overrides io.out)")
    common.add_argument("--threads", type=int, default=1, help="worker processes for independent fits")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="deppart", description="Dependent random partition models")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate-prior", parents=[common], help="lagged ARI grid under the partition prior")
    sub.add_parser("synth", parents=[common], help="generate synthetic panels")
    fit = sub.add_parser("fit", parents=[common], help="run the Gibbs sampler on a panel")
    fit.add_argument("--data", help="wide CSV panel (overrides io.data)")
    rep = sub.add_parser("report", parents=[common], help="summarize and compare fitted chains")
    rep.add_argument("chains", nargs="*", help="chain directories (default: io.chains or subdirectories of --out)")
    rep.add_argument("--data", help="panel the chains were fitted to, for a dimension check")
    return p


def _seed(args, cfg) -> int:
    seed = args.seed if args.seed is not None else cfg.mcmc.seed
    if seed < 0:
        raise cfgmod.ConfigError("seed must be non-negative")
    return seed


def cmd_simulate_prior(args, cfg) -> int:
    sp = cfg.simulate_prior
    if sp.n_draws < 1 or sp.m < 1 or sp.T < 2 or not sp.M > 0:
        raise cfgmod.ConfigError("simulate_prior needs n_draws >= 1, m >= 1, T >= 2 and M > 0")
    if any(not 0 <= a <= 1 for a in sp.alphas):
        raise cfgmod.ConfigError("simulate_prior.alphas must lie in [0, 1]")
    seed = _seed(args, cfg)
    rows = ex.simulate_prior(sp.m, sp.T, sp.M, sp.alphas, sp.n_draws, seed)
    out = Path(args.out or cfg.io.out)
    with io.output_dir(out):
        ex.write_prior_grid(out, rows, {**asdict(sp), "seed": seed})
    return EXIT_OK


def cmd_synth(args, cfg) -> int:
    sc = cfg.synth_config()
    out = Path(args.out or cfg.io.out)
    with io.output_dir(out):
        ex.write_synth(out, sc, _seed(args, cfg))
    return EXIT_OK


def cmd_fit(args, cfg) -> int:
    path = args.data or cfg.io.data
    if path is None:
        raise cfgmod.ConfigError("no input data: pass --data or set io.data")
    data, scaling = io.read_panel(path, need_coords=False)
    if cfg.model.spatial and data.coords is None:
        raise cfgmod.ConfigError("model.spatial is on but the data file has no lat/lon columns")
    A_sigma_default = 0.5 * float(np.std(data.Y, ddof=1))
    base = cfg.model_config(A_sigma_default)
    base.seed = _seed(args, cfg)
    configs = ex.variant_configs(base, cfg.model.variants == "all")
    extra = {"data": str(path), "coord_scaling": scaling}
    ex.fit_variants(data, configs, Path(args.out or cfg.io.out), extra, cfg.io.record_timing,
                    max(1, args.threads))
    return EXIT_OK


def cmd_report(args, cfg) -> int:
    out = Path(args.out or cfg.io.out)
    chains = list(args.chains) or list(cfg.io.chains)
    if not chains:
        chains = sorted(str(p.parent) for p in out.glob("*/run_meta.json"))
    if not chains:
        raise io.DataError(f"no chains given and none found under {out}")
    dims = None
    data_path = args.data or cfg.io.data
    if data_path:
        data, _ = io.read_panel(data_path)
        dims = (data.m, data.T)
    report_dir = out / "report"
    ex.build_report(chains, report_dir, cfg.io.loss, dims)
    return EXIT_OK


COMMANDS = {
    "simulate-prior": cmd_simulate_prior,
    "synth": cmd_synth,
    "fit": cmd_fit,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load(args.config)
        return COMMANDS[args.command](args, cfg)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (io.DataError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        sweep = getattr(exc, "sweep", None)
        print(f"numerical failure{'' if sweep is None else f' at sweep {sweep}'}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
