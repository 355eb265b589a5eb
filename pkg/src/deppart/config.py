"""Run configuration: a JSON document with one block per concern.

Blocks: ``model`` (toggles), ``prior`` (hyperparameters), ``mcmc`` (sampler
settings), ``io`` (paths and output options), ``simulate_prior`` and
``synth`` (settings for those commands). Every block is optional; unknown
blocks or keys are rejected. Environment variables of the form
``DEPPART__<BLOCK>__<KEY>=<json value>`` override file values.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any

from .gibbs import ModelConfig
from .synth import SynthConfig

ENV_PREFIX = "DEPPART__"


class ConfigError(ValueError):
    pass


@dataclass
class ModelBlock:
    partition_dependence: bool = True
    likelihood_ar: bool = False
    atom_ar: bool = False
    spatial: bool = False
    # "single" fits the toggles above; "all" fits all 8 combinations of the first three
    variants: str = "single"


@dataclass
class PriorBlock:
    M: float = 1.0
    nu0: float = 5.0
    A_sigma: float | None = None  # None: half the pooled standard deviation of Y
    A_tau: float = 5.0
    A_lambda: float = 10.0
    s2: float = 100.0
    laplace_a: float = 0.0
    laplace_b: float = 1.0
    a_alpha: float = 1.0
    b_alpha: float = 1.0


@dataclass
class McmcBlock:
    iterations: int = 20000
    burn_in: int = 10000
    thin: int = 10
    seed: int = 0
    prop_sigma: float | None = None
    prop_tau: float | None = None
    prop_lambda: float | None = None
    prop_phi1: float = 0.2
    prop_xi: float = 0.2


@dataclass
class IoBlock:
    data: str | None = None
    out: str = "out"
    chains: list[str] = field(default_factory=list)
    record_timing: bool = False
    loss: str = "vi_lb"


@dataclass
class SimulatePriorBlock:
    m: int = 20
    T: int = 10
    M: float = 0.5
    n_draws: int = 10000
    alphas: list[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 0.9])


@dataclass
class SynthBlock:
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


BLOCKS = {
    "model": ModelBlock,
    "prior": PriorBlock,
    "mcmc": McmcBlock,
    "io": IoBlock,
    "simulate_prior": SimulatePriorBlock,
    "synth": SynthBlock,
}


@dataclass
class RunConfig:
    model: ModelBlock = field(default_factory=ModelBlock)
    prior: PriorBlock = field(default_factory=PriorBlock)
    mcmc: McmcBlock = field(default_factory=McmcBlock)
    io: IoBlock = field(default_factory=IoBlock)
    simulate_prior: SimulatePriorBlock = field(default_factory=SimulatePriorBlock)
    synth: SynthBlock = field(default_factory=SynthBlock)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def model_config(self, A_sigma_default: float | None = None, **toggles) -> ModelConfig:
        A_sigma = self.prior.A_sigma if self.prior.A_sigma is not None else A_sigma_default
        if A_sigma is None:
            raise ConfigError("prior.A_sigma is unset and no data-based default is available")
        mb = self.model
        kw = dict(partition_dependence=mb.partition_dependence, likelihood_ar=mb.likelihood_ar,
                  atom_ar=mb.atom_ar, spatial=mb.spatial)
        kw.update(toggles)
        p = self.prior
        m = self.mcmc
        cfg = ModelConfig(
            **kw, M=p.M, nu0=p.nu0, A_sigma=A_sigma, A_tau=p.A_tau, A_lambda=p.A_lambda, s2=p.s2,
            laplace_a=p.laplace_a, laplace_b=p.laplace_b, a_alpha=p.a_alpha, b_alpha=p.b_alpha,
            iterations=m.iterations, burn_in=m.burn_in, thin=m.thin, seed=m.seed,
            prop_sigma=m.prop_sigma, prop_tau=m.prop_tau, prop_lambda=m.prop_lambda,
            prop_phi1=m.prop_phi1, prop_xi=m.prop_xi,
        )
        try:
            return cfg.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def synth_config(self) -> SynthConfig:
        try:
            return SynthConfig(**asdict(self.synth)).validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


_TYPES = {"bool": bool, "int": int, "float": float, "str": str}


def _check_value(block: str, name: str, annotation: str, value: Any) -> Any:
    where = f"{block}.{name}"
    optional = annotation.endswith("| None")
    base = annotation.replace(" | None", "")
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{where} may not be null")
    if base.startswith("list["):
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list")
        inner = _TYPES[base[5:-1]]
        return [_coerce(where, inner, v) for v in value]
    return _coerce(where, _TYPES[base], value)


def _coerce(where: str, typ, value):
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false, got {value!r}")
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{where} must be a string, got {value!r}")
    return value


def from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(doc) - set(BLOCKS)
    if unknown:
        raise ConfigError(f"unknown configuration blocks: {sorted(unknown)}")
    blocks = {}
    for name, cls in BLOCKS.items():
        raw = doc.get(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"block {name!r} must be an object")
        known = {f.name: f for f in fields(cls)}
        bad = set(raw) - set(known)
        if bad:
            raise ConfigError(f"unknown keys in {name!r}: {sorted(bad)}")
        kw = {k: _check_value(name, k, known[k].type, v) for k, v in raw.items()}
        blocks[name] = cls(**kw)
    cfg = RunConfig(**blocks)
    if cfg.model.variants not in ("single", "all"):
        raise ConfigError("model.variants must be 'single' or 'all'")
    return cfg


def env_overrides(environ=None) -> dict:
    """Collect ``DEPPART__BLOCK__KEY`` variables into a nested dict of parsed JSON values."""
    environ = os.environ if environ is None else environ
    out: dict = {}
    for key, raw in environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        parts = key[len(ENV_PREFIX):].split("__")
        if len(parts) != 2:
            raise ConfigError(f"environment override {key} must look like DEPPART__BLOCK__KEY")
        block, name = parts[0].lower(), parts[1]
        if block not in BLOCKS:
            raise ConfigError(f"environment override {key} names unknown block {block!r}")
        # exact case wins (m vs M); otherwise match case-insensitively if unambiguous
        known = [f.name for f in fields(BLOCKS[block])]
        if name in known:
            field_name = name
        else:
            hits = [k for k in known if k.lower() == name.lower()]
            if len(hits) != 1:
                raise ConfigError(f"environment override {key} names unknown or ambiguous key {name!r}")
            field_name = hits[0]
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        out.setdefault(block, {})[field_name] = value
    return out


def merge(doc: dict, overrides: dict) -> dict:
    merged = {k: dict(v) if isinstance(v, dict) else v for k, v in doc.items()}
    for block, values in overrides.items():
        merged.setdefault(block, {})
        if not isinstance(merged[block], dict):
            raise ConfigError(f"block {block!r} must be an object")
        merged[block].update(values)
    return merged


def load(path: str | None, environ=None) -> RunConfig:
    doc: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return from_dict(merge(doc, env_overrides(environ)))
