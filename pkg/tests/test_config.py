import json

import pytest

from deppart.config import ConfigError, RunConfig, env_overrides, from_dict, load


def test_defaults_round_trip(tmp_path):
    cfg = RunConfig()
    p = tmp_path / "c.json"
    p.write_text(cfg.to_json())
    assert load(str(p), environ={}) == cfg
    assert from_dict(json.loads(cfg.to_json())) == cfg


def test_unknown_keys_and_blocks_rejected():
    with pytest.raises(ConfigError, match="unknown keys"):
        from_dict({"mcmc": {"iters": 10}})
    with pytest.raises(ConfigError, match="unknown configuration blocks"):
        from_dict({"sampler": {}})


@pytest.mark.parametrize("doc", [
    {"mcmc": {"iterations": "10"}},
    {"mcmc": {"iterations": 1.5}},
    {"model": {"spatial": 1}},
    {"prior": {"M": None}},
    {"simulate_prior": {"alphas": 0.5}},
    {"model": {"variants": "some"}},
])
def test_type_errors(doc):
    with pytest.raises(ConfigError):
        from_dict(doc)


def test_env_overrides_take_precedence(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"mcmc": {"iterations": 50}, "prior": {"A_sigma": 2.0}}))
    env = {"DEPPART__MCMC__ITERATIONS": "70", "DEPPART__PRIOR__A_SIGMA": "3", "DEPPART__IO__OUT": "res",
           "OTHER": "x"}
    cfg = load(str(p), environ=env)
    assert cfg.mcmc.iterations == 70 and cfg.prior.A_sigma == 3.0 and cfg.io.out == "res"


def test_env_case_collision():
    got = env_overrides({"DEPPART__SYNTH__M": "2", "DEPPART__SYNTH__m": "7", "DEPPART__SYNTH__Mode": "\"sim2\""})
    assert got == {"synth": {"M": 2, "m": 7, "mode": "sim2"}}


@pytest.mark.parametrize("env", [{"DEPPART__MCMC": "1"}, {"DEPPART__FOO__BAR": "1"}, {"DEPPART__MCMC__NOPE": "1"},
                                 {"DEPPART__MCMC__ITERATIONS": "\"many\""}])
def test_bad_env_overrides(env):
    with pytest.raises(ConfigError):
        load(None, environ=env)


def test_model_config_validation():
    cfg = from_dict({"mcmc": {"iterations": 10, "burn_in": 20}})
    with pytest.raises(ConfigError):
        cfg.model_config(1.0)
    with pytest.raises(ConfigError, match="A_sigma"):
        RunConfig().model_config(None)
    mc = RunConfig().model_config(1.5)
    assert mc.A_sigma == 1.5 and mc.partition_dependence


def test_missing_or_bad_file(tmp_path):
    with pytest.raises(ConfigError):
        load(str(tmp_path / "none.json"), environ={})
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(ConfigError):
        load(str(p), environ={})
