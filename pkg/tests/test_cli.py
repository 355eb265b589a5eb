import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from deppart.cli import main
from deppart.io import read_chain, read_panel, write_panel

SMALL = {
    "mcmc": {"iterations": 60, "burn_in": 20, "thin": 2},
    "simulate_prior": {"m": 6, "T": 3, "n_draws": 200, "alphas": [0.0, 0.5]},
    "synth": {"m": 8, "T": 3},
}


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    import os
    for k in list(os.environ):
        if k.startswith("DEPPART__"):
            monkeypatch.delenv(k)


def _config(tmp_path, extra=None) -> str:
    doc = json.loads(json.dumps(SMALL))
    for block, vals in (extra or {}).items():
        doc.setdefault(block, {}).update(vals)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(doc))
    return str(p)


def _digest(root: Path) -> dict[str, str]:
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


def _panel(tmp_path, coords=False) -> str:
    rng = np.random.default_rng(0)
    path = tmp_path / "panel.csv"
    write_panel(path, rng.normal(size=(6, 3)), coords=rng.normal(size=(6, 2)) if coords else None)
    return str(path)


@pytest.mark.parametrize("cmd", ["simulate-prior", "synth"])
def test_generators_are_byte_deterministic(tmp_path, cmd):
    cfg = _config(tmp_path)
    for name in ("a", "b"):
        assert main([cmd, "--config", cfg, "--seed", "5", "--out", str(tmp_path / name)]) == 0
    assert _digest(tmp_path / "a") == _digest(tmp_path / "b")
    assert _digest(tmp_path / "a")


def test_fit_and_report_deterministic_and_inputs_untouched(tmp_path):
    data = _panel(tmp_path)
    cfg = _config(tmp_path, {"model": {"variants": "all"}})
    before = Path(data).read_bytes(), Path(cfg).read_bytes()
    for name, threads in (("a", "1"), ("b", "2")):
        out = str(tmp_path / name)
        assert main(["fit", "--config", cfg, "--data", data, "--out", out, "--seed", "9", "--threads", threads]) == 0
        assert main(["report", "--config", cfg, "--out", out, "--data", data]) == 0
    assert _digest(tmp_path / "a") == _digest(tmp_path / "b")
    assert (Path(data).read_bytes(), Path(cfg).read_bytes()) == before
    chains = sorted(p.parent.name for p in (tmp_path / "a").glob("*/run_meta.json"))
    assert len(chains) == 8
    table = (tmp_path / "a" / "report" / "comparison.csv").read_text().splitlines()
    assert len(table) == 9
    assert sum(int(r.split(",")[3]) for r in table[1:]) == 1
    assert sum(int(r.split(",")[4]) for r in table[1:]) == 1
    meta = json.loads((tmp_path / "a" / chains[0] / "run_meta.json").read_text())
    assert "wall_time_seconds" not in meta


def test_chain_files_round_trip(tmp_path):
    data = _panel(tmp_path)
    out = tmp_path / "o"
    assert main(["fit", "--config", _config(tmp_path), "--data", data, "--out", str(out)]) == 0
    (d,) = [p.parent for p in out.glob("*/run_meta.json")]
    chain = read_chain(d)
    assert chain.labels.shape == (20, 3, 6) and chain.loglik.shape == (20, 6, 3)
    assert np.isfinite(chain.loglik).all()


def test_single_chain_report_has_no_flags(tmp_path):
    data = _panel(tmp_path)
    out = tmp_path / "o"
    cfg = _config(tmp_path)
    assert main(["fit", "--config", cfg, "--data", data, "--out", str(out)]) == 0
    assert main(["report", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "report" / "comparison.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].endswith(",,")


def test_record_timing(tmp_path):
    out = tmp_path / "o"
    cfg = _config(tmp_path, {"io": {"record_timing": True}})
    assert main(["fit", "--config", cfg, "--data", _panel(tmp_path), "--out", str(out)]) == 0
    (meta,) = out.glob("*/run_meta.json")
    assert json.loads(meta.read_text())["wall_time_seconds"] > 0


def test_spatial_fit_with_coords(tmp_path):
    out = tmp_path / "o"
    cfg = _config(tmp_path, {"model": {"spatial": True}})
    assert main(["fit", "--config", cfg, "--data", _panel(tmp_path, coords=True), "--out", str(out)]) == 0
    (meta,) = out.glob("*/run_meta.json")
    assert set(json.loads(meta.read_text())["coord_scaling"]) == {"mean", "sd"}


def test_spatial_without_coords_is_config_error(tmp_path, capsys):
    cfg = _config(tmp_path, {"model": {"spatial": True}})
    assert main(["fit", "--config", cfg, "--data", _panel(tmp_path), "--out", str(tmp_path / "o")]) == 2
    assert "lat/lon" in capsys.readouterr().err


def test_nonfinite_data_is_data_error(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("unit_id,y_1,y_2\na,1.0,2.0\nb,nan,1.0\n")
    assert main(["fit", "--config", _config(tmp_path), "--data", str(p), "--out", str(tmp_path / "o")]) == 3
    assert "row 3, column 2" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("text,needle", [
    ("id,y_1\n1,2\n", "unit_id"),
    ("unit_id,y_1\n1,abc\n", "not a number"),
    ("unit_id,y_1,y_2\n1,2\n", "fields"),
    ("unit_id,y_1\n1,2\n1,3\n", "duplicate"),
])
def test_malformed_panels(tmp_path, capsys, text, needle):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    assert main(["fit", "--config", _config(tmp_path), "--data", str(p), "--out", str(tmp_path / "o")]) == 3
    assert needle in capsys.readouterr().err


def test_config_errors(tmp_path, monkeypatch):
    assert main(["synth", "--config", str(tmp_path / "missing.json")]) == 2
    monkeypatch.setenv("DEPPART__MCMC__NOPE", "1")
    assert main(["synth", "--out", str(tmp_path / "o")]) == 2
    monkeypatch.delenv("DEPPART__MCMC__NOPE")
    monkeypatch.setenv("DEPPART__SYNTH__ALPHA", "2.0")
    assert main(["synth", "--out", str(tmp_path / "o")]) == 2
    assert main(["fit", "--out", str(tmp_path / "o")]) == 2


def test_env_override_applies(tmp_path, monkeypatch):
    monkeypatch.setenv("DEPPART__SYNTH__m", "4")
    monkeypatch.setenv("DEPPART__SYNTH__M", "2.5")
    assert main(["synth", "--config", _config(tmp_path), "--out", str(tmp_path / "o")]) == 0
    data, _ = read_panel(tmp_path / "o" / "data.csv")
    assert data.m == 4
    prov = json.loads((tmp_path / "o" / "provenance.json").read_text())
    assert prov["generator"]["M"] == 2.5


def test_report_dimension_mismatch(tmp_path):
    out = tmp_path / "o"
    cfg = _config(tmp_path)
    assert main(["fit", "--config", cfg, "--data", _panel(tmp_path), "--out", str(out)]) == 0
    other = tmp_path / "other.csv"
    write_panel(other, np.zeros((5, 3)))
    assert main(["report", "--config", cfg, "--out", str(out), "--data", str(other)]) == 3
    assert main(["report", "--config", cfg, "--out", str(tmp_path / "empty")]) == 3


def test_synth_replicates_layout(tmp_path):
    cfg = _config(tmp_path, {"synth": {"n_replicates": 2, "mode": "sim2", "phi1": 0.5}})
    assert main(["synth", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    for r in ("rep_001", "rep_002"):
        assert {p.name for p in (tmp_path / "o" / r).iterdir()} == {
            "data.csv", "truth.csv", "truth_gamma.csv", "provenance.json"}


def test_report_dominant_chain_wins_both_criteria(tmp_path):
    import shutil

    out = tmp_path / "o"
    assert main(["fit", "--config", _config(tmp_path), "--data", _panel(tmp_path), "--out", str(out)]) == 0
    (base,) = [p.parent for p in out.glob("*/run_meta.json")]
    better = out / "better"
    shutil.copytree(base, better)
    ll = np.loadtxt(better / "loglik.csv", delimiter=",", skiprows=1)
    ll[:, 3] += 0.25
    np.savetxt(better / "loglik.csv", ll, fmt=["%d", "%d", "%d", "%.10g"], delimiter=",",
               header="iterate,unit,t,value", comments="")
    assert main(["report", str(base), str(better), "--out", str(out)]) == 0
    rows = [r.split(",") for r in (out / "report" / "comparison.csv").read_text().splitlines()[1:]]
    flags = {r[0]: (r[3], r[4]) for r in rows}
    assert flags == {base.name: ("0", "0"), "better": ("1", "1")}
