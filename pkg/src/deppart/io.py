"""File formats: wide CSV panels in, flat CSV draw files and JSON metadata out.

All writers go through ``atomic_write`` (temporary file in the target
directory, then ``os.replace``) so a crash never leaves a half-written file
under the final name.
"""

from __future__ import annotations

import csv
import io
import json
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .eppf import standardize_coords
from .gibbs import ChainOutput, Dataset


class DataError(ValueError):
    pass


FLOAT_FMT = "%.10g"


@contextmanager
def atomic_write(path, mode: str = "w"):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, encoding=None if "b" in mode else "utf-8", newline=None if "b" in mode else "") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text(path, text: str):
    with atomic_write(path) as fh:
        fh.write(text)


def write_json(path, obj):
    write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _table(header: list[str], columns: list[np.ndarray], fmts: list[str]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    if len(columns[0]):
        np.savetxt(buf, np.column_stack(columns), fmt=fmts, delimiter=",")
    return buf.getvalue()


@contextmanager
def output_dir(path):
    """Create ``path`` if needed; on failure remove every file written inside it by this block."""
    path = Path(path)
    existed = path.exists()
    before = set(path.rglob("*")) if existed else set()
    path.mkdir(parents=True, exist_ok=True)
    try:
        yield path
    except BaseException:
        if not existed:
            shutil.rmtree(path, ignore_errors=True)
        else:
            for p in sorted(set(path.rglob("*")) - before, reverse=True):
                if p.is_dir():
                    shutil.rmtree(p, ignore_errors=True)
                else:
                    p.unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------------------
# panels


def read_panel(path, need_coords: bool = False) -> tuple[Dataset, dict]:
    """Read ``unit_id, [lat, lon,] y_1..y_T`` and standardize coordinates if present.

    Returns the dataset and a dict with the coordinate means and sds (empty
    when there are no coordinates).
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read data file {path}: {exc.strerror}") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "unit_id":
        raise DataError(f"{path}: first column must be 'unit_id'")
    has_coords = header[1:3] == ["lat", "lon"]
    ycols = header[3:] if has_coords else header[1:]
    if not ycols:
        raise DataError(f"{path}: no response columns")
    for j, name in enumerate(ycols):
        if not name.startswith("y_"):
            raise DataError(f"{path}: column {j + (4 if has_coords else 2)} is {name!r}, expected y_<t>")
    if need_coords and not has_coords:
        raise DataError(f"{path}: the spatial prior needs 'lat' and 'lon' columns")
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")
    ids, vals = [], []
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r} has {len(row)} fields, expected {len(header)}")
        ids.append(row[0])
        try:
            vals.append([float(v) for v in row[1:]])
        except ValueError:
            bad = next(c for c, v in enumerate(row[1:], start=2) if not _is_float(v))
            raise DataError(f"{path}: row {r}, column {bad}: {row[bad - 1]!r} is not a number") from None
    arr = np.array(vals)
    bad = np.argwhere(~np.isfinite(arr))
    if bad.size:
        r, c = bad[0]
        raise DataError(f"{path}: row {r + 2}, column {c + 2} is not finite")
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate unit_id values")
    coords, scaling = None, {}
    if has_coords:
        coords, mean, sd = standardize_coords(arr[:, :2])
        scaling = {"mean": mean.tolist(), "sd": sd.tolist()}
        Y = arr[:, 2:]
    else:
        Y = arr
    return Dataset(Y, coords, ids, [c[2:] for c in ycols]), scaling


def _is_float(v) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def write_panel(path, Y, unit_ids=None, coords=None):
    Y = np.asarray(Y, dtype=float)
    m, T = Y.shape
    ids = unit_ids or [str(i + 1) for i in range(m)]
    header = ["unit_id"] + (["lat", "lon"] if coords is not None else []) + [f"y_{t + 1}" for t in range(T)]
    lines = [",".join(header)]
    for i in range(m):
        vals = ([] if coords is None else list(coords[i])) + list(Y[i])
        lines.append(",".join([ids[i]] + [FLOAT_FMT % v for v in vals]))
    write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# chains


def _labels_header(data: Dataset) -> list[str]:
    return ["iterate"] + [f"t{t}:{u}" for t in data.time_ids for u in data.unit_ids]


def write_chain(out_dir, chain: ChainOutput, data: Dataset, extra_meta: dict | None = None,
                record_timing: bool = False):
    out = Path(out_dir)
    S, T, m = chain.labels.shape
    it = chain.iterations
    write_text(out / "partitions.csv",
               _table(_labels_header(data), [it, chain.labels.reshape(S, T * m)], ["%d"] * (1 + T * m)))
    write_text(out / "gammas.csv",
               _table(_labels_header(data), [it, chain.gamma.reshape(S, T * m)], ["%d"] * (1 + T * m)))

    names, idx, iters, vals = [], [], [], []
    for name, arr in (("tau", chain.tau), ("phi0", chain.phi0), ("phi1", chain.phi1), ("lambda", chain.lam)):
        names += [name] * S
        idx.append(np.zeros(S, dtype=int))
        iters.append(it)
        vals.append(arr)
    for name, arr in (("alpha", chain.alpha), ("theta", chain.theta), ("eta", chain.eta)):
        n = arr.shape[1]
        names += [name] * (S * n)
        idx.append(np.tile(np.arange(1, n + 1), S))
        iters.append(np.repeat(it, n))
        vals.append(arr.ravel())
    idx = np.concatenate(idx)
    iters = np.concatenate(iters)
    vals = np.concatenate(vals)
    lines = ["iterate,name,index,value"]
    lines += [f"{a},{n},{b},{FLOAT_FMT % v}" for a, n, b, v in zip(iters.tolist(), names, idx.tolist(), vals.tolist())]
    write_text(out / "params.csv", "\n".join(lines) + "\n")

    ut_header = ["iterate"] + [f"{u}:t{t}" for u in data.unit_ids for t in data.time_ids]
    write_text(out / "mu.csv", _table(ut_header, [it, chain.mu.reshape(S, m * T)], ["%d"] + [FLOAT_FMT] * (m * T)))
    write_text(out / "sigma.csv", _table(ut_header, [it, chain.sigma.reshape(S, m * T)], ["%d"] + [FLOAT_FMT] * (m * T)))

    unit_idx = np.tile(np.repeat(np.arange(1, m + 1), T), S)
    t_idx = np.tile(np.arange(1, T + 1), S * m)
    write_text(out / "loglik.csv",
               _table(["iterate", "unit", "t", "value"],
                      [np.repeat(it, m * T), unit_idx, t_idx, chain.loglik.ravel()],
                      ["%d", "%d", "%d", FLOAT_FMT]))

    meta = {
        "config": chain.config,
        "seed": chain.seed,
        "acceptance": chain.acceptance,
        "n_draws": int(S),
        "m": int(m),
        "T": int(T),
        "unit_ids": list(data.unit_ids),
        "time_ids": list(data.time_ids),
    }
    if record_timing:
        meta["wall_time_seconds"] = chain.wall_time
    if extra_meta:
        meta.update(extra_meta)
    write_json(out / "run_meta.json", meta)


def read_chain(chain_dir) -> ChainOutput:
    d = Path(chain_dir)
    try:
        meta = json.loads((d / "run_meta.json").read_text(encoding="utf-8"))
        parts = np.loadtxt(d / "partitions.csv", delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
        gams = np.loadtxt(d / "gammas.csv", delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
        mu = np.loadtxt(d / "mu.csv", delimiter=",", skiprows=1, ndmin=2)
        sigma = np.loadtxt(d / "sigma.csv", delimiter=",", skiprows=1, ndmin=2)
        ll = np.loadtxt(d / "loglik.csv", delimiter=",", skiprows=1, ndmin=2)
        params = _read_params(d / "params.csv")
    except OSError as exc:
        raise DataError(f"cannot read chain in {d}: {exc}") from None
    S, m, T = meta["n_draws"], meta["m"], meta["T"]
    if parts.shape != (S, 1 + T * m) or ll.shape[0] != S * m * T:
        raise DataError(f"chain files in {d} do not match run_meta.json dimensions")
    return ChainOutput(
        labels=parts[:, 1:].reshape(S, T, m),
        gamma=gams[:, 1:].reshape(S, T, m).astype(np.int8),
        alpha=params["alpha"].reshape(S, T),
        theta=params["theta"].reshape(S, T),
        tau=params["tau"],
        phi0=params["phi0"],
        phi1=params["phi1"],
        lam=params["lambda"],
        eta=params["eta"].reshape(S, m),
        mu=mu[:, 1:].reshape(S, m, T),
        sigma=sigma[:, 1:].reshape(S, m, T),
        loglik=ll[:, 3].reshape(S, m, T),
        iterations=parts[:, 0],
        config=meta["config"],
        seed=meta["seed"],
        acceptance=meta["acceptance"],
        wall_time=meta.get("wall_time_seconds", 0.0),
    )


def _read_params(path) -> dict[str, np.ndarray]:
    out: dict[str, list[float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for _, name, _, value in reader:
            out.setdefault(name, []).append(float(value))
    return {k: np.asarray(v) for k, v in out.items()}
