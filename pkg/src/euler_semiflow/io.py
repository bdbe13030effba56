"""Trajectory containers, diagnostics tables and run manifests.

Containers are JSON documents.  Floats are written with ``repr`` precision, so
reading a file back reproduces every field bit for bit, and keys are sorted so
identical trajectories give identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import FileFormatError
from .riemann import RiemannDatum
from .state import DefectState, FluidState, Grid, InitialDatum, Snapshot
from .thermo import GasConstants
from .trajectory import Trajectory, total_entropy_series

FORMAT = "euler-semiflow-trajectory"
FORMAT_VERSION = 1
DIAGNOSTIC_COLUMNS = ("t", "mass", "energy", "defect_total", "total_entropy", "sigma")
_DEFECTS = ("C_kin", "C_int", "c_plus", "c_minus")


def atomic_write(path: str | os.PathLike, data: str | bytes) -> None:
    """Write to a temporary sibling, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- encoding -------------------------------------------------------------------------


def _encode_state(st: FluidState) -> dict:
    return {"rho": st.rho.tolist(), "m": st.m.tolist(), "S": st.S.tolist()}


def _encode_snapshot(s: Snapshot) -> dict:
    out = _encode_state(s.state)
    out.update({k: getattr(s.defects, k).tolist() for k in _DEFECTS})
    return out


def _encode_meta(meta: dict) -> dict:
    out = {}
    for k, v in meta.items():
        if isinstance(v, RiemannDatum):
            v = {"left": list(v.left), "right": list(v.right)}
        elif isinstance(v, np.generic):
            v = v.item()
        out[k] = v
    return out


def trajectory_to_dict(traj: Trajectory, gas: GasConstants) -> dict:
    grid = traj.grid
    return {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "id": traj.id,
        "gas": {"gamma": gas.gamma, "s0": gas.s0, "c_v": gas.c_v},
        "grid": {"N": grid.N, "L": grid.L},
        "E0": traj.E0,
        "datum": {"state": _encode_state(traj.datum.state), "meta": _encode_meta(traj.datum.meta)},
        "time_unit": traj.time_unit,
        "ticks": [int(k) for k in traj.ticks],
        "meta": _encode_meta(traj.meta),
        "left": [_encode_snapshot(s) for s in traj.left],
        "right": [_encode_snapshot(s) for s in traj.right],
    }


def dumps_trajectory(traj: Trajectory, gas: GasConstants) -> str:
    return json.dumps(trajectory_to_dict(traj, gas), sort_keys=True, allow_nan=False) + "\n"


def write_trajectory(path, traj: Trajectory, gas: GasConstants) -> Path:
    atomic_write(path, dumps_trajectory(traj, gas))
    return Path(path)


# -- decoding -------------------------------------------------------------------------


def _decode_state(grid: Grid, d: dict) -> FluidState:
    return FluidState(grid, d["rho"], d["m"], d["S"])


def _decode_snapshot(grid: Grid, d: dict) -> Snapshot:
    return Snapshot(_decode_state(grid, d), DefectState(*(d[k] for k in _DEFECTS)))


def _decode_datum_meta(meta: dict) -> dict:
    meta = dict(meta)
    if isinstance(meta.get("riemann"), dict):
        rd = meta["riemann"]
        meta["riemann"] = RiemannDatum(tuple(rd["left"]), tuple(rd["right"]))
    return meta


def trajectory_from_dict(doc: dict) -> tuple[Trajectory, GasConstants]:
    if doc.get("format") != FORMAT:
        raise FileFormatError("not a trajectory container")
    if doc.get("version") != FORMAT_VERSION:
        raise FileFormatError(f"unsupported container version {doc.get('version')}")
    gas = GasConstants(doc["gas"]["gamma"], doc["gas"]["s0"])
    grid = Grid(int(doc["grid"]["N"]), float(doc["grid"]["L"]))
    datum = InitialDatum(
        _decode_state(grid, doc["datum"]["state"]), float(doc["E0"]), _decode_datum_meta(doc["datum"]["meta"])
    )
    traj = Trajectory(
        datum,
        np.asarray(doc["ticks"], dtype=np.int64),
        float(doc["time_unit"]),
        [_decode_snapshot(grid, s) for s in doc["left"]],
        [_decode_snapshot(grid, s) for s in doc["right"]],
        doc["id"],
        dict(doc["meta"]),
    )
    return traj, gas


def read_trajectory(path) -> tuple[Trajectory, GasConstants]:
    """Load a container; any malformed content raises :class:`FileFormatError`."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
        return trajectory_from_dict(doc)
    except FileFormatError:
        raise
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: {type(exc).__name__}: {exc}") from exc


# -- diagnostics ------------------------------------------------------------------------


def diagnostics_rows(traj: Trajectory, gas: GasConstants) -> list[tuple[float, ...]]:
    """One row per node, taken from right values."""
    _, right_S = total_entropy_series(traj)
    S0 = traj.datum.state.total_entropy()
    rows = []
    for t, snap, S in zip(traj.times, traj.right, right_S):
        st = snap.state
        rows.append(
            (float(t), st.mass(), st.total_energy(gas), snap.defects.total(st.grid), float(S), float(S - S0))
        )
    return rows


def diagnostics_csv(traj: Trajectory, gas: GasConstants) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DIAGNOSTIC_COLUMNS)
    for row in diagnostics_rows(traj, gas):
        w.writerow([repr(x) for x in row])
    return buf.getvalue()


def write_diagnostics(path, traj: Trajectory, gas: GasConstants) -> Path:
    atomic_write(path, diagnostics_csv(traj, gas))
    return Path(path)


def read_diagnostics(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != DIAGNOSTIC_COLUMNS:
        raise FileFormatError(f"{path}: unexpected diagnostics header")
    data = np.array(rows[1:], dtype=float).reshape(-1, len(DIAGNOSTIC_COLUMNS))
    return {c: data[:, i] for i, c in enumerate(DIAGNOSTIC_COLUMNS)}


# -- run manifests ----------------------------------------------------------------------


def now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class RunManifest:
    command: str
    config_hash: str
    version: str
    seed: int
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    started: str = field(default_factory=now)
    finished: str | None = None

    def write(self, path) -> Path:
        atomic_write(path, json.dumps(asdict(self), sort_keys=True, indent=2) + "\n")
        return Path(path)

    @classmethod
    def read(cls, path) -> "RunManifest":
        try:
            with open(path) as fh:
                return cls(**json.load(fh))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise FileFormatError(f"{path}: {exc}") from exc
