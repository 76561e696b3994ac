"""Binary field snapshots and trajectory persistence.

Format: a 32-byte header (magic ``EULB``, version u16, dims u16, n_per_axis
u32, component count u32, 16 reserved bytes), then each component's samples
row-major as little-endian 64-bit floats.  Trajectories become one snapshot
per recorded state plus a ``manifest.json`` carrying times, ledgers, the
component names, and the configuration hash.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .grid_fields import Field, PeriodicGrid, ScalarField, VelocityField, curl_2d
from .reporting import config_hash, dump_json

__all__ = [
    "write_field",
    "read_field",
    "save_trajectory",
    "load_trajectory",
    "FORMAT_VERSION",
]

MAGIC = b"EULB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHII16s")


def _write_snapshot(path, grid: PeriodicGrid, components: Sequence[np.ndarray]) -> None:
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                MAGIC, FORMAT_VERSION, grid.dims, grid.n_per_axis,
                len(components), b"\x00" * 16,
            )
        )
        for comp in components:
            if comp.shape != grid.shape:
                raise ConfigurationError("component shape does not match the grid")
            fh.write(np.ascontiguousarray(comp, dtype="<f8").tobytes())


def _read_snapshot(path) -> tuple[PeriodicGrid, list[np.ndarray]]:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ConfigurationError(f"{path}: truncated header")
        magic, version, dims, n, count, _ = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ConfigurationError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise ConfigurationError(f"{path}: unsupported version {version}")
        grid = PeriodicGrid(dims, n)
        out = []
        per = n**dims
        for _ in range(count):
            buf = fh.read(8 * per)
            if len(buf) != 8 * per:
                raise ConfigurationError(f"{path}: truncated payload")
            out.append(np.frombuffer(buf, dtype="<f8").astype(float).reshape(grid.shape))
        return grid, out


def write_field(path, field: Field) -> None:
    """Persist one scalar or velocity field."""
    if isinstance(field, ScalarField):
        _write_snapshot(path, field.grid, [field.values])
    else:
        _write_snapshot(path, field.grid, [c.values for c in field.components])


def read_field(path) -> Field:
    """Load a field; one component reads as a scalar, ``dims`` as a velocity."""
    grid, comps = _read_snapshot(path)
    if len(comps) == 1:
        return ScalarField(grid, comps[0])
    if len(comps) == grid.dims:
        return VelocityField.from_arrays(grid, comps)
    raise ConfigurationError(
        f"{path}: {len(comps)} components fit neither a scalar nor a velocity"
    )


def _state_components(state) -> tuple[list[str], list[np.ndarray]]:
    names = [f"u{i + 1}" for i in range(state.velocity.grid.dims)]
    arrays = [c.values for c in state.velocity.components]
    if hasattr(state, "vorticity"):
        names.append("vorticity")
        arrays.append(state.vorticity.values)
    if hasattr(state, "density"):
        names.append("density")
        arrays.append(state.density.values)
    if hasattr(state, "theta"):
        names.append("theta")
        arrays.append(state.theta.values)
    return names, arrays


def save_trajectory(traj, outdir) -> Path:
    """Write one snapshot per state plus the manifest; returns the manifest
    path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    names = None
    files = []
    for idx, state in enumerate(traj.states):
        fname = f"state_{idx:06d}.eulb"
        state_names, arrays = _state_components(state)
        if names is None:
            names = state_names
        _write_snapshot(outdir / fname, state.velocity.grid, arrays)
        files.append(fname)
    config_text = json.dumps(traj.config, sort_keys=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": type(traj).__name__,
        "components": names,
        "times": traj.times,
        "energy_ledger": traj.energy_ledger,
        "dt": traj.dt,
        "config": traj.config,
        "config_hash": config_hash(config_text),
        "files": files,
    }
    for extra in ("mass_ledger", "theta_ledger"):
        if hasattr(traj, extra):
            manifest[extra] = getattr(traj, extra)
    path = outdir / "manifest.json"
    dump_json(manifest, path)
    return path


def load_trajectory(outdir):
    """Rebuild a trajectory from a snapshot directory.

    Velocity components are reloaded as stored; vorticity is recomputed when
    it was not written (it is derived data).
    """
    outdir = Path(outdir)
    manifest = json.loads((outdir / "manifest.json").read_text())
    names = manifest["components"]
    states = []
    for t, fname in zip(manifest["times"], manifest["files"]):
        grid, comps = _read_snapshot(outdir / fname)
        by_name = dict(zip(names, comps))
        vel = VelocityField.from_arrays(
            grid, [by_name[f"u{i + 1}"] for i in range(grid.dims)],
            divergence_free=True,
        )
        if manifest["kind"] == "Trajectory":
            from .solver import SolverState

            w = (
                ScalarField(grid, by_name["vorticity"])
                if "vorticity" in by_name
                else curl_2d(vel)
            )
            states.append(SolverState(t, vel, w))
        elif manifest["kind"] == "InhomTrajectory":
            from .extensions import InhomState

            states.append(InhomState(t, ScalarField(grid, by_name["density"]), vel))
        elif manifest["kind"] == "BoussinesqTrajectory":
            from .extensions import BoussinesqState

            g = tuple(manifest["config"].get("g", (0.0, 0.0)))
            states.append(BoussinesqState(t, ScalarField(grid, by_name["theta"]), vel, g))
        else:
            raise ConfigurationError(f"unknown trajectory kind {manifest['kind']!r}")
    if manifest["kind"] == "Trajectory":
        from .solver import Trajectory

        return Trajectory(states, manifest["dt"], manifest["config"],
                          manifest["energy_ledger"])
    if manifest["kind"] == "InhomTrajectory":
        from .extensions import InhomTrajectory

        return InhomTrajectory(states, manifest["dt"], manifest["config"],
                               manifest["energy_ledger"], manifest["mass_ledger"])
    from .extensions import BoussinesqTrajectory

    return BoussinesqTrajectory(states, manifest["dt"], manifest["config"],
                                manifest["energy_ledger"], manifest["theta_ledger"])
