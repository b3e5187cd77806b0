"""Run orchestration: manifest resolution, the main step loop, diagnostic
and profile emission, checkpointing, and failure handling.

A manifest fully determines a run; repeating a run from the same manifest
produces bit-identical data files (the run log carries wall-clock timings
and is excluded from that contract).  All data files are written to a
temporary name and renamed into place.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from time import perf_counter

import numpy as np
import yaml

from .collision import ClassicalCollision, FastCollision
from .diagnostics import conserved_totals, entropies
from .errors import CheckpointError, ConfigError, NumericFailure
from .io_container import read_container, write_container
from .kernels import (VhsKernel, precompute_beta_classical,
                      precompute_beta_fast)
from .mesh import DistributionField
from .scenarios import ScenarioConfig, build_field, build_mesh, load_preset
from .stepping import StepConfig, step
from .transport import cfl_dt
from .velocity import moments

log = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"FBCKPT"
CHECKPOINT_VERSION = 1

_FLOAT_FMT = "%.17g"


@dataclass
class RunManifest:
    """Everything a run needs: the scenario configuration plus run-level
    policy (output directory, resume source, thread hint)."""

    config: ScenarioConfig
    out_dir: str = "out"
    resume: str | None = None
    threads: int | None = None

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "out_dir": self.out_dir,
                "resume": self.resume, "threads": self.threads}

    @classmethod
    def from_dict(cls, data: dict) -> "RunManifest":
        known = {"config", "out_dir", "resume", "threads"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown manifest keys: {sorted(unknown)}")
        if "config" not in data:
            raise ConfigError("manifest missing 'config' section")
        return cls(config=ScenarioConfig.from_dict(data["config"]),
                   out_dir=data.get("out_dir", "out"),
                   resume=data.get("resume"), threads=data.get("threads"))

    def physics_hash(self) -> str:
        """Hash of the physics-determining fields (excludes output policy)."""
        d = self.config.to_dict()
        for key in ("sample_every", "profile_count", "checkpoint_every"):
            d.pop(key, None)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass
class RunResult:
    exit_code: int
    steps: int
    final_time: float
    out_dir: str
    failed: bool = False
    message: str = ""


# ---------------------------------------------------------------------------
# configuration parsing


_FLAG_FIELDS = {
    "scenario": str, "epsilon": float, "nx": int, "ny": int, "nv": int,
    "dt": float, "t_final": float, "kernel": str, "mode": str,
    "m_angles": int, "dealias": str, "L": float, "R": float,
    "force_a": float, "lambda_scale": float, "cfl_max": float,
    "sample_every": int, "profile_count": int, "checkpoint_every": int,
    "wall_T_lo": float, "wall_T_hi": float,
}


def _load_yaml_mapping(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        data = yaml.safe_load(text)
        node = yaml.compose(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        loc = (f" at line {mark.line + 1}, column {mark.column + 1}"
               if mark else "")
        raise ConfigError(f"{path}: {exc.problem}{loc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    # record key locations for unknown-key reports
    locations = {}
    if node is not None:
        for key_node, _ in node.value:
            locations[key_node.value] = key_node.start_mark.line + 1
    data["__locations__"] = locations
    return data


def parse_config(config_path: str | None = None,
                 flags: dict | None = None) -> RunManifest:
    """Resolve a manifest from an optional YAML file plus flag overrides.

    Flag values override file keys.  Unknown keys are rejected with their
    file location; semantic violations name the offending field.
    """
    flags = {k: v for k, v in (flags or {}).items() if v is not None}
    file_data: dict = {}
    locations: dict = {}
    if config_path is not None:
        file_data = _load_yaml_mapping(config_path)
        locations = file_data.pop("__locations__", {})

    allowed = set(_FLAG_FIELDS) | {"out", "resume", "threads"}
    for key in file_data:
        if key not in allowed:
            where = (f"{config_path}:{locations[key]}"
                     if key in locations else config_path)
            raise ConfigError(f"unknown config key {key!r} ({where})")

    merged = dict(file_data)
    merged.update(flags)
    scenario = merged.pop("scenario", None)
    if scenario is None:
        raise ConfigError("scenario: required (flag --scenario or config key)")
    out_dir = merged.pop("out", "out")
    resume = merged.pop("resume", None)
    threads = merged.pop("threads", None)

    for key, value in merged.items():
        caster = _FLAG_FIELDS.get(key)
        if caster is None:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            merged[key] = caster(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: expected {caster.__name__}, "
                              f"got {value!r}") from exc

    cfg, _ = load_preset(scenario, **{k: v for k, v in merged.items()
                                      if k != "scenario"})
    return RunManifest(config=cfg, out_dir=str(out_dir), resume=resume,
                       threads=None if threads is None else int(threads))


def manifest_to_yaml(manifest: RunManifest) -> str:
    return yaml.safe_dump(manifest.to_dict(), sort_keys=True,
                          default_flow_style=False)


def manifest_from_yaml(text: str) -> RunManifest:
    data = yaml.safe_load(text)
    return RunManifest.from_dict(data)


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(path: str, field_: DistributionField,
                    manifest: RunManifest, step_index: int) -> None:
    meta = {
        "manifest_hash": manifest.physics_hash(),
        "time": field_.time,
        "step": step_index,
        "cells": list(field_.mesh.cells),
        "nv": field_.grid.n,
        "L": field_.grid.L,
    }
    write_container(path, CHECKPOINT_MAGIC, CHECKPOINT_VERSION, meta,
                    {"values": field_.values})


def load_checkpoint(path: str, manifest: RunManifest,
                    force: bool = False) -> tuple[np.ndarray, float, int]:
    """Read a checkpoint for this manifest; returns (values, time, step).

    Refuses manifest-hash mismatches unless force is set; shape mismatches
    are always refused (no resampling)."""
    meta, arrays = read_container(path, CHECKPOINT_MAGIC, CHECKPOINT_VERSION)
    want = manifest.physics_hash()
    have = meta.get("manifest_hash")
    if have != want and not force:
        raise CheckpointError(
            f"{path}: manifest hash mismatch\n  checkpoint: {have}\n"
            f"  current:    {want}\n(use force to override)")
    cfg = manifest.config
    expected = build_mesh(cfg).cells + cfg.velocity_grid().shape
    values = arrays["values"]
    if values.shape != expected:
        raise CheckpointError(
            f"{path}: state shape {values.shape} incompatible with configured "
            f"grids {expected}; resampling is not supported")
    return values, float(meta["time"]), int(meta["step"])


# ---------------------------------------------------------------------------
# output writers


def _atomic_write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


class _SeriesFile:
    """Accumulates rows, then writes the whole file atomically."""

    def __init__(self, path: str, columns: list[str], manifest_json: str):
        self.path = path
        self.header = (f"# manifest: {manifest_json}\n"
                       + "# " + " ".join(columns) + "\n")
        self.rows: list[str] = []

    def add(self, *values) -> None:
        self.rows.append(" ".join(_FLOAT_FMT % v for v in values))

    def flush(self) -> None:
        _atomic_write_text(self.path, self.header + "\n".join(self.rows)
                           + ("\n" if self.rows else ""))


def _write_profile(path: str, field_: DistributionField,
                   manifest_json: str) -> None:
    mesh, grid = field_.mesh, field_.grid
    m = moments(field_.values, grid)
    cols = (["x", "y"] if mesh.d_x == 2 else ["x"]) + \
        ["rho", "ux", "uy", "T", "p", "qx", "qy"]
    lines = [f"# manifest: {manifest_json}",
             f"# t = {_FLOAT_FMT % field_.time}",
             "# " + " ".join(cols)]
    if mesh.d_x == 1:
        x = mesh.centers(0)
        for i in range(mesh.cells[0]):
            row = [x[i], m.rho[i], m.u[i, 0], m.u[i, 1], m.T[i], m.p[i],
                   m.q[i, 0], m.q[i, 1]]
            lines.append(" ".join(_FLOAT_FMT % v for v in row))
    else:
        x, y = mesh.centers(0), mesh.centers(1)
        for i in range(mesh.cells[0]):
            for j in range(mesh.cells[1]):
                row = [x[i], y[j], m.rho[i, j], m.u[i, j, 0], m.u[i, j, 1],
                       m.T[i, j], m.p[i, j], m.q[i, j, 0], m.q[i, j, 1]]
                lines.append(" ".join(_FLOAT_FMT % v for v in row))
    _atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# the run loop


def build_collision(cfg: ScenarioConfig, grid, cache_dir: str | None = None):
    kernel = VhsKernel.maxwell_2d()
    if cfg.kernel == "classical":
        table = precompute_beta_classical(grid, kernel, cache_dir=cache_dir)
        return ClassicalCollision(table, grid, dealias=cfg.dealias)
    table = precompute_beta_fast(grid, kernel, m_angles=cfg.m_angles,
                                 cache_dir=cache_dir)
    return FastCollision(table, grid, dealias=cfg.dealias)


def _limit_threads(threads: int | None):
    if threads is None:
        return None
    try:
        from threadpoolctl import threadpool_limits
        return threadpool_limits(limits=threads)
    except ImportError:
        log.warning("--threads requested but threadpoolctl is unavailable; "
                    "thread count left to the BLAS/FFT defaults")
        return None


def run(manifest: RunManifest) -> RunResult:
    """Execute a run end to end, emitting the entropy series, the
    conservation audit, moment profiles, checkpoints, and a timing log."""
    cfg = manifest.config
    out = manifest.out_dir
    os.makedirs(out, exist_ok=True)
    manifest_json = json.dumps(manifest.to_dict(), sort_keys=True,
                               separators=(",", ":"))
    _atomic_write_text(os.path.join(out, "manifest.yaml"),
                       manifest_to_yaml(manifest))

    grid = cfg.velocity_grid()
    field_ = build_field(cfg)
    start_step = 0
    if manifest.resume:
        values, t0, start_step = load_checkpoint(manifest.resume, manifest)
        field_ = DistributionField(field_.mesh, grid, values, t0)
        log.info("resumed from %s at t = %g (step %d)", manifest.resume, t0,
                 start_step)

    dt = cfg.resolved_dt()
    bound = cfl_dt(grid, field_.mesh, cfg.cfl_max)
    if dt > bound * (1 + 1e-12):
        raise ConfigError(
            f"dt: configured {dt} exceeds the CFL bound {bound:.6g}")

    total_steps = max(1, int(round((cfg.t_final - field_.time) / dt)))
    ckpt_every = cfg.checkpoint_every or max(1, total_steps // 10)
    profile_every = max(1, total_steps // max(1, cfg.profile_count))

    step_cfg = StepConfig(dt=dt, epsilon=cfg.epsilon, mode=cfg.mode,
                          lambda_scale=cfg.lambda_scale, cfl_max=cfg.cfl_max,
                          force_a=cfg.force_a)
    collision = build_collision(cfg, grid)

    entropy_file = _SeriesFile(os.path.join(out, "entropy.dat"),
                               ["t", "Hg", "Hl", "Hh"], manifest_json)
    audit_file = _SeriesFile(os.path.join(out, "audit.dat"),
                             ["t", "mass", "momx", "momy", "energy"],
                             manifest_json)
    timers = {"collision": 0.0, "transport": 0.0, "boundary": 0.0,
              "diagnostics": 0.0}

    def sample(step_index: int):
        t0 = perf_counter()
        mass, mom, energy = conserved_totals(field_)
        if not (np.isfinite(mass) and np.all(np.isfinite(mom))
                and np.isfinite(energy)):
            raise NumericFailure(
                f"non-finite state at step {step_index}, t = {field_.time}")
        tr = entropies(field_)
        entropy_file.add(field_.time, tr.Hg, tr.Hl, tr.Hh)
        audit_file.add(field_.time, mass, mom[0], mom[1], energy)
        timers["diagnostics"] += perf_counter() - t0

    ckpt_path = os.path.join(out, "checkpoint.bin")
    limiter = _limit_threads(manifest.threads)
    loop_start = perf_counter()
    last_good_step = start_step
    nonlocal_failed = False
    message = ""
    try:
        sample(start_step)
        for k in range(start_step, start_step + total_steps):
            field_ = step(field_, step_cfg, collision, timers)
            index = k + 1
            if index % cfg.sample_every == 0 or index == start_step + total_steps:
                sample(index)
            if index % profile_every == 0 or index == start_step + total_steps:
                t0 = perf_counter()
                _write_profile(os.path.join(out, f"profile_{index:06d}.dat"),
                               field_, manifest_json)
                timers["diagnostics"] += perf_counter() - t0
            if index % ckpt_every == 0 or index == start_step + total_steps:
                save_checkpoint(ckpt_path, field_, manifest, index)
                last_good_step = index
    except NumericFailure as exc:
        nonlocal_failed = True
        message = (f"{exc}; last good checkpoint at step {last_good_step} "
                   f"({ckpt_path})")
        log.error("%s", message)
    finally:
        wall = perf_counter() - loop_start
        entropy_file.flush()
        audit_file.flush()
        if limiter is not None:
            limiter.unregister()
        _write_run_log(os.path.join(out, "run.log"), manifest_json, timers,
                       wall, nonlocal_failed, message)

    final_step = last_good_step if nonlocal_failed else start_step + total_steps
    return RunResult(exit_code=3 if nonlocal_failed else 0,
                     steps=final_step, final_time=field_.time,
                     out_dir=out, failed=nonlocal_failed, message=message)


def _write_run_log(path: str, manifest_json: str, timers: dict, wall: float,
                   failed: bool, message: str) -> None:
    phases = ["collision", "transport", "boundary", "diagnostics"]
    accounted = sum(timers.get(p, 0.0) for p in phases)
    lines = [f"manifest: {manifest_json}", f"status: "
             + ("numeric-failure" if failed else "completed")]
    if message:
        lines.append(f"detail: {message}")
    for p in phases:
        lines.append(f"time.{p}: {timers.get(p, 0.0):.6f}")
    lines.append(f"time.accounted: {accounted:.6f}")
    lines.append(f"time.loop_wall: {wall:.6f}")
    _atomic_write_text(path, "\n".join(lines) + "\n")
