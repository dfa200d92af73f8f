"""Experiment configuration: one JSON document per experiment.

Example::

    {
      "model": {"preset": "two-walk-k2", "beta": 4.0},
      "seeds": [0, 1, 2],
      "n_steps": 200000,
      "record_stride": 1000,
      "ode": {"dt": 0.005, "t_end": 30.0, "x0": null, "seed": 0},
      "solver": {"n_starts": 100, "seed": 0, "tol": 1e-13, "dedup_tol": 1e-6},
      "beta_grid": [0.5, 1.0, 2.5],
      "out_dir": "results"
    }

Model presets: ``two-walk-k2`` and ``three-walk-z`` (need ``beta``),
``equal-beta`` (needs ``m``, ``d``, ``beta``) and ``explicit`` (needs ``m``,
``d`` and a full ``alpha`` tensor indexed ``[v][i][j]``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ReinforceError
from .model import InteractionModel, as_point, make_model, repelling

PRESETS = ("two-walk-k2", "three-walk-z", "equal-beta", "explicit")
_PRESET_DIMS = {"two-walk-k2": (2, 2), "three-walk-z": (3, 2)}


@dataclass(frozen=True)
class ModelSpec:
    preset: str
    beta: float | None = None
    m: int | None = None
    d: int | None = None
    alpha: tuple | None = None
    allow_asymmetric: bool = False

    @property
    def dims(self) -> tuple[int, int]:
        return _PRESET_DIMS.get(self.preset, (self.m, self.d))

    def build(self, beta: float | None = None) -> InteractionModel:
        """Instantiate the model, optionally overriding ``beta`` (phase scans)."""
        if self.preset == "explicit":
            return make_model(self.m, self.d, np.asarray(self.alpha, dtype=float),
                              allow_asymmetric=self.allow_asymmetric)
        beta = self.beta if beta is None else beta
        if beta is None:
            raise ConfigError("model.beta: required for this command")
        return repelling(*self.dims, beta)


@dataclass(frozen=True)
class OdeParams:
    dt: float = 0.005
    t_end: float = 30.0
    record_every: int = 20
    x0: tuple | None = None
    seed: int = 0


@dataclass(frozen=True)
class SolverParams:
    n_starts: int = 100
    seed: int = 0
    tol: float = 1e-13
    dedup_tol: float = 1e-6
    max_iter: int = 2_000


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    seeds: tuple = (0,)
    n_steps: int = 200_000
    record_stride: int = 1_000
    ode: OdeParams = field(default_factory=OdeParams)
    solver: SolverParams = field(default_factory=SolverParams)
    beta_grid: tuple | None = None
    out_dir: str = "results"


def _require(cond: bool, name: str, msg: str):
    if not cond:
        raise ConfigError(f"{name}: {msg}")


def _number(raw: dict, key: str, prefix: str, default, kind=float):
    name = f"{prefix}{key}"
    value = raw.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if kind is int:
        _require(float(value).is_integer(), name, f"expected an integer, got {value!r}")
        return int(value)
    _require(math.isfinite(value), name, "must be finite")
    return float(value)


def _check_keys(raw: dict, allowed: set, prefix: str):
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"{prefix}{sorted(unknown)[0]}: unknown field")


def _parse_model(raw) -> ModelSpec:
    _require(isinstance(raw, dict), "model", "expected an object")
    _check_keys(raw, {"preset", "beta", "m", "d", "alpha", "allow_asymmetric"}, "model.")
    has_alpha = "alpha" in raw
    preset = raw.get("preset", "explicit" if has_alpha else None)
    _require(preset is not None, "model", "give either a preset name or an explicit alpha tensor")
    _require(preset in PRESETS, "model.preset", f"unknown preset {preset!r}; choose from {PRESETS}")
    if preset != "explicit":
        _require(not has_alpha, "model.alpha", f"not allowed together with preset {preset!r}")
    beta = _number(raw, "beta", "model.", None)
    if beta is not None:
        _require(beta >= 0, "model.beta", "must be >= 0")
    m = _number(raw, "m", "model.", None, int)
    d = _number(raw, "d", "model.", None, int)
    if preset in _PRESET_DIMS:
        _require(m is None and d is None, "model.m", f"dimensions are fixed by preset {preset!r}")
    else:
        _require(m is not None and m >= 1, "model.m", "required, integer >= 1")
        _require(d is not None and d >= 2, "model.d", "required, integer >= 2")
    alpha = None
    allow = bool(raw.get("allow_asymmetric", False))
    if preset == "explicit":
        _require(has_alpha, "model.alpha", "required for the explicit preset")
        _require(beta is None, "model.beta", "not used by the explicit preset")
        try:
            arr = np.asarray(raw["alpha"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model.alpha: {exc}") from exc
        _require(arr.shape == (d, m, m), "model.alpha", f"expected shape (d, m, m) = {(d, m, m)}, got {arr.shape}")
        _require(bool(np.all(np.isfinite(arr))), "model.alpha", "entries must be finite")
        alpha = tuple(tuple(tuple(row) for row in block) for block in arr.tolist())
    spec = ModelSpec(preset, beta, m, d, alpha, allow)
    if preset == "explicit":
        try:
            spec.build()
        except ReinforceError as exc:
            raise ConfigError(f"model.alpha: {exc}") from exc
    return spec


def _parse_ode(raw, model: ModelSpec) -> OdeParams:
    raw = raw or {}
    _require(isinstance(raw, dict), "ode", "expected an object")
    _check_keys(raw, {"dt", "t_end", "record_every", "x0", "seed"}, "ode.")
    base = OdeParams()
    dt = _number(raw, "dt", "ode.", base.dt)
    t_end = _number(raw, "t_end", "ode.", base.t_end)
    every = _number(raw, "record_every", "ode.", base.record_every, int)
    seed = _number(raw, "seed", "ode.", base.seed, int)
    _require(dt > 0, "ode.dt", "must be positive")
    _require(dt <= 0.01, "ode.dt", "must be <= 0.01")
    _require(t_end >= dt, "ode.t_end", "must be >= ode.dt")
    _require(every >= 1, "ode.record_every", "must be >= 1")
    _require(seed >= 0, "ode.seed", "must be >= 0")
    x0 = raw.get("x0")
    if x0 is not None:
        m, d = model.dims
        try:
            point = np.asarray(x0, dtype=float)
            _require(point.size == m * d, "ode.x0", f"expected {m * d} entries")
            point = as_point(point.reshape(m, d))
        except ConfigError:
            raise
        except (ValueError, ReinforceError) as exc:
            raise ConfigError(f"ode.x0: {exc}") from exc
        x0 = tuple(map(tuple, point.tolist()))
    return OdeParams(dt, t_end, every, x0, seed)


def _parse_solver(raw) -> SolverParams:
    raw = raw or {}
    _require(isinstance(raw, dict), "solver", "expected an object")
    _check_keys(raw, {"n_starts", "seed", "tol", "dedup_tol", "max_iter"}, "solver.")
    base = SolverParams()
    out = SolverParams(
        n_starts=_number(raw, "n_starts", "solver.", base.n_starts, int),
        seed=_number(raw, "seed", "solver.", base.seed, int),
        tol=_number(raw, "tol", "solver.", base.tol),
        dedup_tol=_number(raw, "dedup_tol", "solver.", base.dedup_tol),
        max_iter=_number(raw, "max_iter", "solver.", base.max_iter, int),
    )
    _require(out.n_starts >= 1, "solver.n_starts", "must be >= 1")
    _require(out.seed >= 0, "solver.seed", "must be >= 0")
    _require(out.tol >= 1e-14, "solver.tol", "must be >= 1e-14")
    _require(out.dedup_tol > 0, "solver.dedup_tol", "must be positive")
    _require(out.max_iter >= 1, "solver.max_iter", "must be >= 1")
    return out


def parse_config(raw) -> ExperimentConfig:
    """Validate a decoded JSON document. Every error names the offending field."""
    _require(isinstance(raw, dict), "<root>", "expected a JSON object")
    _check_keys(raw, {"model", "seeds", "n_steps", "record_stride", "ode", "solver", "beta_grid", "out_dir"}, "")
    _require("model" in raw, "model", "required")
    model = _parse_model(raw["model"])

    seeds = raw.get("seeds", [0])
    _require(isinstance(seeds, list) and len(seeds) > 0, "seeds", "expected a non-empty list of integers")
    for s in seeds:
        _require(isinstance(s, int) and not isinstance(s, bool) and s >= 0, "seeds",
                 f"expected non-negative integers, got {s!r}")
    _require(len(set(seeds)) == len(seeds), "seeds", "duplicate seed")
    n_steps = _number(raw, "n_steps", "", 200_000, int)
    _require(n_steps >= 1, "n_steps", "must be >= 1")
    stride = _number(raw, "record_stride", "", 1_000, int)
    _require(stride >= 1, "record_stride", "must be >= 1")

    grid = raw.get("beta_grid")
    if grid is not None:
        _require(isinstance(grid, list) and len(grid) > 0, "beta_grid", "expected a non-empty list of numbers")
        for b in grid:
            _require(isinstance(b, (int, float)) and not isinstance(b, bool) and math.isfinite(b) and b >= 0,
                     "beta_grid", f"entries must be finite numbers >= 0, got {b!r}")
        grid = tuple(float(b) for b in grid)

    out_dir = raw.get("out_dir", "results")
    _require(isinstance(out_dir, str) and out_dir != "", "out_dir", "expected a non-empty string")
    return ExperimentConfig(
        model=model,
        seeds=tuple(seeds),
        n_steps=n_steps,
        record_stride=stride,
        ode=_parse_ode(raw.get("ode"), model),
        solver=_parse_solver(raw.get("solver")),
        beta_grid=grid,
        out_dir=out_dir,
    )


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"<file>: cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<file>: invalid JSON: {exc}") from exc
    return parse_config(raw)
