"""Replicated simulation grids and the tables they produce.

A spec names a model, filter settings, a grid of values to sweep and a
replicate count.  Replicate ``k`` draws its graphs from
``default_rng([rng_seed, 0, k])`` in every cell, so cells differing only in
filter settings see the same graph pairs.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .faq import FaqConfig
from .filter import FilterConfig, MatchResult, front_seeds, objective_gap_profile, run_filter
from .graph import Injection, correct_matches, read_edgelist
from .models import (
    RdpgParams,
    adversarial_naive_lambda,
    homogeneous_params,
    planted_partition_params,
    sample_corr_er,
    sample_rdpg_pair,
    shuffle_nonseeds,
)
from .padding import parse_scheme

__all__ = [
    "ConfigError",
    "ExperimentSpec",
    "CellResult",
    "PRESETS",
    "SCHEMA_VERSION",
    "read_seeds",
    "read_truth",
    "run_experiment",
    "sample_instance",
    "smooth_by_rank",
    "write_experiment",
]

SCHEMA_VERSION = "1"
MODEL_KINDS = ("homogeneous", "planted", "rdpg", "adversarial", "files")
FILTER_KEYS = ("M", "s", "scheme", "rescheme", "max_iters", "tol", "stop_on_repeat")
_MODEL_KEYS = {
    "homogeneous": ("n", "n_c", "lam", "rho"),
    "planted": ("n", "n_c", "p", "q", "rho"),
    "rdpg": ("n", "n_c", "rho", "core"),
    "adversarial": ("n", "n_c", "beta", "rho", "eps"),
    "files": ("A", "B"),
}
_SCALED = ("n", "n_c", "s", "M")


class ConfigError(ValueError):
    pass


PRESETS = {
    "homogeneous": {
        "model": {"kind": "homogeneous", "n": 200, "n_c": 25, "lam": 0.5, "rho": 0.9},
        "filter": {"M": 50, "s": 15, "scheme": "centered"},
        "grid": {"rho": [0.7, 0.8, 0.9, 1.0], "s": [0, 7, 15]},
        "replicates": 20,
    },
    "planted": {
        "model": {"kind": "planted", "n": 200, "n_c": 25, "p": 0.25, "q": 0.5, "rho": 0.9},
        "filter": {"M": 50, "s": 7, "scheme": "centered"},
        "grid": {"q": [0.25, 0.3, 0.35, 0.4, 0.45, 0.5]},
        "replicates": 20,
    },
    "rdpg": {
        "model": {"kind": "rdpg", "n": 200, "n_c": 25, "rho": 0.9, "core": "random"},
        "filter": {"M": 50, "s": 7, "scheme": "centered"},
        "grid": {"core": ["random", "max-angle"], "scheme": ["naive", "centered", "rank:1", "rank:2"]},
        "replicates": 20,
    },
}


@dataclass
class ExperimentSpec:
    model: dict
    filter: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    replicates: int = 20
    rng_seed: int = 0
    scale: float = 1.0
    output: str | None = None
    smoothing: float | None = None

    def __post_init__(self):
        kind = self.model.get("kind")
        if kind not in MODEL_KINDS:
            raise ConfigError(f"model kind must be one of {MODEL_KINDS}, got {kind!r}")
        if int(self.replicates) < 1:
            raise ConfigError("replicates must be at least 1")
        if not self.scale > 0:
            raise ConfigError("scale must be positive")
        if self.smoothing is not None and not self.smoothing > 0:
            raise ConfigError("smoothing bandwidth must be positive")
        for key in self.filter:
            if key not in FILTER_KEYS:
                raise ConfigError(f"unknown filter setting {key!r}")
        for key, vals in self.grid.items():
            if key not in FILTER_KEYS and key not in _MODEL_KEYS[kind]:
                raise ConfigError(f"grid key {key!r} is not a parameter of the {kind} model or the filter")
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"grid values for {key!r} must be a non-empty list")
        missing = [k for k in _MODEL_KEYS[kind] if k not in self.model and k not in self.grid]
        if missing:
            raise ConfigError(f"{kind} model is missing {missing}")
        if kind == "files":
            for key in ("A", "B", "truth", "seeds"):
                if key in self.model and not Path(self.model[key]).exists():
                    raise ConfigError(f"model file {self.model[key]!r} does not exist")
        self.cells()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = {"model", "filter", "grid", "replicates", "rng_seed", "scale", "output", "smoothing"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown spec keys {sorted(extra)}")
        if "model" not in d:
            raise ConfigError("spec needs a model block")
        return cls(**json.loads(json.dumps(d)))

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def _scaled(self, key, val):
        if key not in _SCALED or self.model["kind"] == "files":
            return val
        lo = 0 if key == "s" else 1
        return max(lo, int(round(val * self.scale)))

    def cells(self) -> list[tuple[dict, dict, dict]]:
        """``(label, model, filter)`` per grid point, in grid order."""
        keys = list(self.grid)
        out = []
        for combo in itertools.product(*(self.grid[k] for k in keys)):
            label = dict(zip(keys, combo))
            model = dict(self.model)
            filt = {"M": 50, "s": 0, "scheme": "centered"}
            filt.update(self.filter)
            for k, v in label.items():
                (filt if k in FILTER_KEYS else model)[k] = v
            model = {k: self._scaled(k, v) for k, v in model.items()}
            filt = {k: self._scaled(k, v) for k, v in filt.items()}
            if model["kind"] == "files":
                filt["s"] = len(read_seeds(model["seeds"])) if model.get("seeds") else 0
            elif not 0 <= filt["s"] <= model["n_c"] <= model["n"]:
                raise ConfigError(f"cell {label}: need 0 <= s <= n_c <= n")
            try:
                _filter_config(filt, 0)
            except ValueError as exc:
                raise ConfigError(f"cell {label}: {exc}") from None
            out.append((label, model, filt))
        return out

    @property
    def n_replicates(self) -> int:
        return max(1, int(round(self.replicates * self.scale)))


def _filter_config(filt: dict, seed: int, workers: int = 1) -> FilterConfig:
    faq = FaqConfig(
        max_iters=int(filt.get("max_iters", 100)),
        tol=float(filt.get("tol", 1e-6)),
        stop_on_repeat=bool(filt.get("stop_on_repeat", True)),
    )
    scheme2 = filt.get("rescheme")
    return FilterConfig(
        M=int(filt["M"]),
        s=int(filt["s"]),
        scheme1=parse_scheme(str(filt["scheme"])),
        scheme2=parse_scheme(str(scheme2)) if scheme2 else None,
        rng_seed=seed,
        faq=faq,
        workers=workers,
    )


def read_seeds(path) -> np.ndarray:
    """Seed pairs ``template_vertex network_vertex``, one per line, 0-based; ``#`` starts a comment."""
    pairs = []
    for k, ln in enumerate(Path(path).read_text().splitlines(), start=1):
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: line {k}: expected 'u v', got {ln!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def read_truth(path, n: int) -> Injection:
    """The ``truth`` list of a sidecar JSON written by the ``sample`` command."""
    data = json.loads(Path(path).read_text())
    if "truth" not in data:
        raise ValueError(f"{path}: no 'truth' entry")
    return Injection(data["truth"], n)


def _load_files_model(model: dict):
    """Read a file model, moving seeds to the front; ``truth`` is expressed in the new labels."""
    A = read_edgelist(model["A"])
    B = read_edgelist(model["B"])
    truth = read_truth(model["truth"], B.n) if model.get("truth") else None
    if model.get("seeds"):
        A, B, a_order, b_order = front_seeds(A, B, read_seeds(model["seeds"]))
        if truth is not None:
            truth = Injection(np.argsort(b_order)[truth.map[a_order]], B.n)
    return A, B, truth


def sample_instance(model: dict, s: int, rng: np.random.Generator):
    """Draw ``(A, B, truth)`` for a model block.

    Synthetic network labels beyond the seeds are shuffled so the truth is not
    the identity.  File models are returned as read.
    """
    kind = model["kind"]
    n, n_c = model.get("n"), model.get("n_c")
    if kind == "files":
        return _load_files_model(model)
    if kind == "rdpg":
        A, B, truth, _ = sample_rdpg_pair(RdpgParams(n, n_c, float(model["rho"]), model["core"]), rng)
    else:
        if kind == "homogeneous":
            params = homogeneous_params(n, n_c, float(model["lam"]), float(model["rho"]))
        elif kind == "planted":
            params = planted_partition_params(n, n_c, float(model["p"]), float(model["q"]), float(model["rho"]))
        else:
            params = adversarial_naive_lambda(n, n_c, float(model["beta"]), float(model["rho"]), float(model["eps"]))
        A, B = sample_corr_er(params, rng)
        truth = Injection.identity(n_c, n)
    B, truth = shuffle_nonseeds(B, truth, s, rng)
    return A, B, truth


@dataclass
class CellResult:
    """All replicates of one grid cell; ``correct[k, j]`` is the accuracy of rank ``j`` in replicate ``k``."""

    label: dict
    objectives: np.ndarray
    correct: np.ndarray | None
    gaps: list
    seconds: np.ndarray

    def accuracy_by_rank(self) -> np.ndarray:
        return self.correct.mean(axis=0)

    def pooled_gap(self) -> list[tuple[int, float, int]]:
        """Gap rows pooled over replicates: ``(correct, mean objective, restarts)``."""
        sums: dict[int, list[float]] = {}
        for rows in self.gaps:
            for r in rows:
                acc = sums.setdefault(r.correct, [0.0, 0])
                acc[0] += r.mean_objective * r.count
                acc[1] += r.count
        return [(k, v[0] / v[1], v[1]) for k, v in sorted(sums.items())]


def _replicate(model, filt, k, rng_seed, workers) -> tuple[list[MatchResult], Injection | None]:
    rng = np.random.default_rng([rng_seed, 0, k])
    A, B, truth = sample_instance(model, int(filt["s"]), rng)
    fseed = int(np.random.default_rng([rng_seed, 1, k]).integers(2**32))
    return run_filter(A, B, _filter_config(filt, fseed, workers)), truth


def run_experiment(spec: ExperimentSpec, workers: int = 1, progress=None) -> list[CellResult]:
    out = []
    for label, model, filt in spec.cells():
        objs, corr, gaps, secs = [], [], [], []
        for k in range(spec.n_replicates):
            results, truth = _replicate(model, filt, k, spec.rng_seed, workers)
            objs.append([m.objective for m in results])
            secs.extend(m.seconds for m in results)
            if truth is not None:
                corr.append([correct_matches(m.injection, truth) if m.injection is not None else -1 for m in results])
                gaps.append(objective_gap_profile(results, truth))
            if progress is not None:
                progress(label, k)
        out.append(
            CellResult(
                label,
                np.array(objs),
                np.array(corr) if corr else None,
                gaps,
                np.array(secs),
            )
        )
    return out


def smooth_by_rank(values, bandwidth: float) -> np.ndarray:
    """Gaussian kernel smoothing over normalised ranks ``0..1``."""
    y = np.asarray(values, dtype=float)
    x = np.linspace(0.0, 1.0, len(y)) if len(y) > 1 else np.zeros(1)
    w = np.exp(-0.5 * ((x[:, None] - x[None, :]) / bandwidth) ** 2)
    return (w @ y) / w.sum(axis=1)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_experiment(spec: ExperimentSpec, cells: list[CellResult], outdir) -> dict:
    """Write the experiment tables; returns the summary that goes to ``summary.json``.

    ``runtime.csv`` and ``summary.json`` carry wall-clock figures; every other
    file is a deterministic function of the spec.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    keys = list(spec.grid)

    acc_rows, gap_rows, rep_rows, time_rows = [], [], [], []
    for c in cells:
        lab = [c.label[k] for k in keys]
        if c.correct is not None:
            acc = c.accuracy_by_rank()
            smooth = smooth_by_rank(acc, spec.smoothing) if spec.smoothing else None
            for j, a in enumerate(acc):
                acc_rows.append(lab + [j + 1, float(a)] + ([float(smooth[j])] if smooth is not None else []))
            n_rep = len(c.gaps)
            for corr, mean, count in c.pooled_gap():
                gap_rows.append(lab + [corr, mean, count, count / n_rep])
        for k in range(len(c.objectives)):
            rank1 = c.correct[k, 0] if c.correct is not None else ""
            rep_rows.append(lab + [k, float(c.objectives[k, 0]), rank1])
        time_rows.append(lab + [float(c.seconds.mean()), float(c.seconds.std(ddof=1)) if len(c.seconds) > 1 else 0.0, len(c.seconds)])

    files = {}
    if acc_rows:
        cols = keys + ["rank", "mean_correct"] + (["smoothed_correct"] if spec.smoothing else [])
        _write_csv(outdir / "accuracy_by_rank.csv", cols, acc_rows)
        _write_csv(outdir / "objective_gap.csv", keys + ["correct", "mean_objective", "restarts", "restarts_per_replicate"], gap_rows)
        files["accuracy"] = "accuracy_by_rank.csv"
        files["objective_gap"] = "objective_gap.csv"
    _write_csv(outdir / "replicates.csv", keys + ["replicate", "best_objective", "rank1_correct"], rep_rows)
    _write_csv(outdir / "runtime.csv", keys + ["mean_seconds", "sd_seconds", "restarts"], time_rows)
    files["replicates"] = "replicates.csv"
    files["runtime"] = "runtime.csv"
    summary = {
        "schema_version": SCHEMA_VERSION,
        "spec": asdict(spec),
        "replicates": spec.n_replicates,
        "cells": len(cells),
        "files": files,
        "total_seconds": float(sum(c.seconds.sum() for c in cells)),
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
