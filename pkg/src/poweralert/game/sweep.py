"""Grid sweeps over attacker period and verifier mean inter-arrival time."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from ..exceptions import InvalidInputError
from .model import GameConfig, GameMetrics, compute_metrics, simulate_batch, simulate_run

FIELDS = ("T0_s", "T1_s", "lambda0", "lambda1", "p_detect", "frac_inactive", "hit_ratio", "runs", "horizon_s")
METHODS = ("event", "exact")


def paper_grid() -> tuple[np.ndarray, np.ndarray]:
    """T1 from 30 s to 300 s step 10 s (28 values); T0 from 60 s to 180 s step 15 s (9 values)."""
    return np.arange(30.0, 301.0, 10.0), np.arange(60.0, 181.0, 15.0)


@dataclass(frozen=True)
class SweepRow:
    T0_s: float
    T1_s: float
    lambda0: float
    lambda1: float
    p_detect: float
    frac_inactive: float
    hit_ratio: float
    runs: int
    horizon_s: float
    # spread used by the trend checks; not written to the table files
    frac_inactive_std: float = 0.0
    actions: int = 0

    def record(self) -> dict:
        return {k: getattr(self, k) for k in FIELDS}


def run_cell(cfg: GameConfig, rng, method: str = "event") -> GameMetrics:
    if method == "event":
        return compute_metrics([simulate_run(cfg, rng) for _ in range(cfg.runs)], cfg.horizon)
    if method == "exact":
        return simulate_batch(cfg, rng=rng).metrics()
    raise InvalidInputError(f"unknown method {method!r}; expected one of {METHODS}")


def sweep(T1_values: Iterable[float], T0_values: Iterable[float], template: Optional[GameConfig] = None, *,
          runs: Optional[int] = None, seed: Optional[int] = None, method: str = "event",
          hide_fraction: float = 0.5) -> list[SweepRow]:
    """One row per (T1, T0) cell, T1-major. Cell seeds are spawned from the master seed in row order,
    so the table is a pure function of the arguments. ``T0 = inf`` means a silent verifier and
    each cell hides for ``hide_fraction * T1``."""
    T1_values = [float(v) for v in T1_values]
    T0_values = [float(v) for v in T0_values]
    if not T1_values or not T0_values:
        raise InvalidInputError("sweep grid is empty")
    if any(not v > 0 for v in T0_values):
        raise InvalidInputError("T0 values must be positive (inf for no verifier)")
    template = template or GameConfig(lambda0=0.0, T1=1.0)
    runs = template.runs if runs is None else runs
    seed = template.seed if seed is None else seed
    children = np.random.SeedSequence(seed).spawn(len(T1_values) * len(T0_values))
    rows = []
    k = 0
    for T1 in T1_values:
        for T0 in T0_values:
            lam0 = 0.0 if math.isinf(T0) else 1.0 / T0
            cfg = replace(template, lambda0=lam0, T1=T1, alpha1=hide_fraction * T1, runs=runs)
            m = run_cell(cfg, np.random.default_rng(children[k]), method)
            k += 1
            rows.append(SweepRow(T0, T1, lam0, 1.0 / T1, m.p_detect, m.frac_inactive, m.hit_ratio, m.runs,
                                 cfg.horizon, m.frac_inactive_std, m.actions))
    return rows


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else str(v) for v in r.record().values()])
    return buf.getvalue()


def rows_to_json(rows: Sequence[SweepRow]) -> str:
    # json emits shortest round-trip floats; inf becomes the Infinity literal
    return json.dumps([r.record() for r in rows], indent=1) + "\n"


def rows_from_csv(text: str) -> list[SweepRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != FIELDS:
        raise InvalidInputError(f"unexpected header {reader.fieldnames}")
    return [SweepRow(**{k: (int(v) if k == "runs" else float(v)) for k, v in rec.items()}) for rec in reader]


def as_matrix(rows: Sequence[SweepRow], field: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(T1 values, T0 values, M)`` with ``M[i, j]`` the field at ``T0[i]``, ``T1[j]``."""
    T1 = np.unique([r.T1_s for r in rows])
    T0 = np.unique([r.T0_s for r in rows])
    M = np.full((T0.size, T1.size), np.nan)
    for r in rows:
        M[np.searchsorted(T0, r.T0_s), np.searchsorted(T1, r.T1_s)] = getattr(r, field)
    return T1, T0, M


def table_summary(rows: Sequence[SweepRow]) -> dict:
    return {"cells": len(rows), **{f: [min(getattr(r, f) for r in rows), max(getattr(r, f) for r in rows)]
                                   for f in ("p_detect", "frac_inactive", "hit_ratio")}}


__all__ = ["FIELDS", "METHODS", "SweepRow", "paper_grid", "run_cell", "sweep", "rows_to_csv", "rows_to_json",
           "rows_from_csv", "as_matrix", "table_summary"]
