"""Consistency probe: periodic attacker versus jittered-periodic attackers at equal rate."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..exceptions import InvalidInputError
from .model import AttackerSchedule, GameConfig, simulate_run, wilson_interval


@dataclass(frozen=True)
class JitteredSchedule:
    """Hide windows ``[e_m, e_m + hide)`` at renewal epochs ``e_m`` (sorted, first one < 0)."""

    epochs: np.ndarray
    hide: float

    @classmethod
    def draw(cls, period: float, hide: float, jitter: float, horizon: float, rng) -> "JitteredSchedule":
        """Gaps are ``period * U[1 - jitter, 1 + jitter]``; the first epoch is uniform in ``[-period, 0)``."""
        if not 0 <= jitter < 1:
            raise InvalidInputError(f"jitter must lie in [0, 1), got {jitter}")
        if hide > period * (1 - jitter):
            raise InvalidInputError("hide windows would overlap at this jitter")
        start = float(rng.uniform(0.0, period)) - period
        n = int(np.ceil((horizon - start) / (period * (1 - jitter)))) + 2
        gaps = period * (1.0 + jitter * (2.0 * rng.random(n) - 1.0)) if jitter else np.full(n, period)
        epochs = start + np.concatenate([[0.0], np.cumsum(gaps)])
        return cls(epochs, hide)

    def _index(self, t):
        return np.searchsorted(self.epochs, t, side="right") - 1

    def hidden(self, t):
        t = np.asarray(t, dtype=float)
        return t - self.epochs[self._index(t)] < self.hide

    def fully_hidden(self, t, duration):
        t = np.asarray(t, dtype=float)
        return t - self.epochs[self._index(t)] + duration <= self.hide

    def hidden_time(self, t):
        lo = np.maximum(self.epochs, 0.0)
        hi = np.minimum(self.epochs + self.hide, t)
        return float(np.clip(hi - lo, 0.0, None).sum())


@dataclass(frozen=True)
class StrategyResult:
    strategy: str
    jitter: float
    detections: int
    runs: int
    p_detect: float
    ci: tuple[float, float]


@dataclass(frozen=True)
class ProbeReport:
    results: tuple[StrategyResult, ...]
    consistent: bool  # periodic never significantly worse (higher p_detect) than any jittered play

    def lines(self) -> list[str]:
        return [f"{r.strategy:<10} jitter={r.jitter:<5g} p_detect={r.p_detect:.4f} "
                f"CI95=[{r.ci[0]:.4f}, {r.ci[1]:.4f}] runs={r.runs}" for r in self.results]


def best_response_probe(cfg: GameConfig, jitters: Sequence[float] = (0.2,), *, z: float = 1.96) -> ProbeReport:
    """Compare the periodic attacker with jittered renewals of the same mean period.

    Every strategy sees the same verifier draws run by run (common random numbers), so
    ``jitter = 0`` reproduces the periodic row and differences are paired.
    """
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.runs)
    strategies = [("periodic", None)] + [("jittered", float(j)) for j in jitters]
    outcomes = np.zeros((len(strategies), cfg.runs), dtype=bool)
    for k, ss in enumerate(seeds):
        att_seed, ver_seed = ss.spawn(2)
        for s, (_, jitter) in enumerate(strategies):
            att = np.random.default_rng(att_seed)
            if jitter is None:
                schedule = AttackerSchedule(float(att.uniform(0.0, cfg.T1)), cfg.T1, cfg.alpha1)
            else:
                schedule = JitteredSchedule.draw(cfg.T1, cfg.alpha1, jitter, cfg.horizon, att)
            outcomes[s, k] = simulate_run(cfg, np.random.default_rng(ver_seed), schedule).detected
    results = []
    for (name, jitter), row in zip(strategies, outcomes):
        d = int(row.sum())
        results.append(StrategyResult(name, 0.0 if jitter is None else jitter, d, cfg.runs, d / cfg.runs,
                                      wilson_interval(d, cfg.runs, z)))
    consistent = True
    for row in outcomes[1:]:
        diff = outcomes[0].astype(float) - row
        se = diff.std(ddof=1) / np.sqrt(cfg.runs) if cfg.runs > 1 else 0.0
        if diff.mean() > z * se and diff.mean() > 0:
            consistent = False
    return ProbeReport(tuple(results), consistent)


def probe_config(T1: float = 120.0, T0: float = 90.0, runs: int = 2000, seed: int = 0, **kw) -> GameConfig:
    return replace(GameConfig(1.0 / T0, T1, runs=runs, seed=seed), **kw)
