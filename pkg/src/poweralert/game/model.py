"""Attacker/verifier game: configuration, attacker schedule, event-driven runs and metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .._validation import as_generator, check_probability
from ..exceptions import InvalidInputError

TEN_DAYS = 10 * 24 * 3600.0
DEFAULT_ALPHA0 = 903e-6
DEFAULT_P_E = 0.99998
_CHUNK = 4096


@dataclass(frozen=True)
class GameConfig:
    lambda0: float  # verifier rate, 1/s
    T1: float  # attacker period, s
    alpha0: float = DEFAULT_ALPHA0
    alpha1: Optional[float] = None  # hide duration; None means T1/2
    p_e: float = DEFAULT_P_E
    horizon: float = TEN_DAYS
    runs: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.alpha1 is None:
            object.__setattr__(self, "alpha1", self.T1 / 2)
        if not (self.lambda0 >= 0 and math.isfinite(self.lambda0)):
            raise InvalidInputError(f"lambda0 must be finite and >= 0, got {self.lambda0!r}")
        if not self.T1 > 0:
            raise InvalidInputError(f"T1 must be positive, got {self.T1!r}")
        if not 0 < self.alpha1 <= self.T1:
            raise InvalidInputError(f"alpha1 must lie in (0, T1], got {self.alpha1!r}")
        if not self.alpha0 > 0 or not self.horizon > 0:
            raise InvalidInputError("alpha0 and horizon must be positive")
        check_probability("p_e", self.p_e)
        if self.runs < 1:
            raise InvalidInputError(f"runs must be >= 1, got {self.runs}")

    @property
    def lambda1(self) -> float:
        return 1.0 / self.T1

    @property
    def T0(self) -> float:
        return math.inf if self.lambda0 == 0 else 1.0 / self.lambda0


def _window_measure(s, period, width):
    """Measure of ``[0, s)`` covered by windows ``[m*period, m*period + width)``, ``s >= 0``."""
    m = np.floor(s / period)
    return m * width + np.minimum(s - m * period, width)


@dataclass(frozen=True)
class AttackerSchedule:
    """Periodic hiding: hidden on ``[phase + m*period, phase + m*period + hide)`` for all integers m."""

    phase: float
    period: float
    hide: float

    def _shift(self, t):
        # shifted time is >= 0 for t >= 0 and puts windows at multiples of the period
        return np.asarray(t, dtype=float) - self.phase + self.period

    def hidden(self, t):
        if self.hide >= self.period:
            return np.ones_like(np.asarray(t, dtype=float), dtype=bool)
        return np.mod(self._shift(t), self.period) < self.hide

    def fully_hidden(self, t, duration):
        """True where ``[t, t + duration)`` lies inside a single hide window (or hiding never stops)."""
        if self.hide >= self.period:
            return np.ones_like(np.asarray(t, dtype=float), dtype=bool)
        return np.mod(self._shift(t), self.period) + duration <= self.hide

    def hidden_time(self, t):
        """Exact integral of the hidden indicator over ``[0, t)``."""
        w = min(self.hide, self.period)
        return _window_measure(self._shift(t), self.period, w) - _window_measure(self._shift(0.0), self.period, w)

    def activity(self, t0: float, t1: float) -> list[tuple[float, float, bool]]:
        """Piecewise-constant activity on ``[t0, t1)`` as ``(start, end, active)`` pieces."""
        if self.hide >= self.period:
            return [(t0, t1, False)]
        pieces = []
        m = math.floor((t0 - self.phase) / self.period)
        t = t0
        while t < t1:
            start = self.phase + m * self.period
            for b, active in ((start + self.hide, False), (start + self.period, True)):
                b = min(b, t1)
                if b > t:
                    pieces.append((t, b, active))
                    t = b
            m += 1
        return pieces


@dataclass
class GameTrace:
    """Full-information record of one run.

    ``times`` are verifier action times, ``detects`` their outcomes (True = the
    attacker was caught), ``fully_hidden`` whether the attestation window sat
    inside a hide window, ``draws`` the uniform variates that decided outcomes.
    """

    schedule: AttackerSchedule
    times: np.ndarray
    detects: np.ndarray
    fully_hidden: np.ndarray
    draws: np.ndarray
    end_time: float
    horizon: float

    @property
    def detected(self) -> bool:
        return bool(self.detects.any())

    @property
    def verifier_actions(self) -> list[tuple[float, str]]:
        return [(float(t), "detect" if d else "pass") for t, d in zip(self.times, self.detects)]

    def frac_inactive(self) -> float:
        return float(self.schedule.hidden_time(self.end_time)) / self.end_time


def simulate_run(cfg: GameConfig, rng=None, schedule=None) -> GameTrace:
    """Event-driven run: exponential skips between verifier actions, stop at detection.

    ``schedule`` overrides the periodic attacker; it needs ``fully_hidden`` and ``hidden_time``.
    """
    rng = as_generator(rng)
    if schedule is None:
        schedule = AttackerSchedule(float(rng.uniform(0.0, cfg.T1)), cfg.T1, cfg.alpha1)
    q = 1.0 - cfg.p_e
    times, detects, hidden, draws = [], [], [], []
    t = 0.0
    end = cfg.horizon
    while cfg.lambda0 > 0:
        ts = t + np.cumsum(rng.exponential(1.0 / cfg.lambda0, _CHUNK))
        u = rng.random(_CHUNK)
        keep = ts < cfg.horizon
        ts, u = ts[keep], u[keep]
        fh = schedule.fully_hidden(ts, cfg.alpha0)
        det = ~fh & (u < q)
        hit = np.flatnonzero(det)
        stop = int(hit[0]) + 1 if hit.size else ts.shape[0]
        times.append(ts[:stop])
        detects.append(det[:stop])
        hidden.append(fh[:stop])
        draws.append(u[:stop])
        if hit.size:
            end = min(float(ts[hit[0]]) + cfg.alpha0, cfg.horizon)
            break
        if not keep.all():
            break
        t = float(ts[-1])
    cat = lambda parts, dt: np.concatenate(parts) if parts else np.empty(0, dtype=dt)
    return GameTrace(schedule, cat(times, float), cat(detects, bool), cat(hidden, bool), cat(draws, float),
                     end, cfg.horizon)


@dataclass(frozen=True)
class GameMetrics:
    p_detect: float
    frac_inactive: float
    hit_ratio: float
    runs: int
    # per-run spread, for confidence intervals
    frac_inactive_std: float = 0.0
    actions: int = 0

    def p_detect_ci(self, z: float = 1.96) -> tuple[float, float]:
        return wilson_interval(round(self.p_detect * self.runs), self.runs, z)


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def compute_metrics(traces: Sequence[GameTrace], horizon: Optional[float] = None) -> GameMetrics:
    """Pool per-run traces; ``horizon`` is only checked against the traces."""
    if not traces:
        raise InvalidInputError("need at least one trace")
    if horizon is not None and any(tr.horizon != horizon for tr in traces):
        raise InvalidInputError("traces come from a different horizon")
    detected = np.array([tr.detected for tr in traces])
    frac = np.array([tr.frac_inactive() for tr in traces])
    hits = sum(int(tr.fully_hidden.sum()) for tr in traces)
    actions = sum(tr.times.shape[0] for tr in traces)
    return GameMetrics(float(detected.mean()), float(frac.mean()), hits / actions if actions else 0.0,
                       len(traces), float(frac.std()), actions)


# -- batched exact sampler -------------------------------------------------------

@dataclass
class BatchOutcome:
    """Per-run summaries from :func:`simulate_batch` (no action lists)."""

    phase: np.ndarray
    detected: np.ndarray
    end_time: np.ndarray
    hits: np.ndarray
    actions: np.ndarray
    frac_inactive: np.ndarray

    def metrics(self) -> GameMetrics:
        total = int(self.actions.sum())
        return GameMetrics(float(self.detected.mean()), float(self.frac_inactive.mean()),
                           int(self.hits.sum()) / total if total else 0.0, self.detected.shape[0],
                           float(self.frac_inactive.std()), total)


def simulate_batch(cfg: GameConfig, runs: Optional[int] = None, rng=None) -> BatchOutcome:
    """Draw ``runs`` independent runs exactly, without enumerating actions.

    Detecting attestations form a Poisson process of rate ``lambda0 * (1 - p_e)``
    restricted to start times that are not fully hidden, so the first detection is
    found by inverting that set's measure. Given the stopping time, fully hidden and
    non-detecting active starts are independent Poisson counts.
    """
    rng = as_generator(rng)
    runs = cfg.runs if runs is None else runs
    T1, H, lam = cfg.T1, cfg.horizon, cfg.lambda0
    q = 1.0 - cfg.p_e
    phase = rng.uniform(0.0, T1, runs)
    expo = rng.exponential(1.0, runs)
    always = cfg.alpha1 >= T1
    L = T1 if always else min(max(cfg.alpha1 - cfg.alpha0, 0.0), T1)
    s0 = T1 - phase
    g0 = _window_measure(s0, T1, L)

    if lam > 0 and q > 0 and not always:
        b = expo / (lam * q) + (s0 - g0)
        gap = T1 - L
        m = np.floor(b / gap)
        t_d = m * T1 + L + (b - m * gap) - T1 + phase
        detected = t_d < H
    else:
        t_d = np.full(runs, np.inf)
        detected = np.zeros(runs, dtype=bool)
    stop = np.where(detected, t_d, H)
    hit_measure = _window_measure(stop + s0, T1, L) - g0
    hits = rng.poisson(lam * hit_measure)
    others = rng.poisson(lam * (1.0 - q) * (stop - hit_measure))
    actions = hits + others + detected
    end = np.where(detected, np.minimum(stop + cfg.alpha0, H), H)
    w = min(cfg.alpha1, T1)
    hidden = _window_measure(end + s0, T1, w) - _window_measure(s0, T1, w)
    return BatchOutcome(phase, detected, end, hits, actions, hidden / end)
