"""Power finite-state machine: levels, trace synthesis, labelling and the protocol language."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .._validation import as_generator
from ..exceptions import InvalidInputError
from .trace import PowerTrace


class State(enum.IntEnum):
    UNKNOWN = -1
    S0 = 0  # idle
    S1 = 1  # network
    S2 = 2  # load
    S3 = 3  # hash

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PfsmParams:
    i_idle: float = 0.870
    i1: float = 1.36
    i2: float = 2.34
    i3: float = 1.58
    network_period: float = 200e-6
    noise_sigma: float = 0.02

    def __post_init__(self):
        if min(self.levels) <= 0:
            raise InvalidInputError("all current levels must be positive")
        if self.network_period <= 0 or self.noise_sigma < 0:
            raise InvalidInputError("network period must be positive and noise non-negative")

    @property
    def levels(self) -> tuple[float, float, float, float]:
        return (self.i_idle, self.i1, self.i2, self.i3)

    def level(self, state: State) -> float:
        return self.levels[int(state)]

    def min_gap(self) -> float:
        lv = sorted(self.levels)
        return min(b - a for a, b in zip(lv, lv[1:]))

    def extractable(self) -> bool:
        return self.min_gap() > 3 * self.noise_sigma


@dataclass(frozen=True)
class Phase:
    """A timed stay in one state; ``long_network`` phases expand into S0/S1 alternation."""

    state: State
    duration: float
    long_network: bool = False

    @classmethod
    def network(cls, duration: float) -> "Phase":
        return cls(State.S1, duration, long_network=True)


def expand_phases(phases: Iterable[Phase], period: float) -> list[Phase]:
    """Replace each long-network phase by whole S0/S1 periods filling its duration.

    The period count is ``max(1, round(duration / period))`` and the halves are
    stretched so the total is preserved exactly.
    """
    out = []
    for ph in phases:
        if ph.duration <= 0:
            raise InvalidInputError(f"phase duration must be positive, got {ph.duration!r}")
        if not ph.long_network:
            out.append(ph)
            continue
        reps = max(1, round(ph.duration / period))
        half = ph.duration / (2 * reps)
        for _ in range(reps):
            out.append(Phase(State.S0, half))
            out.append(Phase(State.S1, half))
    return out


def synthesize_trace(phases: Sequence[Phase], params: PfsmParams, fs: float, rng=None) -> PowerTrace:
    """Piecewise-constant current at each state's level plus i.i.d. Gaussian noise."""
    if not fs > 0:
        raise InvalidInputError(f"sampling rate must be positive, got {fs!r}")
    flat = expand_phases(phases, params.network_period)
    ends = np.cumsum([p.duration for p in flat])
    edges = np.rint(np.concatenate([[0.0], ends]) * fs).astype(np.int64)
    levels = np.array([params.level(p.state) for p in flat])
    samples = np.repeat(levels, np.diff(edges))
    if params.noise_sigma > 0:
        samples = samples + as_generator(rng).normal(0.0, params.noise_sigma, samples.shape[0])
    return PowerTrace(samples, fs)


def classify_states(segments, params: PfsmParams, level_tolerance: float = 0.10) -> list[State]:
    """Nearest PFSM level within ``level_tolerance`` (relative), else UNKNOWN."""
    levels = np.array(params.levels)
    labels = []
    for seg in segments:
        j = int(np.argmin(np.abs(levels - seg.mean_current)))
        ok = abs(seg.mean_current - levels[j]) <= level_tolerance * levels[j]
        labels.append(State(j) if ok else State.UNKNOWN)
    return labels


# DFA over stutter-collapsed labels for (S0 S1)+ S0 S2 S3 S0 S1.
# Consecutive repeats are collapsed first, since a physical plateau cannot show
# the S0,S0 junction between the hash block and the output transfer twice.
_ACCEPT = 7
_DELTA = {
    (0, State.S0): 1,
    (1, State.S1): 2,
    (2, State.S0): 3,
    (3, State.S1): 2,
    (3, State.S2): 4,
    (4, State.S3): 5,
    (5, State.S0): 6,
    (6, State.S1): _ACCEPT,
}


def collapse_repeats(states: Sequence) -> list:
    out = []
    for s in states:
        if not out or out[-1] != s:
            out.append(s)
    return out


def validate_language(states: Sequence) -> bool:
    q = 0
    for s in collapse_repeats(states):
        try:
            s = State(s)
        except ValueError:
            return False
        q = _DELTA.get((q, s))
        if q is None:
            return False
    return q == _ACCEPT


def within_rtt(durations: Iterable[float], rtt_bound: float) -> bool:
    total = math.fsum(durations)
    return total <= rtt_bound
