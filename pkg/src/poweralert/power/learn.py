"""Learn PFSM current levels from honest protocol traces."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ..exceptions import LearningFailure
from .extract import ExtractionConfig, PowerStateSegment, extract_power_states
from .pfsm import PfsmParams, State, classify_states
from .trace import PowerTrace

# an honest run ends with load, hash, idle, output
_TAIL = (State.S2, State.S3, State.S0, State.S1)


def _gap_clusters(values: np.ndarray, gap: float) -> int:
    v = np.sort(values)
    return 1 + int(np.sum(np.diff(v) > gap))


def estimate_noise(samples: np.ndarray) -> float:
    """Robust white-noise sigma from first differences (MAD scaled for a Gaussian)."""
    d = np.diff(samples)
    return float(1.4826 * np.median(np.abs(d - np.median(d))) / np.sqrt(2.0))


def learn_pfsm(training_traces: Sequence[PowerTrace], cfg: ExtractionConfig = ExtractionConfig(),
               idle_trace: Optional[PowerTrace] = None, refine_iterations: int = 3) -> PfsmParams:
    """Estimate the four state levels, the noise sigma and the network period.

    Provisional levels come from the fixed tail of each honest run; every segment
    is then assigned to its nearest level and levels are re-averaged, weighted by
    the number of samples behind each segment mean.
    """
    if not training_traces:
        raise LearningFailure("no training traces")
    per_trace = [extract_power_states(t, cfg) for t in training_traces]
    segs: list[PowerStateSegment] = [s for run in per_trace for s in run]
    if not segs:
        raise LearningFailure("no power states found in the training traces")
    means = np.array([s.mean_current for s in segs])
    if _gap_clusters(means, max(cfg.merge_tolerance, 1e-9)) < 4:
        raise LearningFailure(f"found fewer than 4 distinguishable current levels in {len(segs)} segments")

    tails = [run[-4:] for run in per_trace if len(run) >= 6]
    if not tails:
        raise LearningFailure("no training trace has the protocol's phase structure")
    provisional = np.zeros(4)
    for j, state in enumerate(_TAIL):
        provisional[int(state)] = np.median([t[j].mean_current for t in tails])
    if idle_trace is not None:
        provisional[0] = float(np.mean(idle_trace.samples))
    if _gap_clusters(provisional, max(cfg.merge_tolerance, 1e-9)) < 4:
        raise LearningFailure(f"provisional levels {provisional.tolist()} are not separable")

    weights = np.array([s.support for s in segs], dtype=float)
    levels = provisional.copy()
    for _ in range(refine_iterations):
        label = np.argmin(np.abs(means[:, None] - levels[None, :]), axis=1)
        for k in range(4):
            sel = label == k
            if sel.any():
                levels[k] = np.average(means[sel], weights=weights[sel])
    if idle_trace is not None:
        levels[0] = float(np.mean(idle_trace.samples))

    noise_src = idle_trace.samples if idle_trace is not None else np.concatenate([t.samples for t in training_traces])
    sigma = estimate_noise(noise_src)
    period = _network_period(per_trace, levels)
    return PfsmParams(*levels.tolist(), network_period=period, noise_sigma=sigma)


def _network_period(per_trace, levels) -> float:
    provisional = PfsmParams(*levels.tolist(), network_period=1.0, noise_sigma=0.0)
    pairs = []
    for run in per_trace:
        head = run[:-4]
        labels = classify_states(head, provisional)
        # S0/S1 pairs before the final idle gap
        for a, b, la, lb in zip(head[:-1:2], head[1::2], labels[:-1:2], labels[1::2]):
            if la == State.S0 and lb == State.S1:
                pairs.append(a.duration + b.duration)
    return float(np.median(pairs)) if pairs else PfsmParams().network_period


class PfsmLearner(BaseEstimator):
    """Estimator form of ``learn_pfsm``; ``predict`` labels the states of a trace."""

    def __init__(self, extraction: ExtractionConfig = ExtractionConfig(), level_tolerance=0.10):
        self.extraction = extraction
        self.level_tolerance = level_tolerance

    def fit(self, X, y=None, idle_trace=None):
        self.params_ = learn_pfsm(list(X), self.extraction, idle_trace=idle_trace)
        return self

    def predict(self, trace: PowerTrace) -> list[State]:
        segs = extract_power_states(trace, self.extraction)
        return classify_states(segs, self.params_, self.level_tolerance)
