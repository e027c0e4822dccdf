"""Power-state extraction: low-pass, differentiate, low-pass, threshold, segment."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.ndimage import uniform_filter1d
from sklearn.base import BaseEstimator, TransformerMixin

from ..exceptions import InvalidInputError
from .trace import PowerTrace

THRESHOLD_SCALE = 4.0
# relative floor on the self-calibrated threshold, for noiseless traces
_FLOOR = 1e-6


@dataclass(frozen=True)
class PowerStateSegment:
    mean_current: float
    interval: tuple[float, float]
    support: int = 0  # samples averaged into mean_current

    @property
    def duration(self) -> float:
        return self.interval[1] - self.interval[0]


@dataclass(frozen=True)
class ExtractionConfig:
    lowpass1_window: int = 5
    lowpass2_window: int = 5
    threshold: Optional[float] = None  # A/s; None calibrates from the trace
    min_segment: int = 8
    merge_tolerance: float = 0.05

    def __post_init__(self):
        if self.lowpass1_window < 1 or self.lowpass2_window < 1:
            raise InvalidInputError("filter windows must be >= 1")
        if self.threshold is not None and not self.threshold > 0:
            raise InvalidInputError(f"threshold must be positive, got {self.threshold!r}")
        if self.min_segment < 1 or self.merge_tolerance < 0:
            raise InvalidInputError("min_segment must be >= 1 and merge_tolerance >= 0")


def filtered_derivative(trace: PowerTrace, cfg: ExtractionConfig):
    """Return ``(i_l, I_f)``: the smoothed current and its smoothed derivative in A/s."""
    i_l = uniform_filter1d(trace.samples, cfg.lowpass1_window, mode="nearest")
    deriv = np.diff(i_l) * trace.sampling_rate
    return i_l, uniform_filter1d(deriv, cfg.lowpass2_window, mode="nearest")


def calibrate_threshold(i_l: np.ndarray, i_f: np.ndarray, fs: float) -> float:
    floor = _FLOOR * fs * max(float(np.max(np.abs(i_l))), 1e-12)
    return max(THRESHOLD_SCALE * float(np.median(np.abs(i_f))), floor)


def _quiet_runs(mask: np.ndarray, min_len: int) -> list[tuple[int, int]]:
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    keep = stops - starts + 1 >= min_len
    return list(zip(starts[keep].tolist(), stops[keep].tolist()))


def _edge_index(mag: np.ndarray, lo: int, hi: int, half: int) -> float:
    """Centroid of the derivative pulse around the strongest point of gap ``[lo, hi)``."""
    peak = lo + int(np.argmax(mag[lo:hi]))
    a, b = max(peak - half, lo), min(peak + half + 1, hi)
    w = mag[a:b]
    return float(np.dot(np.arange(a, b), w) / w.sum())


def extract_power_states(trace: PowerTrace, cfg: ExtractionConfig = ExtractionConfig()) -> list[PowerStateSegment]:
    """Segment ``trace`` into power states.

    Quiet runs of the filtered derivative become segments. Each boundary sits at
    the centroid of the derivative pulse between two runs (the trace ends bound
    the outer segments), so durations carry no systematic filter delay.
    """
    n = len(trace)
    if n <= max(cfg.lowpass1_window, cfg.lowpass2_window) + 1:
        raise InvalidInputError(f"trace of {n} samples is too short for the filters")
    fs = trace.sampling_rate
    i_l, i_f = filtered_derivative(trace, cfg)
    lam = cfg.threshold if cfg.threshold is not None else calibrate_threshold(i_l, i_f, fs)
    runs = _quiet_runs(np.abs(i_f) <= lam, cfg.min_segment)
    if not runs:
        return []

    # derivative index j sits on the boundary between samples j and j+1
    half = max((cfg.lowpass1_window + cfg.lowpass2_window) // 2 - 1, 0)
    mag = np.abs(i_f)
    bounds = [0.0]
    for (_, b0), (a1, _) in zip(runs, runs[1:]):
        bounds.append((_edge_index(mag, b0 + 1, a1, half) + 1) / fs)
    bounds.append(n / fs)

    segments = []
    for r, (a, b) in enumerate(runs):
        flat = i_l[a:b + 2]
        seg = PowerStateSegment(float(flat.mean()), (bounds[r], bounds[r + 1]), flat.shape[0])
        if segments and abs(segments[-1].mean_current - seg.mean_current) < cfg.merge_tolerance:
            prev = segments[-1]
            w = prev.support + seg.support
            mean = (prev.mean_current * prev.support + seg.mean_current * seg.support) / w
            segments[-1] = replace(prev, mean_current=mean, interval=(prev.interval[0], seg.interval[1]), support=w)
        else:
            segments.append(seg)
    return segments


class PowerStateExtractor(BaseEstimator, TransformerMixin):
    """Transformer wrapper: ``transform`` maps traces to segment lists.

    Stateless; ``fit`` only validates the parameters.
    """

    def __init__(self, lowpass1_window=5, lowpass2_window=5, threshold=None, min_segment=8,
                 merge_tolerance=0.05):
        self.lowpass1_window = lowpass1_window
        self.lowpass2_window = lowpass2_window
        self.threshold = threshold
        self.min_segment = min_segment
        self.merge_tolerance = merge_tolerance

    def config(self) -> ExtractionConfig:
        return ExtractionConfig(**self.get_params())

    def fit(self, X=None, y=None):
        self.config_ = self.config()
        return self

    def transform(self, X):
        cfg = getattr(self, "config_", None) or self.config()
        if isinstance(X, PowerTrace):
            return extract_power_states(X, cfg)
        return [extract_power_states(t, cfg) for t in X]
