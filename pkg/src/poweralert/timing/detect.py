"""Tolerance rules that turn duration residuals into alarms."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..exceptions import InvalidInputError
from .models import NetworkModel, TimingModel

MIB = 1024 * 1024


@dataclass(frozen=True)
class DetectionConfig:
    """Alarm and parameter-search settings. Times in microseconds."""

    gamma: float = 10.0
    sigma_s: float = 2.0
    k: int = 4
    cost: int = 300
    coverage_min: float = 1e-6
    n_total: int = 200 * MIB
    word_size: int = 4
    c_min: int = 40

    def __post_init__(self):
        if self.gamma < 1:
            raise InvalidInputError(f"gamma must be >= 1, got {self.gamma}")
        for name in ("sigma_s", "k", "cost", "coverage_min", "n_total", "word_size", "c_min"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive, got {getattr(self, name)!r}")

    @classmethod
    def for_sampling_rate(cls, fs: float, **kw) -> "DetectionConfig":
        if not fs > 0:
            raise InvalidInputError(f"sampling rate must be positive, got {fs!r}")
        return cls(sigma_s=1e6 / fs, **kw)

    def with_sampling_rate(self, fs: float) -> "DetectionConfig":
        return replace(self, sigma_s=1e6 / fs)


def hash_threshold(model: TimingModel, cfg: DetectionConfig) -> float:
    return cfg.gamma * (model.sigma_m_ + cfg.sigma_s)


def network_threshold(net: NetworkModel, cfg: DetectionConfig) -> float:
    return cfg.gamma * max(net.sigma_n_, cfg.sigma_s)


def detect_hash_phase(measured: float, predicted: float, model: TimingModel, cfg: DetectionConfig) -> bool:
    """True (malicious) iff ``|predicted - measured| >= gamma * (sigma_m + sigma_s)``."""
    return abs(predicted - measured) >= hash_threshold(model, cfg)


def detect_network_phase(measured: float, predicted: float, net: NetworkModel, cfg: DetectionConfig) -> bool:
    """True (malicious) iff ``|predicted - measured| >= gamma * max(sigma_n, sigma_s)``."""
    return abs(predicted - measured) >= network_threshold(net, cfg)
