"""Timing models, alarm rules and the parameter search."""

from .detect import (
    DetectionConfig,
    detect_hash_phase,
    detect_network_phase,
    hash_threshold,
    network_threshold,
)
from .io import SAMPLE_COLUMNS, dumps_model, dumps_samples, load_model, loads_model, loads_samples, save_model
from .models import NetworkModel, TimingModel, fit_network_model, fit_timing_model
from .optimize import ParameterSolution, optimize_parameters

__all__ = [
    "DetectionConfig", "detect_hash_phase", "detect_network_phase", "hash_threshold",
    "network_threshold", "SAMPLE_COLUMNS", "dumps_model", "dumps_samples", "load_model", "loads_model",
    "loads_samples", "save_model",
    "NetworkModel", "TimingModel", "fit_network_model", "fit_timing_model",
    "ParameterSolution", "optimize_parameters",
]
