"""Continuous-time attacker/verifier game: simulation, sweeps and trend checks."""

from .analysis import (
    TrendCheck,
    frac_inactive_falls_with_lambda1,
    frac_inactive_peak_corner,
    hit_ratio_max_at_slow_attacker,
    p_detect_monotone,
    qualitative_checks,
)
from .model import (
    DEFAULT_ALPHA0,
    DEFAULT_P_E,
    TEN_DAYS,
    AttackerSchedule,
    BatchOutcome,
    GameConfig,
    GameMetrics,
    GameTrace,
    compute_metrics,
    simulate_batch,
    simulate_run,
    wilson_interval,
)
from .probe import JitteredSchedule, ProbeReport, StrategyResult, best_response_probe, probe_config
from .sweep import (
    FIELDS,
    SweepRow,
    as_matrix,
    paper_grid,
    rows_from_csv,
    rows_to_csv,
    rows_to_json,
    run_cell,
    sweep,
)

__all__ = [
    "TrendCheck", "frac_inactive_falls_with_lambda1", "frac_inactive_peak_corner", "hit_ratio_max_at_slow_attacker",
    "p_detect_monotone", "qualitative_checks", "DEFAULT_ALPHA0", "DEFAULT_P_E", "TEN_DAYS", "AttackerSchedule",
    "BatchOutcome", "GameConfig", "GameMetrics", "GameTrace", "compute_metrics", "simulate_batch", "simulate_run",
    "wilson_interval", "JitteredSchedule", "ProbeReport", "StrategyResult", "best_response_probe", "probe_config",
    "FIELDS", "SweepRow", "as_matrix", "paper_grid", "rows_from_csv", "rows_to_csv", "rows_to_json", "run_cell",
    "sweep",
]
