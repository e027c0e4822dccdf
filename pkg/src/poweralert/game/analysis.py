"""Statistical trend checks over a sweep table."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .sweep import SweepRow

Z_ONE_SIDED = 1.645
Z_TWO_SIDED = 1.96


@dataclass(frozen=True)
class TrendCheck:
    name: str
    passed: bool
    summary: str
    detail: dict = field(default_factory=dict)


def _columns(rows: Sequence[SweepRow]):
    by_t1 = {}
    for r in rows:
        by_t1.setdefault(r.T1_s, []).append(r)
    return {t1: sorted(col, key=lambda r: r.lambda0) for t1, col in sorted(by_t1.items())}


def p_detect_monotone(rows: Sequence[SweepRow], z: float = Z_TWO_SIDED) -> TrendCheck:
    """Adjacent cells in lambda0 at fixed T1: a drop counts only if it exceeds ``z`` standard errors."""
    worst, pairs, violations = np.inf, 0, []
    for t1, col in _columns(rows).items():
        for lo, hi in zip(col, col[1:]):
            se = np.sqrt(lo.p_detect * (1 - lo.p_detect) / lo.runs + hi.p_detect * (1 - hi.p_detect) / hi.runs)
            score = (hi.p_detect - lo.p_detect) / se if se > 0 else (0.0 if hi.p_detect >= lo.p_detect else -np.inf)
            worst = min(worst, score)
            pairs += 1
            if score < -z:
                violations.append((t1, lo.T0_s, hi.T0_s))
    return TrendCheck("p_detect nondecreasing in lambda0", not violations,
                      f"{len(violations)} significant drops in {pairs} pairs (min z {worst:.2f})",
                      {"violations": violations, "pairs": pairs, "min_z": float(worst)})


def _wls(rows: Sequence[SweepRow], y, se):
    """Weighted fit ``y ~ c + b1*lambda1 + b0*lambda0``; returns coefficients and their z-scores."""
    X = np.column_stack([np.ones(len(rows)), [r.lambda1 for r in rows], [r.lambda0 for r in rows]])
    w = 1.0 / np.maximum(np.asarray(se, dtype=float), 1e-15)
    Xw, yw = X * w[:, None], np.asarray(y, dtype=float) * w
    beta, *_ = np.linalg.lstsq(Xw, yw, rcond=None)
    cov = np.linalg.pinv(Xw.T @ Xw)
    # inflate by the residual scale when the model under-explains the scatter
    dof = max(len(rows) - 3, 1)
    scale = max(1.0, float(np.sum((yw - Xw @ beta) ** 2)) / dof)
    zs = beta / np.sqrt(np.diag(cov) * scale)
    return beta, zs


def _frac_se(rows):
    return [r.frac_inactive_std / np.sqrt(r.runs) for r in rows]


def frac_inactive_falls_with_lambda1(rows: Sequence[SweepRow], z: float = Z_ONE_SIDED) -> TrendCheck:
    beta, zs = _wls(rows, [r.frac_inactive for r in rows], _frac_se(rows))
    return TrendCheck("frac_inactive decreases in lambda1", bool(zs[1] < -z),
                      f"slope {beta[1]:.3e} per Hz, z {zs[1]:.2f} (need < {-z})",
                      {"slope": float(beta[1]), "z": float(zs[1])})


def hit_ratio_max_at_slow_attacker(rows: Sequence[SweepRow], z: float = Z_ONE_SIDED) -> TrendCheck:
    """Significant downward slope in lambda1, and the slowest T1 column is within noise of the best column."""
    se = [np.sqrt(r.hit_ratio * (1 - r.hit_ratio) / max(r.actions, 1)) for r in rows]
    beta, zs = _wls(rows, [r.hit_ratio for r in rows], se)
    means = {}
    for t1 in sorted({r.T1_s for r in rows}):
        idx = [i for i, r in enumerate(rows) if r.T1_s == t1]
        means[t1] = (np.mean([rows[i].hit_ratio for i in idx]), np.sqrt(sum(se[i] ** 2 for i in idx)) / len(idx))
    best = max(means, key=lambda t: means[t][0])
    slowest = max(means)
    gap = means[best][0] - means[slowest][0]
    gap_se = np.hypot(means[best][1], means[slowest][1])
    close = gap <= Z_TWO_SIDED * gap_se
    return TrendCheck("hit_ratio maximal at slowest attacker", bool(zs[1] < -z and close),
                      f"slope {beta[1]:.3e} per Hz (z {zs[1]:.2f}); best column T1={best:g} s, "
                      f"slowest T1={slowest:g} s trails by {gap:.2e} (se {gap_se:.1e})",
                      {"slope": float(beta[1]), "z": float(zs[1]), "best_T1": float(best), "gap": float(gap)})


def frac_inactive_peak_corner(rows: Sequence[SweepRow], z: float = Z_ONE_SIDED) -> TrendCheck:
    """Fitted surface rises toward slow attacker (small lambda1) and fast verifier (large lambda0)."""
    beta, zs = _wls(rows, [r.frac_inactive for r in rows], _frac_se(rows))
    top = max(rows, key=lambda r: r.frac_inactive)
    return TrendCheck("frac_inactive peaks at slow attacker and fast verifier", bool(zs[1] < -z and zs[2] > z),
                      f"z(lambda1) {zs[1]:.2f}, z(lambda0) {zs[2]:.2f}; top cell T1={top.T1_s:g} s, "
                      f"T0={top.T0_s:g} s",
                      {"z_lambda1": float(zs[1]), "z_lambda0": float(zs[2]), "top": (top.T1_s, top.T0_s)})


def qualitative_checks(rows: Sequence[SweepRow]) -> list[TrendCheck]:
    return [p_detect_monotone(rows), frac_inactive_falls_with_lambda1(rows), hit_ratio_max_at_slow_attacker(rows),
            frac_inactive_peak_corner(rows)]
