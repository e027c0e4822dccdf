"""Smallest IC-program parameters whose tampering stays visible in the timing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InfeasibleError
from .detect import DetectionConfig, hash_threshold, network_threshold
from .models import NetworkModel, TimingModel

INJECTION_GAP = "injection-gap"
NETWORK_VISIBILITY = "network-visibility"
COVERAGE = "coverage"
PROGRAM_COST = "program-cost"


@dataclass(frozen=True)
class ParameterSolution:
    N: int
    c: int
    tolerance: float
    predicted: float
    n_bound: float  # real-valued injection-gap bound on N
    violations: tuple[str, ...] = field(default=())

    @property
    def feasible(self) -> bool:
        return not self.violations


def _first_int_above(x: float) -> int:
    return math.floor(x) + 1


def optimize_parameters(model: TimingModel, net: NetworkModel, cfg: DetectionConfig, *,
                        strict: bool = False, grid: int = 64) -> ParameterSolution:
    """Minimise predicted hash time over integer ``(N, c)``.

    Constraints: k injected instructions per iteration shift the time by more than
    ``gamma (sigma_m + sigma_s)``; a program of ``c`` words is visible on the network
    (``y_n(c * word_size) > gamma max(sigma_n, sigma_s)``); ``c < cost``;
    ``N / n_total >= coverage_min``; and ``c >= c_min``.

    N constraints that cannot be met raise ``InfeasibleError``. An unmet network
    constraint is reported in ``violations`` (and raised when ``strict``), with
    ``c`` left at the smallest value meeting the other constraints.
    """
    tol = hash_threshold(model, cfg)
    _, _, b2, b3 = model.beta
    # k (b2 + b3 N) > tol
    if b3 > 0:
        n_bound = (tol / cfg.k - b2) / b3
        n_min = max(_first_int_above(n_bound), 1)
    elif cfg.k * b2 > tol:
        n_bound, n_min = -math.inf, 1
    else:
        raise InfeasibleError(INJECTION_GAP, "the injection gap never exceeds the tolerance")
    n_min = max(n_min, math.ceil(cfg.coverage_min * cfg.n_total))
    if n_min > cfg.n_total:
        raise InfeasibleError(INJECTION_GAP, f"N >= {n_min} exceeds the protected region of {cfg.n_total} bytes")

    violations = []
    net_tol = network_threshold(net, cfg)
    c_net = _first_int_above((net_tol - net.intercept_) / net.slope_ / cfg.word_size)
    c = max(cfg.c_min, c_net)
    if c >= cfg.cost:
        violations.append(NETWORK_VISIBILITY)
        if strict:
            raise InfeasibleError(NETWORK_VISIBILITY,
                                  f"needs c >= {c_net} but the cost bound is {cfg.cost}")
        c = cfg.c_min
    if c >= cfg.cost:
        violations.append(PROGRAM_COST)
        if strict:
            raise InfeasibleError(PROGRAM_COST, f"c_min={cfg.c_min} is not below cost={cfg.cost}")

    sol = ParameterSolution(n_min, c, tol, model.evaluate(n_min, c), n_bound, tuple(violations))
    _grid_check(model, net, cfg, sol, grid)
    return sol


def _feasible(model, net, cfg, N, c, tol, net_tol, check_net):
    ok = (cfg.k * model.gradient(N, c)[1] > tol) & (N >= cfg.coverage_min * cfg.n_total) & (c >= cfg.c_min)
    if check_net:
        ok = ok & (net.slope_ * c * cfg.word_size + net.intercept_ > net_tol) & (c < cfg.cost)
    return ok


def _grid_check(model, net, cfg, sol, span):
    """Exhaustive check on a window around the solution: no feasible point predicts less."""
    tol = hash_threshold(model, cfg)
    net_tol = network_threshold(net, cfg)
    N = np.arange(max(sol.N - span, 1), sol.N + span + 1, dtype=float)[:, None]
    c = np.arange(max(sol.c - span, 1), sol.c + span + 1, dtype=float)[None, :]
    ok = _feasible(model, net, cfg, N, c, tol, net_tol, sol.feasible)
    b0, b1, b2, b3 = model.beta
    y = b0 + b1 * N + b2 * c + b3 * N * c
    best = np.min(np.where(ok, y, np.inf))
    if best < sol.predicted - 1e-9:
        raise AssertionError(f"grid found a cheaper feasible point ({best} < {sol.predicted})")
