"""Verifier: challenge generation, model training and three-way verification."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .._validation import as_generator
from ..exceptions import FormatError, InvalidCoverageError
from ..icgen import assemble_program, execute, gen_address_list, instructions_per_iteration
from ..power import (
    ExtractionConfig,
    PfsmParams,
    PowerTrace,
    State,
    classify_states,
    extract_power_states,
    learn_pfsm,
    validate_language,
)
from ..timing import (
    DetectionConfig,
    NetworkModel,
    TimingModel,
    detect_hash_phase,
    detect_network_phase,
    fit_network_model,
    fit_timing_model,
    hash_threshold,
    network_threshold,
)
from .machine import PhaseLayout, SimMachine, prover_respond
from .wire import Challenge, decode_response, encode_challenge


@dataclass(frozen=True)
class ChallengeParams:
    N: int = 2331
    degree: int = 32
    depth: int = 8
    lfsrs: int = 8
    accumulator_width: int = 64
    word_size: int = 4
    target_cost: Optional[int] = 40


@dataclass(frozen=True)
class VerifierConfig:
    detection: DetectionConfig = DetectionConfig()
    params: ChallengeParams = ChallengeParams()
    layout: PhaseLayout = PhaseLayout()
    extraction: ExtractionConfig = ExtractionConfig()
    level_tolerance: float = 0.10
    rtt_factor: float = 2.0


@dataclass
class VerifierModels:
    timing: TimingModel
    network: NetworkModel
    pfsm: PfsmParams


@dataclass
class Verdict:
    output_ok: bool
    timing_ok: bool
    language_ok: bool
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.output_ok and self.timing_ok and self.language_ok


class RoundRecord(NamedTuple):
    verdict: Verdict
    challenge: bytes
    response: bytes
    trace: PowerTrace
    truth: dict


def verifier_initiate(golden, params: ChallengeParams = ChallengeParams(), rng=None,
                      coverage_min: float = 0.0) -> Challenge:
    """Fresh program, address list of ``params.N`` bytes over ``golden`` and nonce."""
    rng = as_generator(rng)
    lo, hi = golden.bounds
    if params.N / (hi - lo) < coverage_min:
        raise InvalidCoverageError(f"N={params.N} covers less than {coverage_min} of the region")
    program = assemble_program(params.degree, params.depth, params.lfsrs, params.accumulator_width, rng,
                               word_size=params.word_size, target_cost=params.target_cost)
    addresses = gen_address_list(params.N, golden.bounds, params.word_size, rng)
    nonce = int.from_bytes(rng.bytes(8), "little")
    return Challenge(program, addresses, nonce)


def _runs(segments, labels):
    """Group consecutive equal labels: ``[(label, t_start, t_end)]``."""
    runs = []
    for seg, lab in zip(segments, labels):
        if runs and runs[-1][0] == lab:
            runs[-1] = (lab, runs[-1][1], seg.interval[1])
        else:
            runs.append((lab, seg.interval[0], seg.interval[1]))
    return runs


def verifier_verify(challenge: Challenge, challenge_size: int, response_blob: bytes, trace: PowerTrace,
                    golden, models: VerifierModels, cfg: VerifierConfig = VerifierConfig()) -> Verdict:
    """Check the hash, the power-state language and every phase duration."""
    detail = {}
    expected = execute(challenge.program, golden, challenge.addresses, challenge.nonce).hash
    try:
        response = decode_response(response_blob)
        output_ok = response.hash == expected
    except FormatError as exc:
        response = None
        output_ok = False
        detail["response_error"] = str(exc)

    det = cfg.detection
    lay = cfg.layout
    pred_hash = models.timing.evaluate(challenge.N, instructions_per_iteration(challenge.program))
    pred_in = models.network.evaluate(challenge_size)
    out_size = len(response_blob)
    pred_out = max(models.network.evaluate(out_size), lay.min_dwell * 1e6)
    detail.update(predicted_hash_us=pred_hash, predicted_net_in_us=pred_in, predicted_net_out_us=pred_out,
                  hash_threshold_us=hash_threshold(models.timing, det),
                  network_threshold_us=network_threshold(models.network, det))

    try:
        segments = extract_power_states(trace, cfg.extraction)
    except ValueError as exc:
        detail["trace_error"] = str(exc)
        segments = []
    labels = classify_states(segments, models.pfsm, cfg.level_tolerance)
    detail["states"] = " ".join(str(s) for s in labels)
    language_ok = bool(segments) and validate_language(labels)
    if not language_ok:
        return Verdict(output_ok, False, False, detail)

    runs = _runs(segments, labels)
    us = 1e6
    meas_in = (runs[-6][2] - runs[0][1]) * us
    meas_hash = (runs[-3][2] - runs[-3][1]) * us
    meas_out = (runs[-1][2] - runs[-1][1]) * us
    rtt = trace.duration * us
    rtt_bound = cfg.rtt_factor * (pred_in + pred_hash + pred_out + (2 * lay.idle_gap + lay.load) * us)
    hash_alarm = detect_hash_phase(meas_hash, pred_hash, models.timing, det)
    in_alarm = detect_network_phase(meas_in, pred_in, models.network, det)
    out_alarm = detect_network_phase(meas_out, pred_out, models.network, det)
    detail.update(measured_hash_us=meas_hash, measured_net_in_us=meas_in, measured_net_out_us=meas_out,
                  delta_hash_us=meas_hash - pred_hash, delta_net_in_us=meas_in - pred_in,
                  delta_net_out_us=meas_out - pred_out, rtt_us=rtt, rtt_bound_us=rtt_bound,
                  hash_alarm=hash_alarm, network_alarm=in_alarm or out_alarm)
    timing_ok = not (hash_alarm or in_alarm or out_alarm) and rtt <= rtt_bound
    return Verdict(output_ok, timing_ok, True, detail)


def train_verifier(machine: SimMachine, rng=None, *, timing_samples: int = 2000, network_samples: int = 500,
                   traces: int = 20, cfg: VerifierConfig = VerifierConfig()) -> VerifierModels:
    """Learn the timing, network and PFSM models from an honest machine."""
    rng = as_generator(rng)
    N = rng.integers(200, 8000, timing_samples)
    c = rng.integers(10, 300, timing_samples)
    t = machine.measure_hash(N, c, rng)
    timing = fit_timing_model(np.column_stack([N, c, t]))
    nbytes = rng.integers(8, 16_000, network_samples)
    network = fit_network_model(np.column_stack([nbytes, machine.measure_network(nbytes, rng)]))
    runs = [machine.protocol_trace(float(rng.uniform(300, 1500)), float(rng.uniform(300, 1500)),
                                   float(rng.uniform(10, 30)), rng) for _ in range(traces)]
    pfsm = learn_pfsm(runs, cfg.extraction, idle_trace=machine.idle_trace(rng=rng))
    return VerifierModels(timing, network, pfsm)


@dataclass
class Verifier:
    golden: object
    models: VerifierModels
    config: VerifierConfig = VerifierConfig()

    def initiate(self, rng=None) -> tuple[Challenge, bytes]:
        ch = verifier_initiate(self.golden, self.config.params, rng, self.config.detection.coverage_min)
        return ch, encode_challenge(ch)

    def verify(self, challenge: Challenge, challenge_blob: bytes, response: bytes, trace: PowerTrace) -> Verdict:
        return verifier_verify(challenge, len(challenge_blob), response, trace, self.golden, self.models,
                               self.config)


def run_round(verifier: Verifier, machine: SimMachine, rng=None) -> RoundRecord:
    rng = as_generator(rng)
    challenge, blob = verifier.initiate(rng)
    out = prover_respond(machine, blob, rng)
    verdict = verifier.verify(challenge, blob, out.response, out.trace)
    return RoundRecord(verdict, blob, out.response, out.trace, out.truth)
