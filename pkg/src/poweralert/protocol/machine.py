"""Simulated untrusted machine: runs IC-programs and emits current traces."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .._validation import as_generator
from ..exceptions import FormatError, InvalidInputError, ProtocolError
from ..icgen import execute, instructions_per_iteration
from ..power import PfsmParams, Phase, PowerTrace, State, synthesize_trace
from ..timing.models import (
    REFERENCE_BETA,
    REFERENCE_INTERCEPT,
    REFERENCE_SIGMA_M,
    REFERENCE_SIGMA_N,
    REFERENCE_SLOPE,
)
from .wire import Response, decode_challenge, encode_response

# Gaussian std whose mean absolute value is the given figure
MEAN_ABS_TO_STD = math.sqrt(math.pi / 2)


class Behavior(enum.Enum):
    HONEST = "honest"
    REDIRECT = "redirect"  # serve reads from a pristine shadow, +k instructions per iteration
    PROXY = "proxy"  # relay the exchange: one extra transfer of extra_bytes
    HIDDEN = "hidden"  # compromised bytes restored for the round


@dataclass(frozen=True)
class MachineTiming:
    """Ground-truth duration laws of the machine, in microseconds."""

    beta: tuple[float, float, float, float] = REFERENCE_BETA
    sigma_hash: float = REFERENCE_SIGMA_M
    slope: float = REFERENCE_SLOPE
    intercept: float = REFERENCE_INTERCEPT
    sigma_net: float = REFERENCE_SIGMA_N * MEAN_ABS_TO_STD

    def hash_mean(self, N, c):
        b0, b1, b2, b3 = self.beta
        return b0 + b1 * N + b2 * c + b3 * N * c

    def net_mean(self, nbytes):
        return self.slope * nbytes + self.intercept


@dataclass(frozen=True)
class PhaseLayout:
    """Fixed protocol phases around the hash, in seconds."""

    idle_gap: float = 100e-6
    load: float = 50e-6
    # shortest network plateau the prover emits; short transfers are padded to it
    min_dwell: float = 100e-6


class ProverOutput(NamedTuple):
    response: bytes
    trace: PowerTrace
    truth: dict


@dataclass
class SimMachine:
    """Prover under test. ``memory`` is the real (possibly compromised) state and
    ``shadow`` holds the pristine bytes of compromised addresses."""

    memory: object
    behavior: Behavior = Behavior.HONEST
    shadow: dict = field(default_factory=dict)
    k: int = 4
    extra_bytes: int = 160
    timing: MachineTiming = MachineTiming()
    pfsm: PfsmParams = PfsmParams(network_period=400e-6)
    sampling_rate: float = 500e3
    layout: PhaseLayout = PhaseLayout()

    @classmethod
    def compromised(cls, golden, patches: dict, behavior: Behavior = Behavior.HONEST, **kw) -> "SimMachine":
        """Machine whose memory is ``golden`` with ``patches`` (address -> bytes) applied."""
        memory = golden
        shadow = {}
        for addr, payload in patches.items():
            for i in range(len(payload)):
                shadow[addr + i] = golden.read(addr + i, 1)
            memory = memory.patched(addr, payload)
        return cls(memory, behavior, shadow, **kw)

    def effective_memory(self):
        if self.behavior in (Behavior.REDIRECT, Behavior.HIDDEN) and self.shadow:
            mem = self.memory
            for addr, value in self.shadow.items():
                mem = mem.patched(addr, bytes([value]))
            return mem
        return self.memory

    # -- measurements used to train the verifier ---------------------------------

    def measure_hash(self, N, c, rng=None):
        rng = as_generator(rng)
        N = np.asarray(N, dtype=float)
        return self.timing.hash_mean(N, c) + rng.normal(0.0, self.timing.sigma_hash, N.shape)

    def measure_network(self, nbytes, rng=None):
        rng = as_generator(rng)
        nbytes = np.asarray(nbytes, dtype=float)
        return self.timing.net_mean(nbytes) + rng.normal(0.0, self.timing.sigma_net, nbytes.shape)

    def idle_trace(self, duration: float = 2e-3, rng=None) -> PowerTrace:
        return synthesize_trace([Phase(State.S0, duration)], self.pfsm, self.sampling_rate, rng)

    def protocol_trace(self, net_in_us: float, hash_us: float, net_out_us: float, rng=None) -> PowerTrace:
        lay = self.layout
        phases = [
            Phase.network(net_in_us * 1e-6),
            Phase(State.S0, lay.idle_gap),
            Phase(State.S2, lay.load),
            Phase(State.S3, hash_us * 1e-6),
            Phase(State.S0, lay.idle_gap),
            Phase(State.S1, max(net_out_us * 1e-6, lay.min_dwell)),
        ]
        return synthesize_trace(phases, self.pfsm, self.sampling_rate, rng)


def prover_respond(machine: SimMachine, challenge_blob: bytes, rng=None) -> ProverOutput:
    """Run one challenge on ``machine``; returns the response bytes, the current trace
    and the ground truth of what happened."""
    rng = as_generator(rng)
    try:
        ch = decode_challenge(challenge_blob, machine.memory.bounds)
    except FormatError as exc:
        raise ProtocolError(f"malformed challenge: {exc}") from exc
    extra = machine.k if machine.behavior is Behavior.REDIRECT else 0
    result = execute(ch.program, machine.effective_memory(), ch.addresses, ch.nonce, extra_per_iteration=extra)
    response = encode_response(Response(result.hash, ch.program.accumulator_width))

    c_eff = instructions_per_iteration(ch.program) + extra
    t = machine.timing
    hash_us = t.hash_mean(ch.N, c_eff) + rng.normal(0.0, t.sigma_hash)
    net_in_us = t.net_mean(len(challenge_blob)) + rng.normal(0.0, t.sigma_net)
    if machine.behavior is Behavior.PROXY:
        # relaying is a second transfer with its own buffer setup
        net_in_us += t.net_mean(machine.extra_bytes)
    net_out_us = t.net_mean(len(response)) + rng.normal(0.0, t.sigma_net)
    trace = machine.protocol_trace(net_in_us, hash_us, net_out_us, rng)
    truth = {
        "behavior": machine.behavior.value,
        "hash_us": hash_us,
        "net_in_us": net_in_us,
        "net_out_us": max(net_out_us, machine.layout.min_dwell * 1e6),
        "c_effective": c_eff,
        "instruction_count": result.instruction_count,
    }
    return ProverOutput(response, trace, truth)
