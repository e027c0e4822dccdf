"""Verifier/prover exchange over a simulated untrusted machine."""

from .machine import (
    Behavior,
    MachineTiming,
    PhaseLayout,
    ProverOutput,
    SimMachine,
    prover_respond,
)
from .verifier import (
    ChallengeParams,
    RoundRecord,
    Verdict,
    Verifier,
    VerifierConfig,
    VerifierModels,
    run_round,
    train_verifier,
    verifier_initiate,
    verifier_verify,
)
from .wire import (
    Challenge,
    Response,
    decode_challenge,
    decode_response,
    encode_challenge,
    encode_response,
)

__all__ = [
    "Behavior", "MachineTiming", "PhaseLayout", "ProverOutput", "SimMachine", "prover_respond",
    "ChallengeParams", "RoundRecord", "Verdict", "Verifier", "VerifierConfig", "VerifierModels",
    "run_round", "train_verifier", "verifier_initiate", "verifier_verify", "Challenge", "Response",
    "decode_challenge", "decode_response", "encode_challenge", "encode_response",
]
