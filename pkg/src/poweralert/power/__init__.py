"""Power traces: synthesis from a PFSM, state extraction, labelling and learning."""

from .extract import (
    ExtractionConfig,
    PowerStateExtractor,
    PowerStateSegment,
    extract_power_states,
    filtered_derivative,
)
from .learn import PfsmLearner, estimate_noise, learn_pfsm
from .pfsm import (
    PfsmParams,
    Phase,
    State,
    classify_states,
    collapse_repeats,
    expand_phases,
    synthesize_trace,
    validate_language,
    within_rtt,
)
from .trace import PowerTrace, read_trace, trace_from_bytes, trace_to_bytes, write_trace

__all__ = [
    "ExtractionConfig", "PowerStateExtractor", "PowerStateSegment", "extract_power_states",
    "filtered_derivative", "PfsmLearner", "estimate_noise", "learn_pfsm", "PfsmParams", "Phase",
    "State", "classify_states", "collapse_repeats", "expand_phases", "synthesize_trace",
    "validate_language", "within_rtt", "PowerTrace", "read_trace", "trace_from_bytes",
    "trace_to_bytes", "write_trace",
]
