import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from poweralert.exceptions import (
    BadMagicError,
    BadVersionError,
    FormatError,
    InvalidInputError,
    LearningFailure,
    TruncatedError,
)
from poweralert.power import (
    ExtractionConfig,
    PfsmLearner,
    PfsmParams,
    Phase,
    PowerStateExtractor,
    PowerTrace,
    State,
    classify_states,
    expand_phases,
    extract_power_states,
    learn_pfsm,
    read_trace,
    synthesize_trace,
    trace_from_bytes,
    trace_to_bytes,
    validate_language,
    write_trace,
)
from poweralert.power.extract import PowerStateSegment

from oracles import language_oracle

FS = 500_000.0
P = PfsmParams(network_period=400e-6)
S0, S1, S2, S3 = State.S0, State.S1, State.S2, State.S3


def honest_phases(hash_us=935.0, net_us=700.0):
    return [
        Phase.network(net_us * 1e-6),
        Phase(S0, 100e-6),
        Phase(S2, 50e-6),
        Phase(S3, hash_us * 1e-6),
        Phase(S0, 100e-6),
        Phase(S1, 100e-6),
    ]


def quiet(params):
    return PfsmParams(*params.levels, network_period=params.network_period, noise_sigma=0.0)


# -- synthesis ------------------------------------------------------------------

def test_idle_noiseless():
    tr = synthesize_trace([Phase(S0, 1.0)], quiet(P), 10_000)
    assert len(tr) == 10_000
    assert np.all(tr.samples == 0.870)


def test_four_plateaus():
    phases = [Phase(s, 100e-6) for s in (S0, S2, S3, S0)]
    tr = synthesize_trace(phases, quiet(P), FS)
    assert np.array_equal(np.unique(tr.samples[:50]), [0.87])
    assert np.array_equal(np.unique(tr.samples[50:100]), [2.34])
    assert np.array_equal(np.unique(tr.samples[100:150]), [1.58])
    assert np.array_equal(np.unique(tr.samples[150:]), [0.87])


@settings(max_examples=60, deadline=None)
@given(durs=st.lists(st.floats(1e-6, 1e-3), min_size=1, max_size=8), fs=st.sampled_from([54e3, 2e5, 5e5, 1e6]))
def test_sample_count(durs, fs):
    phases = [Phase(State(i % 4), d) for i, d in enumerate(durs)]
    tr = synthesize_trace(phases, P, fs, 0)
    assert len(tr) == round(sum(durs) * fs)


def test_long_network_expansion():
    flat = expand_phases([Phase.network(1000e-6)], 400e-6)
    assert [p.state for p in flat] == [S0, S1, S0, S1]
    assert sum(p.duration for p in flat) == pytest.approx(1000e-6)
    assert [p.state for p in expand_phases([Phase.network(50e-6)], 400e-6)] == [S0, S1]


def test_synthesis_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        synthesize_trace([Phase(S0, 0.0)], P, FS)
    with pytest.raises(InvalidInputError):
        synthesize_trace([Phase(S0, 1e-3)], P, 0)


def test_default_levels_are_extractable():
    assert PfsmParams().levels == (0.870, 1.36, 2.34, 1.58)
    assert PfsmParams().extractable()


# -- extraction -------------------------------------------------------------------

def test_two_level_step_noiseless():
    tr = PowerTrace(np.r_[np.full(300, 1.0), np.full(200, 2.0)], FS)
    segs = extract_power_states(tr)
    assert len(segs) == 2
    assert segs[0].mean_current == pytest.approx(1.0, abs=1e-12)
    assert segs[1].mean_current == pytest.approx(2.0, abs=1e-12)
    assert segs[0].interval[1] == pytest.approx(300 / FS)
    assert segs[1].interval == pytest.approx((300 / FS, 500 / FS))


def test_constant_trace_single_segment():
    tr = PowerTrace(np.full(1000, 0.87), FS)
    segs = extract_power_states(tr)
    assert len(segs) == 1
    assert segs[0].duration == pytest.approx(tr.duration)


def test_round_trip_four_states():
    phases = [Phase(s, 200e-6) for s in (S0, S2, S3, S1)]
    slack = (2 + 5) / FS
    for seed in range(20):
        segs = extract_power_states(synthesize_trace(phases, P, FS, seed))
        assert len(segs) == 4
        for seg, ph in zip(segs, phases):
            assert seg.mean_current == pytest.approx(P.level(ph.state), rel=0.01)
            assert abs(seg.duration - ph.duration) <= slack


def test_round_trip_monte_carlo_low_noise():
    sigma = 0.02 * P.min_gap()
    params = PfsmParams(*P.levels, network_period=P.network_period, noise_sigma=sigma)
    phases = honest_phases()
    plateaus = expand_phases(phases, params.network_period)
    expected = [p.state for p in plateaus]
    # the S0,S0 junction never shows as two plateaus
    merged = [s for i, s in enumerate(expected) if i == 0 or expected[i - 1] != s]
    for seed in range(100):
        segs = extract_power_states(synthesize_trace(phases, params, FS, seed))
        assert len(segs) == len(merged)
        for seg, state in zip(segs, merged):
            assert seg.mean_current == pytest.approx(params.level(state), rel=0.01)


def test_extraction_shift_invariant():
    phases = [Phase(s, 150e-6) for s in (S2, S3, S1, S0, S3)]
    tr = synthesize_trace(phases, quiet(P), FS)
    cfg = ExtractionConfig(threshold=1000.0)
    pad = 137
    base = extract_power_states(tr, cfg)
    shifted = extract_power_states(tr.prepend(P.i_idle, pad), cfg)
    dt = pad / FS
    assert len(shifted) == len(base) + 1
    for a, b in zip(base[1:], shifted[2:]):
        assert b.mean_current == pytest.approx(a.mean_current, abs=1e-12)
        assert b.interval[0] == pytest.approx(a.interval[0] + dt, abs=1e-12)
        assert b.interval[1] == pytest.approx(a.interval[1] + dt, abs=1e-12)
    assert shifted[1].interval[1] == pytest.approx(base[0].interval[1] + dt, abs=1e-12)


def test_duration_sum_bounded():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(20, 3000))
        tr = PowerTrace(rng.normal(1.0, 0.05, n) + np.repeat(rng.random(5), -(-n // 5))[:n], FS)
        segs = extract_power_states(tr)
        assert sum(s.duration for s in segs) <= tr.duration + 1e-15


def test_extraction_too_short():
    with pytest.raises(InvalidInputError):
        extract_power_states(PowerTrace(np.ones(4), FS))


def test_extractor_estimator_api():
    ext = PowerStateExtractor(min_segment=6)
    assert ext.get_params()["min_segment"] == 6
    twin = clone(ext)
    tr = synthesize_trace([Phase(S0, 1e-4), Phase(S2, 1e-4)], P, FS, 1)
    assert twin.fit().transform(tr) == ext.transform(tr)
    assert len(ext.fit_transform([tr, tr])) == 2


# -- classification and language ---------------------------------------------------

def _seg(mean):
    return PowerStateSegment(mean, (0.0, 1e-4), 10)


def test_classify_examples():
    labels = classify_states([_seg(0.87), _seg(2.00), _seg(1.58 * 1.05), _seg(1.36)], PfsmParams())
    assert labels == [S0, State.UNKNOWN, S3, S1]


def test_language_examples():
    assert validate_language([S0, S1, S0, S1, S0, S2, S3, S0, S0, S1])
    assert validate_language([S0, S1, S0, S2, S3, S0, S1])
    assert not validate_language([S0, S1, S0, S2, S0, S0, S1])
    assert not validate_language([S0, S1, S0, State.UNKNOWN, S2, S3, S0, S1])
    assert not validate_language([])
    assert not validate_language([S0, S2, S3, S0, S1])


def test_language_matches_regex_oracle():
    rng = np.random.default_rng(5)
    alphabet = [State.UNKNOWN, S0, S1, S2, S3]
    agree = 0
    positives = 0
    for i in range(10_000):
        if i % 2:
            # mutate a member string so positives are well represented
            reps = int(rng.integers(1, 4))
            word = [S0, S1] * reps + [S0, S2, S3, S0, S0, S1]
            word = [w for w in word for _ in range(int(rng.integers(1, 3)))]
            if rng.random() < 0.5:
                j = int(rng.integers(len(word)))
                word[j] = alphabet[int(rng.integers(5))]
            word = word[:20]
        else:
            word = [alphabet[int(k)] for k in rng.integers(0, 5, int(rng.integers(0, 21)))]
        ours = validate_language(word)
        positives += ours
        agree += ours == language_oracle([str(w) for w in word])
    assert agree == 10_000
    assert positives > 1000


# -- learning ---------------------------------------------------------------------

def _training(params, runs, seed):
    rng = np.random.default_rng(seed)
    traces = [synthesize_trace(honest_phases(hash_us=float(rng.uniform(600, 1200)),
                                             net_us=float(rng.uniform(500, 1500))), params, FS, rng)
              for _ in range(runs)]
    idle = synthesize_trace([Phase(S0, 2e-3)], params, FS, rng)
    return traces, idle


def test_learn_levels_within_one_percent():
    traces, idle = _training(P, 20, 3)
    learned = learn_pfsm(traces, idle_trace=idle)
    for got, want in zip(learned.levels, P.levels):
        assert got == pytest.approx(want, rel=0.01)
    assert learned.noise_sigma == pytest.approx(P.noise_sigma, rel=0.1)
    assert learned.network_period == pytest.approx(P.network_period, rel=0.25)


def test_learn_exact_when_noiseless():
    traces, idle = _training(quiet(P), 5, 4)
    learned = learn_pfsm(traces, idle_trace=idle)
    assert learned.levels == pytest.approx(P.levels, abs=1e-12)


def test_learn_all_idle_fails():
    traces = [synthesize_trace([Phase(S0, 1e-3)], P, FS, s) for s in range(5)]
    with pytest.raises(LearningFailure):
        learn_pfsm(traces)
    with pytest.raises(LearningFailure):
        learn_pfsm([])


def test_learner_estimator():
    traces, idle = _training(P, 10, 8)
    learner = PfsmLearner().fit(traces, idle_trace=idle)
    probe = synthesize_trace(honest_phases(), P, FS, 99)
    assert validate_language(learner.predict(probe))


# -- trace files ------------------------------------------------------------------

def test_trace_file_round_trip(tmp_path):
    tr = synthesize_trace(honest_phases(), P, FS, 1)
    path = tmp_path / "t.pwtr"
    write_trace(path, tr)
    back = read_trace(path)
    assert back.sampling_rate == FS
    assert np.array_equal(back.samples, tr.samples.astype(np.float32).astype(float))
    blob = path.read_bytes()
    assert blob[:4] == b"PWTR" and blob[4] == 1


def test_trace_file_errors():
    blob = trace_to_bytes(PowerTrace(np.ones(10), FS))
    with pytest.raises(BadMagicError):
        trace_from_bytes(b"XXXX" + blob[4:])
    with pytest.raises(BadVersionError):
        trace_from_bytes(blob[:4] + b"\x09" + blob[5:])
    with pytest.raises(TruncatedError):
        trace_from_bytes(blob[:-2])
    with pytest.raises(TruncatedError):
        trace_from_bytes(blob[:10])
    with pytest.raises(FormatError, match="offset"):
        trace_from_bytes(blob + b"\x00")
    with pytest.raises(FormatError, match="no samples"):
        trace_from_bytes(trace_to_bytes(PowerTrace(np.ones(0), FS)))
