import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foldkit.sensing import (
    REFERENCE_STATS,
    ClassifierConfig,
    DegenerateSNRError,
    Event,
    InsufficientSamplesError,
    SensorStream,
    StateSequence,
    classify,
    classify_hall,
    classify_touch,
    compute_baseline,
    events_csv,
    log_csv,
    read_log,
    schedule_labels,
    snr,
    snr_from_stats,
    synth_stream,
    tap_accuracy,
)

RATE = 50.0
DOCK = [("inactive", 2.0), ("active", 3.0), ("inactive", 2.0), ("active", 1.5), ("inactive", 2.0)]


def hall(samples, rate=RATE):
    return SensorStream("hall", rate, samples)


def touch(samples, rate=RATE):
    return SensorStream("touch", rate, samples)


def onsets_at(times, total=None):
    return StateSequence(np.zeros(1, bool), tuple(Event(t, t + 0.05) for t in times))


class TestTypes:
    def test_stream_validation(self):
        with pytest.raises(ValueError):
            SensorStream("light", 10, [1.0])
        with pytest.raises(ValueError):
            SensorStream("hall", 0, [1.0])
        with pytest.raises(ValueError):
            SensorStream("hall", 10, [])
        s = hall([1, 2, 3])
        with pytest.raises(ValueError):
            s.samples[0] = 5

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ClassifierConfig(baseline_window=0)
        with pytest.raises(ValueError):
            ClassifierConfig(hall_threshold=0)
        with pytest.raises(ValueError):
            ClassifierConfig(debounce_gap=-0.1)
        with pytest.raises(ValueError):
            ClassifierConfig(min_event=-0.1)


class TestBaseline:
    def test_examples(self):
        assert compute_baseline(hall([7.0] * 30)) == 7.0
        assert compute_baseline(hall(np.arange(40.0))) == 9.5
        assert compute_baseline(hall([3.0, 9.0]), 1) == 3.0

    def test_short_stream(self):
        with pytest.raises(InsufficientSamplesError):
            compute_baseline(hall([1.0] * 5))


class TestClassify:
    @pytest.mark.parametrize("unit", ["hall_unit_a", "hall_unit_b"])
    def test_docking_interval(self, unit):
        sched = [("inactive", 2.0), ("active", 3.0), ("inactive", 2.0)]
        stream = synth_stream(sched, REFERENCE_STATS[unit], RATE, seed=11)
        seq = classify_hall(stream)
        assert len(seq.events) >= 1
        assert seq.events[0].onset == pytest.approx(2.0, abs=0.1)
        truth = schedule_labels(sched, RATE, "active")
        assert np.mean(seq.active == truth) >= 0.98

    def test_all_zero(self):
        seq = classify_hall(hall(np.zeros(100)))
        assert seq.events == () and not seq.active.any()

    def test_touch_examples(self):
        assert not classify_touch(touch([10.57] * 50)).active.any()
        assert classify_touch(touch([2.23] * 50)).active.all()
        assert not classify_touch(touch([6.4] * 50)).active.any()

    def test_kind_checks(self):
        with pytest.raises(ValueError):
            classify_hall(touch([1.0] * 30))
        with pytest.raises(ValueError):
            classify_touch(hall([1.0] * 30))

    def test_dispatch(self):
        s = synth_stream(DOCK, REFERENCE_STATS["hall_unit_b"], RATE, seed=1)
        assert classify(s) == classify_hall(s)
        assert classify(s) != classify_hall(s.with_samples(np.zeros(len(s))))

    def test_open_event_at_end(self):
        stream = hall([0.0] * 25 + [100.0] * 5)
        seq = classify_hall(stream)
        assert seq.events == (Event(0.5, None),)

    def test_debounce_bridges_short_gaps(self):
        x = np.zeros(100)
        x[30:40] = 100
        x[43:50] = 100  # 3-sample (0.06 s) dropout
        x[60:70] = 100  # 10-sample gap is kept
        seq = classify_hall(hall(x))
        assert [e.onset for e in seq.events] == [0.6, 1.2]
        assert seq.active[40:43].all()
        no_debounce = classify_hall(hall(x), ClassifierConfig(debounce_gap=0))
        assert len(no_debounce.events) == 3

    def test_single_sample_glitch_dropped(self):
        x = np.zeros(100)
        x[50] = 100
        assert classify_hall(hall(x)).events == ()
        assert not classify_hall(hall(x)).active.any()
        kept = classify_hall(hall(x), ClassifierConfig(min_event=0))
        assert kept.events == (Event(1.0, 1.02),)

    @pytest.mark.parametrize("unit", ["hall_unit_a", "hall_unit_b"])
    def test_one_docking_event_across_seeds(self, unit):
        sched = [("inactive", 2.0), ("active", 3.0), ("inactive", 2.0)]
        counts = [len(classify_hall(synth_stream(sched, REFERENCE_STATS[unit], RATE, seed=k)).events)
                  for k in range(20)]
        assert counts == [1] * 20

    @given(st.lists(st.booleans(), min_size=25, max_size=200), st.floats(0, 0.3), st.floats(0, 0.2))
    def test_events_alternate_and_respect_gap(self, raw, gap, min_event):
        x = np.where(raw, 100.0, 0.0)
        x[:20] = 0.0
        seq = classify_hall(hall(x), ClassifierConfig(debounce_gap=gap, min_event=min_event))
        ev = seq.events
        for e in ev[:-1]:
            assert e.release is not None and e.release > e.onset
        for a, b in zip(ev, ev[1:]):
            assert b.onset - a.release >= gap - 1e-12
        for e in ev:
            if e.release is not None:
                assert e.release - e.onset >= min_event - 1e-12
        # per-sample state agrees with events
        times = np.arange(len(x)) / RATE
        rebuilt = np.zeros(len(x), bool)
        for e in ev:
            rebuilt |= (times >= e.onset) & (times < (e.release if e.release is not None else np.inf))
        assert np.array_equal(rebuilt, seq.active)

    @given(st.integers(0, 1000), st.floats(-1e3, 1e3))
    def test_offset_invariance(self, seed, offset):
        s = synth_stream(DOCK, REFERENCE_STATS["hall_unit_a"], RATE, seed=seed)
        a = classify_hall(s)
        b = classify_hall(s.with_samples(s.samples + offset))
        assert np.array_equal(a.active, b.active)

    @given(st.integers(0, 1000))
    def test_sign_flip_invariance(self, seed):
        s = synth_stream(DOCK, REFERENCE_STATS["hall_unit_b"], RATE, seed=seed)
        assert np.array_equal(classify_hall(s).active, classify_hall(s.with_samples(-s.samples)).active)

    @pytest.mark.parametrize("unit,kind", [("hall_unit_a", "hall"), ("hall_unit_b", "hall"), ("touch", "touch")])
    @pytest.mark.parametrize("rate", [20.0, 50.0, 200.0])
    def test_misclassification_below_two_percent(self, unit, kind, rate):
        rates = []
        for seed in range(5):
            s = synth_stream(DOCK, REFERENCE_STATS[unit], rate, seed=seed, kind=kind)
            truth = schedule_labels(DOCK, rate, "active")
            rates.append(np.mean(classify(s).active != truth))
        assert max(rates) < 0.02


class TestSNR:
    def test_touch_statistics(self):
        rep = snr_from_stats(2.23, 10.57, 0.82)
        assert rep.snr_db == pytest.approx(20.15, abs=0.005)

    def test_unity(self):
        assert snr_from_stats(1.0, 0.0, 1.0).snr_db == 0.0

    def test_hall_units(self):
        a = REFERENCE_STATS["hall_unit_a"]
        b = REFERENCE_STATS["hall_unit_b"]
        assert snr_from_stats(a["active"][0], a["inactive"][0], a["inactive"][1]).snr_db == pytest.approx(20.78, abs=0.005)
        assert snr_from_stats(b["active"][0], b["inactive"][0], b["inactive"][1]).snr_db == pytest.approx(25.96, abs=0.005)

    def test_from_stream_matches_formula(self):
        x = np.array([10.0, 11.0, 9.0, 10.0, 2.0, 3.0])
        states = StateSequence(np.array([0, 0, 0, 0, 1, 1], bool), ())
        rep = snr(touch(x), states)
        want = 20 * math.log10(abs(2.5 - 10.0) / np.std([10, 11, 9, 10], ddof=1))
        assert rep.snr_db == pytest.approx(want, rel=1e-12)
        assert rep.mu_active == 2.5 and rep.mu_inactive == 10.0

    @given(st.integers(0, 500), st.floats(0.01, 100))
    def test_scale_covariance(self, seed, c):
        s = synth_stream(DOCK, REFERENCE_STATS["touch"], RATE, seed=seed, kind="touch")
        states = classify(s)
        assert snr(s.with_samples(s.samples * c), states).snr_db == pytest.approx(snr(s, states).snr_db, abs=1e-9)

    def test_degenerate(self):
        x = np.array([10.0, 10.0, 10.0, 2.0])
        states = StateSequence(np.array([0, 0, 0, 1], bool), ())
        with pytest.raises(DegenerateSNRError):
            snr(touch(x), states)
        with pytest.raises(DegenerateSNRError):
            snr(touch(x), StateSequence(np.zeros(4, bool), ()))
        with pytest.raises(DegenerateSNRError):
            snr_from_stats(1.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            snr(touch(x), StateSequence(np.zeros(3, bool), ()))


class TestTaps:
    def test_perfect(self):
        truth = np.arange(0, 60, 60 / 50)
        assert tap_accuracy(onsets_at(truth), 50, 60) == 100.0

    def test_extra_detections(self):
        truth = list(np.arange(150) * 0.5)
        extra = truth + [0.25, 10.25, 20.25]
        assert tap_accuracy(onsets_at(sorted(extra)), 120, 75) == pytest.approx(98.04, abs=0.005)

    def test_none_detected(self):
        assert tap_accuracy(onsets_at([]), 60, 10) == 0.0

    def test_window_edge(self):
        assert tap_accuracy(onsets_at([0.15, 1.0]), 60, 2) == 100.0
        assert tap_accuracy(onsets_at([0.16, 1.0]), 60, 2) == 50.0

    def test_bad_bpm(self):
        with pytest.raises(ValueError):
            tap_accuracy(onsets_at([]), 0, 10)

    def test_synth_determinism_and_stats(self):
        a = synth_stream(DOCK, REFERENCE_STATS["hall_unit_a"], RATE, seed=5)
        b = synth_stream(DOCK, REFERENCE_STATS["hall_unit_a"], RATE, seed=5)
        assert np.array_equal(a.samples, b.samples)
        flat = synth_stream([("inactive", 1.0), ("active", 1.0)], {"inactive": (1.0, 0.0), "active": (4.0, 0.0)}, 10, 0)
        assert flat.samples.tolist() == [1.0] * 10 + [4.0] * 10
        seg = a.samples[: int(2.0 * RATE)]
        mu, sigma = REFERENCE_STATS["hall_unit_a"]["inactive"]
        assert abs(seg.mean() - mu) < 3 * sigma / math.sqrt(seg.size)

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            synth_stream([("x", 1.0)], {"x": (0.0, -1.0)}, 10, 0)


class TestFiles:
    def test_log_round_trip(self):
        s = synth_stream(DOCK, REFERENCE_STATS["touch"], RATE, seed=2, kind="touch")
        back = read_log(io.StringIO(log_csv(s)), "touch")
        assert np.array_equal(back.samples, s.samples)
        assert back.sample_rate == pytest.approx(RATE, rel=1e-9)

    def test_events_csv(self):
        seq = classify_hall(hall([0.0] * 25 + [100.0] * 5))
        assert events_csv(seq).splitlines() == ["onset_t,release_t,kind", "0.5,,hall"]

    @pytest.mark.parametrize("text", ["", "a,b\n1,2\n", "t,value\n", "t,value\n0,1\n0,2\n",
                                      "t,value\n0,x\n", "t,value\n0,1,2\n", "t,value\n0,1\n"])
    def test_bad_logs(self, text):
        with pytest.raises(ValueError):
            read_log(io.StringIO(text), "hall")

    def test_explicit_rate(self):
        s = read_log(io.StringIO("t,value\n5,1\n"), "hall", sample_rate=10)
        assert s.t0 == 5 and s.sample_rate == 10
