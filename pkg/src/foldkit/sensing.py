"""Threshold classification of Hall (docking) and capacitive touch streams."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

KINDS = ("hall", "touch")
LOG_HEADER = ("t", "value")
EVENT_HEADER = ("onset_t", "release_t", "kind")


class InsufficientSamplesError(ValueError):
    pass


class DegenerateSNRError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SensorStream:
    kind: str
    sample_rate: float
    samples: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be > 0")
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    def with_samples(self, samples) -> "SensorStream":
        return SensorStream(self.kind, self.sample_rate, samples, self.t0)


@dataclass(frozen=True)
class ClassifierConfig:
    baseline_window: int = 20
    hall_threshold: float = 24.954
    touch_threshold: float = 6.4
    debounce_gap: float = 0.1
    min_event: float = 0.05  # s, shorter active runs are treated as glitches

    def __post_init__(self):
        if int(self.baseline_window) != self.baseline_window or self.baseline_window < 1:
            raise ValueError("baseline_window must be a positive integer")
        if not (self.hall_threshold > 0 and self.touch_threshold > 0):
            raise ValueError("thresholds must be > 0")
        if not self.debounce_gap >= 0:
            raise ValueError("debounce_gap must be >= 0")
        if not self.min_event >= 0:
            raise ValueError("min_event must be >= 0")


class Event(NamedTuple):
    onset: float
    release: Optional[float]  # None while still active at the end of the stream


@dataclass(frozen=True, eq=False)
class StateSequence:
    """Per-sample activity after debouncing, and the events it implies."""

    active: np.ndarray
    events: Tuple[Event, ...]
    kind: str = ""

    def __eq__(self, other):
        if not isinstance(other, StateSequence):
            return NotImplemented
        return (self.kind == other.kind and self.events == other.events
                and np.array_equal(self.active, other.active))

    @property
    def onsets(self) -> List[float]:
        return [e.onset for e in self.events]


@dataclass(frozen=True)
class SNRReport:
    mu_active: float
    mu_inactive: float
    sigma_noise: float
    snr_db: float


def compute_baseline(stream: SensorStream, n: int = 20) -> float:
    if n < 1:
        raise ValueError("baseline window must be >= 1")
    if len(stream) < n:
        raise InsufficientSamplesError(f"baseline needs {n} samples, stream has {len(stream)}")
    return float(np.mean(stream.samples[:n]))


def _debounce(raw: np.ndarray, times: np.ndarray, sample_rate: float, gap: float,
              min_event: float = 0.0) -> StateSequence:
    """Bridge inactive stretches shorter than ``gap`` seconds, then drop active runs shorter than ``min_event``."""
    active = raw.copy()
    idx = np.flatnonzero(np.diff(np.concatenate([[0], raw.astype(np.int8), [0]])))
    runs = list(zip(idx[::2], idx[1::2]))  # [start, stop) of active runs
    merged: List[List[int]] = []
    for start, stop in runs:
        # inactive stretch between the previous release and this onset
        if merged and (start - merged[-1][1]) / sample_rate < gap:
            active[merged[-1][1]:start] = True
            merged[-1][1] = stop
        else:
            merged.append([start, stop])
    kept = []
    for start, stop in merged:
        if (stop - start) / sample_rate < min_event:
            active[start:stop] = False
        else:
            kept.append((start, stop))
    merged = kept
    n = raw.size
    events = tuple(
        Event(float(times[a]), float(times[b]) if b < n else None) for a, b in merged
    )
    return StateSequence(active=active, events=events)


def classify_hall(stream: SensorStream, config: ClassifierConfig = ClassifierConfig()) -> StateSequence:
    """Docked when the deflection from the start-up baseline exceeds the threshold in magnitude."""
    if stream.kind != "hall":
        raise ValueError(f"expected a hall stream, got {stream.kind!r}")
    base = compute_baseline(stream, config.baseline_window)
    raw = np.abs(stream.samples - base) > config.hall_threshold
    seq = _debounce(raw, stream.times, stream.sample_rate, config.debounce_gap, config.min_event)
    return StateSequence(seq.active, seq.events, "hall")


def classify_touch(stream: SensorStream, config: ClassifierConfig = ClassifierConfig()) -> StateSequence:
    """Touched when the filtered count drops strictly below the threshold."""
    if stream.kind != "touch":
        raise ValueError(f"expected a touch stream, got {stream.kind!r}")
    raw = stream.samples < config.touch_threshold
    seq = _debounce(raw, stream.times, stream.sample_rate, config.debounce_gap, config.min_event)
    return StateSequence(seq.active, seq.events, "touch")


def classify(stream: SensorStream, config: ClassifierConfig = ClassifierConfig()) -> StateSequence:
    return classify_hall(stream, config) if stream.kind == "hall" else classify_touch(stream, config)


def snr(stream: SensorStream, states: StateSequence) -> SNRReport:
    """Separation of the state means over the spread of the inactive state, in dB."""
    active = np.asarray(states.active, dtype=bool)
    if active.shape != stream.samples.shape:
        raise ValueError("state sequence does not match the stream length")
    on, off = stream.samples[active], stream.samples[~active]
    if on.size == 0 or off.size == 0:
        raise DegenerateSNRError("both active and inactive samples are required")
    if off.size < 2:
        raise DegenerateSNRError("need at least two inactive samples for a noise estimate")
    return snr_from_stats(float(on.mean()), float(off.mean()), float(off.std(ddof=1)))


def snr_from_stats(mu_active: float, mu_inactive: float, sigma_noise: float) -> SNRReport:
    if not sigma_noise > 0:
        raise DegenerateSNRError("inactive-state standard deviation is zero")
    diff = abs(mu_active - mu_inactive)
    if diff == 0:
        raise DegenerateSNRError("state means coincide")
    return SNRReport(mu_active, mu_inactive, sigma_noise, 20 * math.log10(diff / sigma_noise))


def tap_truth(bpm: float, duration_s: float, start: float = 0.0) -> np.ndarray:
    if not bpm > 0:
        raise ValueError("bpm must be > 0")
    n = int(round(duration_s * bpm / 60))
    return start + np.arange(n) * (60.0 / bpm)


def tap_accuracy(detected: StateSequence, bpm: float, duration_s: float, window: float = 0.15,
                 start: float = 0.0) -> float:
    """Percent of metronome taps matched by a detected onset within +/- window.

    Extra detections count against the score: matched / max(truth, detected).
    """
    truth = tap_truth(bpm, duration_s, start)
    onsets = sorted(detected.onsets)
    total = max(len(truth), len(onsets))
    if total == 0:
        return 100.0
    matched = 0
    k = 0
    for t in truth:
        while k < len(onsets) and onsets[k] < t - window:
            k += 1
        if k < len(onsets) and abs(onsets[k] - t) <= window:
            matched += 1
            k += 1
    return 100.0 * matched / total


def synth_stream(
    schedule: Sequence[Tuple[str, float]],
    stats: Mapping[str, Tuple[float, float]],
    sample_rate: float,
    seed: int,
    kind: str = "hall",
) -> SensorStream:
    """Gaussian samples, segment by segment, from per-state (mean, std)."""
    rng = np.random.default_rng(seed)
    parts = []
    for state, duration in schedule:
        mu, sigma = stats[state]
        if sigma < 0:
            raise ValueError("standard deviation must be >= 0")
        n = int(round(duration * sample_rate))
        parts.append(mu + sigma * rng.standard_normal(n))
    return SensorStream(kind, sample_rate, np.concatenate(parts))


def schedule_labels(schedule: Sequence[Tuple[str, float]], sample_rate: float, active_state: str) -> np.ndarray:
    """Ground-truth activity per sample for a synth schedule."""
    return np.concatenate([
        np.full(int(round(d * sample_rate)), state == active_state) for state, d in schedule
    ])


# -- CSV ---------------------------------------------------------------------------


def read_log(source, kind: str, sample_rate: Optional[float] = None) -> SensorStream:
    """Load a ``t,value`` log; the rate is taken from the median time step unless given."""
    text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != LOG_HEADER:
        raise ValueError(f"expected header t,value, got {header!r}")
    t, v = [], []
    for n, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ValueError(f"line {n}: expected 2 fields")
        try:
            t.append(float(row[0]))
            v.append(float(row[1]))
        except ValueError:
            raise ValueError(f"line {n}: non-numeric value") from None
    if not v:
        raise ValueError("log has no samples")
    t_arr = np.array(t)
    if t_arr.size > 1 and np.any(np.diff(t_arr) <= 0):
        raise ValueError("log times must be strictly increasing")
    if sample_rate is None:
        if t_arr.size < 2:
            raise ValueError("cannot infer sample rate from a single sample")
        sample_rate = 1.0 / float(np.median(np.diff(t_arr)))
    return SensorStream(kind, sample_rate, np.array(v), t0=float(t_arr[0]))


def log_csv(stream: SensorStream) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LOG_HEADER)
    for t, v in zip(stream.times, stream.samples):
        w.writerow([repr(float(t)), repr(float(v))])
    return buf.getvalue()


def events_csv(states: StateSequence) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EVENT_HEADER)
    for e in states.events:
        w.writerow([repr(e.onset), "" if e.release is None else repr(e.release), states.kind])
    return buf.getvalue()


# (mean, std) per state for the characterized docking sensors and touch pads
REFERENCE_STATS: Dict[str, Dict[str, Tuple[float, float]]] = {
    "hall_unit_a": {"inactive": (-3.676, 7.602), "active": (79.504, 34.666)},
    "hall_unit_b": {"inactive": (-0.152, 6.744), "active": (-134.125, 40.758)},
    "touch": {"inactive": (10.57, 0.82), "active": (2.23, 0.94)},
}
