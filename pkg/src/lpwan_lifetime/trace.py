"""Power-trace ingestion: parse sampled current/voltage, segment into states,
and derive a power profile and activation cycle.

Trace CSV format::

    # comment lines are ignored
    time_s,current_a,voltage_v[,state]
    0.000,1.0e-6,3.0,idle

Each sample owns the interval up to the next sample; the last sample owns
the mean sampling interval.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .duty_cycle import STATES, ActivationCycle, PowerProfile, TrafficModel
from .errors import (EmptyTraceError, InsufficientTraceError, MissingLabelError,
                     SequencingError, TraceParseError, DomainError)

HEADER = ("time_s", "current_a", "voltage_v")
LABELED_HEADER = HEADER + ("state",)
THRESHOLD_ORDER = ("idle", "proc", "rx", "tx")
MIN_SAMPLES_PER_STATE = 10

_SPAN_RTOL = 1e-9


class SamplingWarning(UserWarning):
    """Sampling too coarse to resolve the shortest state."""


class TruncationWarning(UserWarning):
    """Trailing partial activation cycle dropped from the trace."""


@dataclass(frozen=True)
class TraceSample:
    time_s: float
    current_a: float
    voltage_v: float
    state_label: Optional[str] = None

    @property
    def power_w(self) -> float:
        return self.current_a * self.voltage_v


@dataclass(frozen=True)
class StateStats:
    total_duration_s: float
    mean_power_w: float
    sample_count: int


@dataclass(frozen=True)
class StateSegmentation:
    states: dict  # state name -> StateStats
    trace_span_s: float
    max_sample_gap_s: float

    def __getitem__(self, state: str) -> StateStats:
        return self.states[state]

    def to_dict(self) -> dict:
        return {
            "trace_span_s": self.trace_span_s,
            "max_sample_gap_s": self.max_sample_gap_s,
            "states": {s: {"total_duration_s": st.total_duration_s,
                           "mean_power_w": st.mean_power_w,
                           "sample_count": st.sample_count}
                       for s, st in self.states.items()},
        }


def _float(text: str, column: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise TraceParseError(line, f"{column}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise TraceParseError(line, f"{column}: non-finite value {text!r}")
    return value


def parse_trace(source: TextIO) -> list[TraceSample]:
    """Read a trace CSV stream into samples, validating ranges and ordering."""
    header = None
    samples: list[TraceSample] = []
    reader = csv.reader(source)
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if header is None:
            if tuple(cells) not in (HEADER, LABELED_HEADER):
                raise TraceParseError(
                    line, f"expected header {','.join(HEADER)}[,state], got {','.join(cells)!r}")
            header = tuple(cells)
            continue
        if len(cells) != len(header):
            raise TraceParseError(line, f"expected {len(header)} columns, got {len(cells)}")
        t = _float(cells[0], "time_s", line)
        current = _float(cells[1], "current_a", line)
        voltage = _float(cells[2], "voltage_v", line)
        if t < 0:
            raise TraceParseError(line, f"time_s must be >= 0, got {t!r}")
        if current < 0:
            raise TraceParseError(line, f"current_a must be >= 0, got {current!r}")
        if voltage <= 0:
            raise TraceParseError(line, f"voltage_v must be > 0, got {voltage!r}")
        label = None
        if len(header) == 4:
            label = cells[3]
            if label not in STATES:
                raise TraceParseError(line, f"state must be one of {'|'.join(STATES)}, got {label!r}")
        if samples and t <= samples[-1].time_s:
            raise SequencingError(line, f"time_s {t!r} does not increase")
        samples.append(TraceSample(t, current, voltage, label))
    if header is None:
        raise EmptyTraceError("trace has no header and no samples")
    if not samples:
        raise EmptyTraceError("trace contains no samples")
    return samples


def write_trace(samples: Iterable[TraceSample], stream: TextIO, labeled: bool = True) -> None:
    stream.write(",".join(LABELED_HEADER if labeled else HEADER) + "\n")
    for s in samples:
        row = f"{s.time_s!r},{s.current_a!r},{s.voltage_v!r}"
        stream.write(row + (f",{s.state_label}\n" if labeled else "\n"))


def _aggregate(samples: Sequence[TraceSample], labels: Sequence[str]) -> StateSegmentation:
    if len(samples) < 2:
        raise EmptyTraceError("at least two samples are needed to attribute durations")
    times = np.array([s.time_s for s in samples])
    power = np.array([s.power_w for s in samples])
    gaps = np.diff(times)
    durations = np.append(gaps, (times[-1] - times[0]) / (len(times) - 1))
    labels = np.asarray(labels)
    stats = {}
    for state in STATES:
        mask = labels == state
        total = float(durations[mask].sum())
        energy = float((durations[mask] * power[mask]).sum())
        mean = energy / total if total > 0 else 0.0
        stats[state] = StateStats(total, mean, int(mask.sum()))
    return StateSegmentation(stats, float(durations.sum()), float(durations.max()))


def segment_by_label(samples: Sequence[TraceSample]) -> StateSegmentation:
    labels = []
    for i, s in enumerate(samples):
        if s.state_label is None:
            raise MissingLabelError(f"sample {i} at t={s.time_s!r} has no state label")
        labels.append(s.state_label)
    return _aggregate(samples, labels)


def classify_current(current_a: float, thresholds: Sequence[float]) -> str:
    """Band of a current value; a value equal to a threshold goes to the upper band."""
    band = 0
    for limit in thresholds:
        if current_a >= limit:
            band += 1
    return THRESHOLD_ORDER[band]


def _check_thresholds(thresholds: Sequence[float]) -> None:
    if len(thresholds) != 3:
        raise DomainError(f"exactly three thresholds are required, got {len(thresholds)}")
    t1, t2, t3 = thresholds
    if not (t1 < t2 < t3):
        raise DomainError(f"thresholds must be strictly ascending, got {list(thresholds)}")


def segment_by_threshold(samples: Sequence[TraceSample],
                         thresholds: Sequence[float]) -> StateSegmentation:
    """Segment by current level: below t1 idle, then proc, rx, and tx at or above t3."""
    _check_thresholds(thresholds)
    return _aggregate(samples, [classify_current(s.current_a, thresholds) for s in samples])


def profile_from_segmentation(seg: StateSegmentation,
                              traffic: TrafficModel) -> tuple[PowerProfile, ActivationCycle]:
    """Powers from the per-state means, fractions from the per-state time shares."""
    period = traffic.t_activation
    span = seg.trace_span_s
    if span < period * (1 - _SPAN_RTOL):
        raise InsufficientTraceError(
            f"trace spans {span} s, shorter than one {traffic.name} measurement cycle ({period} s)")
    n_cycles = math.floor(span / period * (1 + _SPAN_RTOL))
    if abs(span - n_cycles * period) > _SPAN_RTOL * span:
        warnings.warn(f"trace span {span} s is not a whole number of {period} s cycles",
                      TruncationWarning, stacklevel=2)

    active = [seg[s].total_duration_s for s in STATES if seg[s].total_duration_s > 0]
    shortest_per_cycle = min(active) / max(n_cycles, 1)
    if seg.max_sample_gap_s * MIN_SAMPLES_PER_STATE > shortest_per_cycle * (1 + _SPAN_RTOL):
        warnings.warn(
            f"largest sample gap {seg.max_sample_gap_s} s gives fewer than "
            f"{MIN_SAMPLES_PER_STATE} samples in the shortest state ({shortest_per_cycle} s)",
            SamplingWarning, stacklevel=2)

    total = sum(seg[s].total_duration_s for s in STATES)
    profile = PowerProfile(seg["tx"].mean_power_w, seg["rx"].mean_power_w,
                           seg["proc"].mean_power_w, seg["idle"].mean_power_w)
    cycle = ActivationCycle(period, seg["tx"].total_duration_s / total,
                            seg["rx"].total_duration_s / total,
                            seg["proc"].total_duration_s / total)
    return profile, cycle


def truncate_to_cycles(samples: Sequence[TraceSample], period: float) -> list[TraceSample]:
    """Drop samples past the last whole activation cycle (warns when anything is dropped)."""
    samples = list(samples)
    if len(samples) < 2:
        return samples
    t0 = samples[0].time_s
    mean_gap = (samples[-1].time_s - t0) / (len(samples) - 1)
    span = samples[-1].time_s - t0 + mean_gap
    n_cycles = math.floor(span / period * (1 + _SPAN_RTOL))
    if n_cycles < 1 or span <= n_cycles * period * (1 + _SPAN_RTOL):
        return samples
    end = t0 + n_cycles * period
    kept = [s for s in samples if s.time_s < end - _SPAN_RTOL * period]
    warnings.warn(f"dropped {len(samples) - len(kept)} samples after the last whole "
                  f"{period} s cycle", TruncationWarning, stacklevel=2)
    return kept


def measure(samples: Sequence[TraceSample], traffic: TrafficModel,
            thresholds: Optional[Sequence[float]] = None
            ) -> tuple[PowerProfile, ActivationCycle, StateSegmentation]:
    """Full ingestion pipeline on parsed samples."""
    samples = truncate_to_cycles(samples, traffic.t_activation)
    if thresholds is None:
        seg = segment_by_label(samples)
    else:
        seg = segment_by_threshold(samples, thresholds)
    profile, cycle = profile_from_segmentation(seg, traffic)
    return profile, cycle, seg


def synthesize_trace(profile: PowerProfile, cycle: ActivationCycle, sample_rate_hz: float,
                     n_cycles: int = 1, voltage_v: float = 3.0,
                     t0: float = 0.0) -> list[TraceSample]:
    """Uniformly sampled labeled trace of ``n_cycles`` cycles (proc, tx, rx, idle order).

    Per-state durations are reproduced exactly when every state boundary
    falls on the sampling grid.
    """
    if sample_rate_hz <= 0 or n_cycles < 1 or voltage_v <= 0:
        raise DomainError("sample_rate_hz, n_cycles and voltage_v must be positive")
    order = ("proc", "tx", "rx", "idle")
    period = cycle.t_activation
    bounds = np.cumsum([cycle.duration(s) for s in order[:3]])
    per_cycle = round(period * sample_rate_hz)
    samples = []
    for n in range(n_cycles):
        for k in range(per_cycle):
            offset = k / sample_rate_hz
            # tolerate rounding at grid-aligned boundaries
            idx = int(np.searchsorted(bounds, offset + 1e-9 / sample_rate_hz, side="right"))
            state = order[idx]
            current = profile.power(state) / voltage_v
            samples.append(TraceSample(t0 + n * period + offset, current, voltage_v, state))
    return samples
