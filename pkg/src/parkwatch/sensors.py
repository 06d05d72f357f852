"""Sensor failure auditing, distribution summaries, outlier labeling,
smoothing, and chemical correlations.

A "time slot" is an exact (monitor, timestamp) pair: a healthy slot records
all four chemicals, so any slot with one to three readings is a recording
failure listing the absent chemicals. High readings are labeled with a
deterministic Tukey fence (Q3 + k*IQR) guarded by an absolute ppm floor,
replacing the interactive brushing the analysis was originally done with.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum

import numpy as np

from .errors import DuplicateReadingError
from .ingest import CHEMICALS, Chemical, ChemicalReading


@dataclass(frozen=True)
class FailureEvent:
    monitor: int
    timestamp: datetime
    missing: tuple[Chemical, ...]  # non-empty strict subset of the four


class Label(Enum):
    NORMAL = "Normal"
    HIGH = "High"


@dataclass(frozen=True)
class ReadingLabel:
    monitor: int
    chemical: Chemical
    timestamp: datetime
    ppm: float
    label: Label
    small_group: bool = False  # group too small for a fence; labeled Normal


@dataclass(frozen=True)
class DistributionSummary:
    monitor: int
    chemical: Chemical
    q0: float
    q25: float
    q50: float
    q75: float
    q100: float
    count: int


@dataclass(frozen=True)
class CorrelationMatrix:
    monitor: int
    chemicals: tuple[Chemical, ...]
    r: np.ndarray  # (4, 4) Pearson r, NaN where undefined
    defined: np.ndarray  # (4, 4) bool


def audit_failures(readings: list[ChemicalReading]) -> list[FailureEvent]:
    """One event per (monitor, timestamp) slot missing 1-3 chemicals.

    Raises DuplicateReadingError if any (monitor, timestamp, chemical)
    appears more than once.
    """
    slots: dict[tuple[int, datetime], set[Chemical]] = {}
    duplicates = []
    for r in readings:
        present = slots.setdefault((r.monitor, r.timestamp), set())
        if r.chemical in present:
            duplicates.append((r.monitor, r.timestamp, r.chemical.value))
        present.add(r.chemical)
    if duplicates:
        raise DuplicateReadingError(duplicates)
    events = []
    for (monitor, ts) in sorted(slots, key=lambda key: (key[0], key[1])):
        present = slots[(monitor, ts)]
        if len(present) == len(CHEMICALS):
            continue
        missing = tuple(c for c in CHEMICALS if c not in present)
        events.append(FailureEvent(monitor, ts, missing))
    return events


def quantile_summary(readings: list[ChemicalReading]) -> list[DistributionSummary]:
    """Empirical quartiles per (monitor, chemical) group, linear interpolation."""
    groups: dict[tuple[int, Chemical], list[float]] = {}
    for r in readings:
        groups.setdefault((r.monitor, r.chemical), []).append(r.ppm)
    out = []
    for monitor, chemical in sorted(groups, key=lambda k: (k[0], k[1].value)):
        values = np.asarray(groups[(monitor, chemical)], dtype=np.float64)
        q = np.percentile(values, [0, 25, 50, 75, 100])
        out.append(DistributionSummary(monitor, chemical, *map(float, q), count=values.size))
    return out


def tukey_fence(values: np.ndarray, k: float, floor_ppm: float) -> float:
    """Upper outlier fence max(Q3 + k*IQR, floor), with a fallback of
    max(10*median, floor) when the IQR collapses to zero."""
    q1, q3 = np.percentile(values, [25, 75])
    iqr = q3 - q1
    if iqr <= 0.0:
        return max(10.0 * float(np.median(values)), floor_ppm)
    return max(float(q3 + k * iqr), floor_ppm)


def label_high_values(
    readings: list[ChemicalReading],
    k: float = 3.0,
    floor_ppm: float = 10.0,
) -> list[ReadingLabel]:
    """Label every reading Normal or High against its group's Tukey fence.

    Fences are computed per (monitor, chemical) group. Groups with fewer
    than 4 readings cannot support a fence; their readings are labeled
    Normal and flagged small_group. Output preserves the input order.
    """
    groups: dict[tuple[int, Chemical], list[float]] = {}
    for r in readings:
        groups.setdefault((r.monitor, r.chemical), []).append(r.ppm)
    fences: dict[tuple[int, Chemical], float | None] = {}
    for key, values in groups.items():
        if len(values) < 4:
            fences[key] = None
        else:
            fences[key] = tukey_fence(np.asarray(values, dtype=np.float64), k, floor_ppm)
    labels = []
    for r in readings:
        fence = fences[(r.monitor, r.chemical)]
        if fence is None:
            labels.append(ReadingLabel(r.monitor, r.chemical, r.timestamp, r.ppm,
                                       Label.NORMAL, small_group=True))
        else:
            label = Label.HIGH if r.ppm > fence else Label.NORMAL
            labels.append(ReadingLabel(r.monitor, r.chemical, r.timestamp, r.ppm, label))
    return labels


def smooth_series(series, span_fraction: float) -> list[float]:
    """Centered moving average with window max(1, round(span * N)).

    The window is truncated at the boundaries (each output value averages
    only in-range samples), so output length equals input length.
    """
    if not 0.0 < span_fraction <= 1.0:
        raise ValueError(f"span_fraction {span_fraction} outside (0, 1]")
    values = np.asarray(list(series), dtype=np.float64)
    n = values.size
    if n == 0:
        raise ValueError("cannot smooth an empty series")
    w = max(1, round(span_fraction * n))
    before = (w - 1) // 2
    after = w // 2
    out = []
    for i in range(n):
        lo = max(0, i - before)
        hi = min(n, i + after + 1)
        out.append(float(values[lo:hi].mean()))
    return out


def pairwise_correlation(readings: list[ChemicalReading]) -> list[CorrelationMatrix]:
    """Pearson correlation between chemical series for every monitor.

    Series are aligned on shared timestamps (inner join). A pair is
    undefined (NaN, defined=False) if it shares fewer than 3 timestamps or
    either aligned series is constant. The matrix is exactly symmetric.
    """
    series: dict[int, dict[Chemical, dict[datetime, float]]] = {}
    for r in readings:
        series.setdefault(r.monitor, {}).setdefault(r.chemical, {})[r.timestamp] = r.ppm
    out = []
    for monitor in sorted(series):
        chems = CHEMICALS
        r_matrix = np.full((len(chems), len(chems)), np.nan)
        defined = np.zeros((len(chems), len(chems)), dtype=bool)
        for i, a in enumerate(chems):
            for j, b in enumerate(chems):
                if j < i:
                    continue
                sa = series[monitor].get(a, {})
                sb = series[monitor].get(b, {})
                shared = sorted(set(sa) & set(sb))
                if len(shared) < 3:
                    continue
                va = np.array([sa[t] for t in shared])
                vb = np.array([sb[t] for t in shared])
                da = va - va.mean()
                db = vb - vb.mean()
                denom = np.sqrt((da * da).sum() * (db * db).sum())
                if denom == 0.0:
                    continue
                r = float(np.clip((da * db).sum() / denom, -1.0, 1.0))
                r_matrix[i, j] = r_matrix[j, i] = r
                defined[i, j] = defined[j, i] = True
        out.append(CorrelationMatrix(monitor, chems, r_matrix, defined))
    return out
