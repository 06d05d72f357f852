"""Wind-based factory attribution for high chemical readings.

Wind direction is a north-referenced origin azimuth: 0/360 means wind from
the north, blowing south. Each high reading is paired with the nearest
meteorology sample in time; the candidate emitters are the factories lying
inside an angular cone extending upwind from the sensor.
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from enum import Enum

from .errors import ConfigError, UnmatchedWindError
from .ingest import Chemical, Factory, SensorSite, WindSample
from .sensors import Label, ReadingLabel


@dataclass(frozen=True)
class WindVector:
    blow_toward: tuple[float, float]  # unit vector, x east-positive, y north-positive
    speed_mps: float
    calm: bool = False


class VerdictKind(Enum):
    INDETERMINATE = "-"
    ALL = "all"
    SOME = "some"


@dataclass(frozen=True)
class SuspectVerdict:
    kind: VerdictKind
    factories: tuple[str, ...] = ()

    def render(self) -> str:
        if self.kind == VerdictKind.INDETERMINATE:
            return "-"
        if self.kind == VerdictKind.ALL:
            return "all"
        return ", ".join(self.factories)


@dataclass(frozen=True)
class SuspectRow:
    monitor: int
    date: date
    chemical: Chemical
    wind_arrow: str
    verdict: SuspectVerdict
    wind_direction_deg: float
    wind_speed_mps: float


@dataclass(frozen=True)
class SuspectTables:
    rows: tuple[SuspectRow, ...]
    unmatched: tuple[tuple[int, date, Chemical], ...]  # spikes with no wind sample in range

    def for_chemical(self, chemical: Chemical) -> list[SuspectRow]:
        return [r for r in self.rows if r.chemical == chemical]


def wind_to_vector(sample: WindSample) -> WindVector:
    """Convert an origin azimuth to the unit vector the wind blows toward.

    Azimuth 0 -> (0, -1): from the north, blowing south. Azimuth 90 ->
    (-1, 0): from the east, blowing west. Zero speed gives a zero vector
    flagged calm.
    """
    if sample.speed_mps == 0.0:
        return WindVector((0.0, 0.0), 0.0, calm=True)
    theta = math.radians(sample.direction_deg)
    return WindVector((-math.sin(theta), -math.cos(theta)), sample.speed_mps)


# Arrow glyph per 45-degree octant of the blowing-toward direction,
# centered on the cardinal and intercardinal azimuths.
_ARROWS = ("↓", "↙", "←", "↖", "↑", "↗", "→", "↘")


def arrow_glyph(direction_deg: float) -> str:
    octant = int(round(direction_deg / 45.0)) % 8
    return _ARROWS[octant]


def match_wind_sample(
    spike_time: datetime,
    winds: list[WindSample],
    max_gap: timedelta = timedelta(hours=3),
) -> WindSample:
    """Return the wind sample nearest in time, within max_gap.

    `winds` must be sorted by timestamp. Raises UnmatchedWindError when the
    nearest sample is farther than max_gap (e.g. a month with no
    meteorological coverage).
    """
    if not winds:
        raise UnmatchedWindError(f"no wind samples available for {spike_time}")
    times = [w.timestamp for w in winds]
    idx = bisect.bisect_left(times, spike_time)
    best = None
    for j in (idx - 1, idx):
        if 0 <= j < len(winds):
            gap = abs(winds[j].timestamp - spike_time)
            if best is None or gap < best[0]:
                best = (gap, winds[j])
    gap, sample = best
    if gap > max_gap:
        raise UnmatchedWindError(
            f"nearest wind sample to {spike_time} is {sample.timestamp} ({gap} away)"
        )
    return sample


def upwind_suspects(
    site: SensorSite,
    wind: WindVector,
    factories: list[Factory],
    half_angle_deg: float = 30.0,
    calm_threshold_mps: float = 0.3,
    max_range: float | None = None,
) -> SuspectVerdict:
    """Factories within the cone extending upwind from the sensor.

    A factory is suspect when the angle between (factory - sensor) and the
    upwind direction (-blow_toward) is at most half_angle_deg. All four in
    the cone renders "all"; none (or calm wind) renders the dash. There is
    no distance cutoff unless max_range is given (the four plants sit in
    one tight cluster, so range rarely discriminates).
    """
    if wind.calm or wind.speed_mps < calm_threshold_mps:
        return SuspectVerdict(VerdictKind.INDETERMINATE)
    upwind = (-wind.blow_toward[0], -wind.blow_toward[1])
    considered = 0
    suspects = []
    for factory in factories:
        dx = factory.coord[0] - site.coord[0]
        dy = factory.coord[1] - site.coord[1]
        norm = math.hypot(dx, dy)
        if norm == 0.0:
            warnings.warn(f"factory {factory.name} coincides with sensor {site.monitor}; excluded")
            continue
        considered += 1
        if max_range is not None and norm > max_range:
            continue
        cos_angle = (dx * upwind[0] + dy * upwind[1]) / norm
        angle = math.degrees(math.acos(max(-1.0, min(1.0, cos_angle))))
        if angle <= half_angle_deg + 1e-9:
            suspects.append(factory.name)
    if not suspects:
        return SuspectVerdict(VerdictKind.INDETERMINATE)
    if len(suspects) == considered == len(factories):
        return SuspectVerdict(VerdictKind.ALL)
    return SuspectVerdict(VerdictKind.SOME, tuple(sorted(suspects)))


def build_suspect_tables(
    labels: list[ReadingLabel],
    winds: list[WindSample],
    sites: dict[int, SensorSite],
    factories: list[Factory],
    half_angle_deg: float = 30.0,
    calm_threshold_mps: float = 0.3,
    max_gap: timedelta = timedelta(hours=3),
    max_range: float | None = None,
) -> SuspectTables:
    """One verdict row per (chemical, monitor, day) with a High reading.

    The earliest High reading of the day is the wind-match representative.
    Spikes with no wind sample within max_gap are collected in `unmatched`
    rather than failing the table build. Rows are sorted by (chemical,
    monitor, date).
    """
    spikes: dict[tuple[Chemical, int, date], datetime] = {}
    for lab in labels:
        if lab.label != Label.HIGH:
            continue
        key = (lab.chemical, lab.monitor, lab.timestamp.date())
        if key not in spikes or lab.timestamp < spikes[key]:
            spikes[key] = lab.timestamp
    chem_order = {c: i for i, c in enumerate(Chemical)}
    rows = []
    unmatched = []
    for key in sorted(spikes, key=lambda k: (chem_order[k[0]], k[1], k[2])):
        chemical, monitor, day = key
        if monitor not in sites:
            raise ConfigError(f"no coordinates configured for sensor {monitor}")
        try:
            sample = match_wind_sample(spikes[key], winds, max_gap=max_gap)
        except UnmatchedWindError:
            unmatched.append((monitor, day, chemical))
            continue
        vector = wind_to_vector(sample)
        verdict = upwind_suspects(sites[monitor], vector, factories,
                                  half_angle_deg=half_angle_deg,
                                  calm_threshold_mps=calm_threshold_mps,
                                  max_range=max_range)
        rows.append(SuspectRow(monitor, day, chemical, arrow_glyph(sample.direction_deg),
                               verdict, sample.direction_deg, sample.speed_mps))
    return SuspectTables(tuple(rows), tuple(unmatched))
