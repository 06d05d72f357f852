"""Per-vehicle trajectories and rule-based traffic anomaly detection.

A trajectory is the time-ordered sequence of gates one car passed, with
gate names resolved to map coordinates. Four deterministic detectors flag
the suspicious patterns: trips that never leave through an entrance,
non-ranger passes through rangers-only gates, gates no ranger ever
inspected, and months whose traffic jumps far above a stratum's baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum

from .errors import ParkwatchError
from .ingest import GateKind, GateRecord, PreserveMap, VehicleType


@dataclass(frozen=True)
class TrajectoryPoint:
    gate_name: str
    kind: GateKind
    xy: tuple[float, float]
    timestamp: datetime


@dataclass(frozen=True)
class Trajectory:
    car_id: str
    vehicle_type: VehicleType
    points: tuple[TrajectoryPoint, ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError(f"trajectory for {self.car_id} has no points")


class AnomalyRule(Enum):
    TERMINATED_INSIDE = "TerminatedInside"
    ILLEGAL_GATE_PASS = "IllegalGatePass"
    RANGER_COVERAGE_GAP = "RangerCoverageGap"
    TRAFFIC_SURGE = "TrafficSurge"


@dataclass(frozen=True)
class AnomalyFinding:
    rule: AnomalyRule
    subject: str  # car_id, gate_name, or YYYY-MM month per the rule
    evidence: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rule": self.rule.value,
            "subject": self.subject,
            "evidence": self.evidence,
            "details": dict(self.details),
        }


@dataclass(frozen=True)
class TrafficHistogram:
    stratum: str  # "type:N" or "cluster:N"
    bins: dict[str, int]  # month "YYYY-MM" -> pass count, contiguous span


class UnresolvableGateError(ParkwatchError):
    def __init__(self, gate_name: str, car_id: str, row: int):
        self.gate_name = gate_name
        self.car_id = car_id
        self.row = row
        super().__init__(f"record {row} (car {car_id}): gate {gate_name!r} not on map")


def build_trajectories(records: list[GateRecord], preserve: PreserveMap) -> list[Trajectory]:
    """Group records into one time-ordered trajectory per car.

    Records with equal timestamps keep their input order (stable sort).
    Output is sorted by car_id.
    """
    by_car: dict[str, list[TrajectoryPoint]] = {}
    types: dict[str, VehicleType] = {}
    for idx, rec in enumerate(records, start=1):
        if not preserve.has(rec.gate_name):
            raise UnresolvableGateError(rec.gate_name, rec.car_id, idx)
        node = preserve.node(rec.gate_name)
        point = TrajectoryPoint(rec.gate_name, node.kind, (float(node.x), float(node.y)), rec.timestamp)
        by_car.setdefault(rec.car_id, []).append(point)
        types[rec.car_id] = rec.vehicle_type
    out = []
    for car_id in sorted(by_car):
        points = sorted(by_car[car_id], key=lambda p: p.timestamp)
        out.append(Trajectory(car_id, types[car_id], tuple(points)))
    return out


def pad_trajectories(trajs: list[Trajectory], target_len: int) -> list[list[tuple[float, float]]]:
    """Equalize lengths by repeating each trajectory's final point.

    The output keeps the input order; every sequence has exactly target_len
    coordinates and its prefix is the original point sequence.
    """
    if trajs:
        longest = max(len(t.points) for t in trajs)
        if target_len < longest:
            raise ValueError(f"target_len {target_len} below longest trajectory ({longest})")
    padded = []
    for traj in trajs:
        coords = [p.xy for p in traj.points]
        coords.extend([coords[-1]] * (target_len - len(coords)))
        padded.append(coords)
    return padded


def mean_trajectory(padded: list[list[tuple[float, float]]]) -> list[tuple[float, float]]:
    """Coordinate-wise arithmetic mean of equal-length point sequences."""
    if not padded:
        raise ValueError("mean of an empty trajectory set is undefined")
    length = len(padded[0])
    if any(len(seq) != length for seq in padded):
        raise ValueError("sequences must share one length; pad first")
    n = float(len(padded))
    out = []
    for i in range(length):
        sx = sum(seq[i][0] for seq in padded)
        sy = sum(seq[i][1] for seq in padded)
        out.append((sx / n, sy / n))
    return out


def detect_terminated_inside(trajs: list[Trajectory]) -> list[AnomalyFinding]:
    """Flag every trajectory whose final gate is not an entrance.

    A normal visit leaves the preserve through an entrance; anything else
    means no further passes were recorded after the car stopped inside.
    """
    findings = []
    for traj in sorted(trajs, key=lambda t: t.car_id):
        last = traj.points[-1]
        if last.kind != GateKind.ENTRANCE:
            findings.append(AnomalyFinding(
                AnomalyRule.TERMINATED_INSIDE,
                traj.car_id,
                f"car {traj.car_id} (type {int(traj.vehicle_type)}) last seen at "
                f"{last.gate_name} ({last.kind.value}) {last.timestamp}",
                {"gate_name": last.gate_name, "kind": last.kind.value,
                 "vehicle_type": int(traj.vehicle_type),
                 "timestamp": last.timestamp.isoformat(sep=" ")},
            ))
    return findings


def count_collapsed_visits(trajs: list[Trajectory]) -> int:
    """Diagnostic tally of single-point trajectories ending at an entrance
    (an enter-and-exit pair collapsed into one record)."""
    return sum(
        1 for t in trajs
        if len(t.points) == 1 and t.points[0].kind == GateKind.ENTRANCE
    )


def detect_illegal_gate_pass(trajs: list[Trajectory]) -> list[AnomalyFinding]:
    """Flag each pass of a rangers-only gate (Gate or RangerBase) by a
    non-ranger vehicle. One finding per offending point."""
    findings = []
    for traj in sorted(trajs, key=lambda t: t.car_id):
        if traj.vehicle_type == VehicleType.RANGER:
            continue
        for point in traj.points:
            if point.kind.rangers_only:
                findings.append(AnomalyFinding(
                    AnomalyRule.ILLEGAL_GATE_PASS,
                    traj.car_id,
                    f"car {traj.car_id} (type {int(traj.vehicle_type)}) passed "
                    f"rangers-only {point.gate_name} at {point.timestamp}",
                    {"gate_name": point.gate_name, "kind": point.kind.value,
                     "vehicle_type": int(traj.vehicle_type),
                     "timestamp": point.timestamp.isoformat(sep=" ")},
                ))
    return findings


def ranger_coverage_gaps(trajs: list[Trajectory], preserve: PreserveMap) -> list[AnomalyFinding]:
    """Flag every map gate that no ranger (type 7) trajectory ever visited."""
    visited: set[str] = set()
    for traj in trajs:
        if traj.vehicle_type == VehicleType.RANGER:
            visited.update(p.gate_name for p in traj.points)
    findings = []
    for node in sorted(preserve.gates, key=lambda g: g.name):
        if node.name not in visited:
            findings.append(AnomalyFinding(
                AnomalyRule.RANGER_COVERAGE_GAP,
                node.name,
                f"gate {node.name} ({node.kind.value}) never visited by any ranger",
                {"kind": node.kind.value, "x": node.x, "y": node.y},
            ))
    return findings


def _month_key(ts: datetime) -> str:
    return f"{ts.year:04d}-{ts.month:02d}"


def _month_span(first: str, last: str) -> list[str]:
    y, m = int(first[:4]), int(first[5:])
    ly, lm = int(last[:4]), int(last[5:])
    months = []
    while (y, m) <= (ly, lm):
        months.append(f"{y:04d}-{m:02d}")
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return months


def monthly_traffic_histogram(
    trajs: list[Trajectory],
    stratify_by: str = "type",
    assignments: dict[str, int] | None = None,
) -> list[TrafficHistogram]:
    """Monthly gate-pass counts per stratum (vehicle type or cluster id).

    Each record contributes one count to its month. Every histogram spans
    the same contiguous month range, covering the whole input's dates, so
    empty interior months appear as zero bins.
    """
    if stratify_by not in ("type", "cluster"):
        raise ValueError(f"stratify_by must be 'type' or 'cluster', got {stratify_by!r}")
    counts: dict[str, dict[str, int]] = {}
    months_seen: list[str] = []
    for traj in trajs:
        if stratify_by == "type":
            stratum = f"type:{int(traj.vehicle_type)}"
        else:
            if assignments is None or traj.car_id not in assignments:
                raise ParkwatchError(f"no cluster assignment for car {traj.car_id}")
            stratum = f"cluster:{assignments[traj.car_id]}"
        bins = counts.setdefault(stratum, {})
        for point in traj.points:
            month = _month_key(point.timestamp)
            bins[month] = bins.get(month, 0) + 1
            months_seen.append(month)
    if not months_seen:
        return []
    span = _month_span(min(months_seen), max(months_seen))
    out = []
    for stratum in sorted(counts, key=lambda s: (s.split(":")[0], int(s.split(":")[1]))):
        bins = {month: counts[stratum].get(month, 0) for month in span}
        out.append(TrafficHistogram(stratum, bins))
    return out


def detect_traffic_surge(hists: list[TrafficHistogram], factor: float = 2.0) -> list[AnomalyFinding]:
    """Flag months whose count exceeds factor x the stratum's monthly median.

    The median baseline is robust to the surge itself. Histograms with
    fewer than 3 bins give no baseline and produce no findings.
    """
    findings = []
    for hist in hists:
        if len(hist.bins) < 3:
            continue
        values = sorted(hist.bins.values())
        n = len(values)
        mid = n // 2
        median = float(values[mid]) if n % 2 else (values[mid - 1] + values[mid]) / 2.0
        for month in sorted(hist.bins):
            count = hist.bins[month]
            if count > factor * median:
                findings.append(AnomalyFinding(
                    AnomalyRule.TRAFFIC_SURGE,
                    month,
                    f"{hist.stratum}: {count} passes in {month} exceeds "
                    f"{factor:g} x median ({median:g})",
                    {"stratum": hist.stratum, "count": count,
                     "median": median, "factor": factor},
                ))
    return findings
