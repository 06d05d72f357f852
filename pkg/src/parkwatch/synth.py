"""Seeded synthetic-scenario generator with a ground-truth manifest.

Produces all three data feeds in the exact file formats the ingest module
reads, with every planted anomaly recorded in a manifest: never-exit and
illegal-pass cars, a surge month, gates no ranger visits, missing sensor
readings, chemical spikes tied to a single emitting factory, and scenes
with exact planted index fractions. Identical configs produce
byte-identical outputs.

Spike propagation is instantaneous straight-line advection: a sensor
receives a spike iff it sits inside a narrow cone downwind of the emitter
at spike time, with the generating wind perturbed by a bounded noise angle
so attribution's wider cone still recovers the source.
"""

from __future__ import annotations

import calendar
import json
import math
import random
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np
from PIL import Image

from .config import DEFAULT_FACTORIES, color_hex
from .errors import ConfigError, SceneError
from .ingest import (
    CHEMICALS,
    Factory,
    GateKind,
    SensorSite,
    WindSample,
    format_slash_timestamp,
)

MAP_SIZE = 200

# Gate layout in map coordinates (north-west origin). The x >= 145 nodes
# form the "east" of the preserve used for coverage-gap scenarios.
GATE_LAYOUT: tuple[tuple[str, GateKind, int, int], ...] = (
    ("entrance0", GateKind.ENTRANCE, 8, 100),
    ("entrance1", GateKind.ENTRANCE, 100, 8),
    ("entrance2", GateKind.ENTRANCE, 191, 100),
    ("entrance3", GateKind.ENTRANCE, 100, 191),
    ("general-gate0", GateKind.GENERAL_GATE, 60, 60),
    ("general-gate1", GateKind.GENERAL_GATE, 100, 80),
    ("general-gate2", GateKind.GENERAL_GATE, 140, 60),
    ("general-gate3", GateKind.GENERAL_GATE, 60, 140),
    ("general-gate4", GateKind.GENERAL_GATE, 150, 140),
    ("camping0", GateKind.CAMPING, 40, 90),
    ("camping1", GateKind.CAMPING, 90, 40),
    ("camping2", GateKind.CAMPING, 120, 120),
    ("ranger-stop0", GateKind.RANGER_STOP, 30, 30),
    ("ranger-stop1", GateKind.RANGER_STOP, 170, 30),
    ("ranger-stop2", GateKind.RANGER_STOP, 30, 170),
    ("ranger-stop3", GateKind.RANGER_STOP, 170, 170),
    ("gate0", GateKind.GATE, 80, 110),
    ("gate1", GateKind.GATE, 110, 90),
    ("gate2", GateKind.GATE, 160, 110),
    ("ranger-base", GateKind.RANGER_BASE, 50, 50),
)

PALETTE_COLORS: dict[GateKind, tuple[int, int, int]] = {
    GateKind.ENTRANCE: (88, 196, 88),
    GateKind.GENERAL_GATE: (102, 153, 238),
    GateKind.GATE: (238, 102, 102),
    GateKind.RANGER_STOP: (238, 221, 68),
    GateKind.CAMPING: (238, 153, 51),
    GateKind.RANGER_BASE: (170, 85, 204),
}
ROAD_COLOR = (176, 176, 176)
BACKGROUND_COLOR = (255, 255, 255)

# One emitting factory per chemical (single-source scenarios).
DEFAULT_EMITTERS = {
    "Appluimonia": "Roadrunner Fitness Electronics",
    "Chlorodinine": "Kasios Office Furniture",
    "Methylosmolene": "Radiance ColourTek",
    "AGOC-3A": "Indigo Sol Boards",
}

# Nine monitors ringed around the factory cluster, sensor-map frame.
DEFAULT_SITES = {
    m + 1: (
        round(102.0 + 26.0 * math.cos(math.radians(40.0 * m)), 1),
        round(24.0 + 26.0 * math.sin(math.radians(40.0 * m)), 1),
    )
    for m in range(9)
}


@dataclass
class ScenarioConfig:
    seed: int = 7
    # traffic
    vehicles_per_type: dict[int, int] = field(default_factory=lambda: {
        1: 120, 2: 60, 3: 50, 4: 40, 5: 30, 6: 25, 7: 24,
    })
    traffic_months: list[str] = field(default_factory=lambda: [
        f"2015-{m:02d}" for m in range(1, 13)
    ])
    never_exit_count: int = 5
    illegal_pass_count: int = 3
    surge_month: str | None = "2015-06"
    surge_multiplier: float = 3.0
    ranger_unvisited_gates: list[str] = field(default_factory=lambda: [
        "general-gate4", "gate2", "ranger-stop3",
    ])
    # chemistry
    sensor_months: list[str] = field(default_factory=lambda: [
        "2016-04", "2016-08", "2016-12",
    ])
    reading_interval_minutes: int = 60
    baseline_max_ppm: float = 5.0
    spike_low_ppm: float = 30.0
    spike_high_ppm: float = 80.0
    spikes_per_chemical: int = 8
    calm_spikes: int = 2
    missing_count: int = 50
    wind_noise_deg: float = 8.0
    plume_half_angle_deg: float = 15.0
    emitters: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_EMITTERS))
    # scenes
    scene_dates: list[str] = field(default_factory=lambda: [
        "2014-08-01", "2015-06-15", "2016-06-20",
    ])
    scene_size: int = 650
    veg_fraction: float = 0.45
    dry_fraction: float = 0.25
    mineral_fraction: float = 0.20
    veg_decline_per_scene: float = 0.05
    dry_drift_per_scene: float = 0.02
    cloud_rects: dict[str, list[list[int]]] = field(default_factory=lambda: {
        "2015-06-15": [[20, 20, 120, 90]],
    })

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        cfg = cls()
        for key, value in data.items():
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown scenario key {key!r}")
            if key == "vehicles_per_type":
                value = {int(t): int(n) for t, n in value.items()}
            setattr(cfg, key, value)
        return cfg


def _blow_vector(direction_deg: float) -> tuple[float, float]:
    theta = math.radians(direction_deg)
    return (-math.sin(theta), -math.cos(theta))


def _angle_deg(v1: tuple[float, float], v2: tuple[float, float]) -> float:
    n1 = math.hypot(*v1)
    n2 = math.hypot(*v2)
    if n1 == 0.0 or n2 == 0.0:
        return 180.0
    cos_a = (v1[0] * v2[0] + v1[1] * v2[1]) / (n1 * n2)
    return math.degrees(math.acos(max(-1.0, min(1.0, cos_a))))


def _month_days(month: str) -> int:
    year, mon = int(month[:4]), int(month[5:7])
    return calendar.monthrange(year, mon)[1]


def _line_pixels(x0: int, y0: int, x1: int, y1: int):
    """Bresenham line, inclusive of both endpoints."""
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        yield x, y
        if x == x1 and y == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def build_synthetic_map():
    """Render the gate layout into a bitmap plus its sidecar tables.

    Returns (image array with row 0 = north, palette dict for the sidecar,
    names keyed by bitmap pixel, nodes dict name -> (kind, x, y)).
    """
    image = np.full((MAP_SIZE, MAP_SIZE, 3), BACKGROUND_COLOR, dtype=np.uint8)
    nodes = {name: (kind, x, y) for name, kind, x, y in GATE_LAYOUT}
    ordered = [name for name, _, _, _ in GATE_LAYOUT]
    for a, b in zip(ordered, ordered[1:]):  # a simple connected road trace
        _, xa, ya = nodes[a][0], nodes[a][1], nodes[a][2]
        _, xb, yb = nodes[b][0], nodes[b][1], nodes[b][2]
        for x, y in _line_pixels(xa, ya, xb, yb):
            image[y, x] = ROAD_COLOR
    names: dict[tuple[int, int], str] = {}
    for name, kind, x, y in GATE_LAYOUT:
        image[y, x] = PALETTE_COLORS[kind]
        names[(x, (MAP_SIZE - 1) - y)] = name  # sidecar keys use bitmap coords
    return image, dict(PALETTE_COLORS), names, nodes


def _gates_of(nodes: dict, kinds: tuple[GateKind, ...]) -> list[str]:
    return sorted(name for name, (kind, _, _) in nodes.items() if kind in kinds)


def gen_traffic(cfg: ScenarioConfig, nodes: dict, rng: random.Random):
    """Gate records plus the traffic slice of the manifest.

    Normal vehicles enter and leave through entrances; the planted
    anomalies are realized exactly as configured. Every ranger trip is the
    same full patrol circuit from the ranger base through all permitted
    gates, leaving through an entrance so only planted cars trip the
    terminated-inside rule. Vehicle trip counts are balanced across months;
    a surge month adds extra trips on top of that balance.
    """
    unvisited = set(cfg.ranger_unvisited_gates)
    for gate in unvisited:
        if gate not in nodes:
            raise ConfigError(f"ranger_unvisited_gates names unknown gate {gate!r}")
    if "ranger-base" in unvisited:
        raise ConfigError("rangers cannot avoid their own base")
    entrances = [g for g in _gates_of(nodes, (GateKind.ENTRANCE,)) if g not in unvisited]
    if not entrances:
        raise ConfigError("every entrance is marked ranger-unvisited")
    generals = _gates_of(nodes, (GateKind.GENERAL_GATE,))
    campings = _gates_of(nodes, (GateKind.CAMPING,))
    stops = _gates_of(nodes, (GateKind.RANGER_STOP,))
    ranger_gates = _gates_of(nodes, (GateKind.GATE,))
    light_middles = generals + campings + stops  # types 1-3
    heavy_middles = generals + stops  # types 4-6
    all_nodes = sorted(nodes)

    months = list(cfg.traffic_months)
    if cfg.surge_month and cfg.surge_month not in months:
        raise ConfigError(f"surge month {cfg.surge_month} outside traffic months")

    # Planted ids: never-exit over visitor types, illegal passes on types 4 then 1.
    never_exit: list[str] = []
    illegal: list[str] = []
    plan: list[tuple[str, int, list[str], str]] = []  # (car_id, type, trip months, role)
    ne_types = [1, 2, 3, 5]
    for i in range(cfg.never_exit_count):
        never_exit.append(f"stay-{ne_types[i % len(ne_types)]}-{i:03d}")
    il_types = [4, 1]
    for i in range(cfg.illegal_pass_count):
        illegal.append(f"tresp-{il_types[i % len(il_types)]}-{i:03d}")

    n_months = len(months)
    for vtype in sorted(cfg.vehicles_per_type):
        count = cfg.vehicles_per_type[vtype]
        if count == 0:
            continue
        # enough trips that every month sees this type a few times; keeps the
        # surge detector's per-month baseline well above zero
        trips = max(1, math.ceil(3 * n_months / count))
        vehicles = []
        for i in range(count):
            trip_months = [months[(i * trips + j) % n_months] for j in range(trips)]
            vehicles.append([f"car-{vtype}-{i:04d}", vtype, trip_months, "normal"])
        if cfg.surge_month:
            # the surge is extra trips by the existing fleet, spread round-robin
            extra = math.ceil((cfg.surge_multiplier - 1.0) * count * trips / n_months)
            for e in range(extra):
                vehicles[e % count][2].append(cfg.surge_month)
        plan.extend((v[0], v[1], v[2], v[3]) for v in vehicles)
    for i, car_id in enumerate(never_exit):
        plan.append((car_id, int(car_id.split("-")[1]), [months[i % n_months]], "never_exit"))
    for i, car_id in enumerate(illegal):
        plan.append((car_id, int(car_id.split("-")[1]), [months[i % n_months]], "illegal"))

    # Rangers run the same full patrol circuit every trip: base, every
    # permitted gate, out through an entrance. That matches their job
    # (regular whole-preserve inspection), realizes the unvisited-gate plant
    # exactly, and makes ranger trajectories a tight cluster of their own,
    # clearly apart from the short random visitor trips.
    circuit = [g for g in all_nodes if g not in unvisited and g != "ranger-base"]
    if sum(1 for entry in plan if entry[1] == 7) == 0:
        unvisited = set(all_nodes)  # nobody inspects anything

    records: list[tuple[datetime, str, int, str]] = []
    for car_id, vtype, trip_months, role in plan:
        # distinct days for same-month trips, so one car's trips never overlap
        month_counts: dict[str, int] = {}
        for month in trip_months:
            month_counts[month] = month_counts.get(month, 0) + 1
        month_days = {
            month: sorted(rng.sample(range(1, _month_days(month) + 1), n))
            for month, n in month_counts.items()
        }
        taken = {month: 0 for month in month_counts}
        for month in trip_months:
            day = month_days[month][taken[month]]
            taken[month] += 1
            start = datetime(int(month[:4]), int(month[5:7]), day,
                             rng.randint(6, 17), rng.randint(0, 59))
            if vtype == 7:
                route = ["ranger-base"] + circuit + [entrances[0]]
            else:
                middles_pool = light_middles if vtype in (1, 2, 3) else heavy_middles
                middles = rng.sample(middles_pool, rng.randint(2, 4))
                enter = rng.choice(entrances)
                if role == "never_exit":
                    terminal = rng.choice(campings + generals)
                    route = [enter] + middles + [terminal]
                elif role == "illegal":
                    middles.insert(rng.randint(0, len(middles)), rng.choice(ranger_gates))
                    route = [enter] + middles + [rng.choice(entrances)]
                else:
                    route = [enter] + middles + [rng.choice(entrances)]
            ts = start
            for gate in route:
                records.append((ts, car_id, vtype, gate))
                ts = ts + timedelta(minutes=rng.randint(8, 25))
    records.sort(key=lambda r: (r[0], r[1], r[3]))
    manifest = {
        "never_exit_car_ids": sorted(never_exit),
        "illegal_pass_car_ids": sorted(illegal),
        "ranger_unvisited_gates": sorted(unvisited),
        "surge_month": cfg.surge_month,
        "record_count": len(records),
        "vehicle_count": len(plan),
    }
    return records, manifest


def _sensor_slots(cfg: ScenarioConfig) -> list[datetime]:
    slots = []
    for month in cfg.sensor_months:
        year, mon = int(month[:4]), int(month[5:7])
        t = datetime(year, mon, 1)
        end = datetime(year, mon, _month_days(month), 23, 59)
        step = timedelta(minutes=cfg.reading_interval_minutes)
        while t <= end:
            slots.append(t)
            t += step
    return slots


def _wind_times(cfg: ScenarioConfig) -> list[datetime]:
    times = []
    for month in cfg.sensor_months:
        year, mon = int(month[:4]), int(month[5:7])
        t = datetime(year, mon, 1)
        end = datetime(year, mon, _month_days(month), 23, 59)
        while t <= end:
            times.append(t)
            t += timedelta(hours=3)
    return times


def gen_chemistry(
    cfg: ScenarioConfig,
    sites: dict[int, SensorSite],
    factories: list[Factory],
    rng: random.Random,
):
    """Sensor readings, meteorology, and the chemistry manifest slice.

    Baseline readings stay at or below baseline_max_ppm so the default
    10 ppm labeling floor cleanly separates the planted 30-80 ppm spikes.
    """
    slots = _sensor_slots(cfg)
    slot_index = {t: i for i, t in enumerate(slots)}
    np_rng = np.random.default_rng(cfg.seed + 101)

    wind_times = _wind_times(cfg)
    directions = np_rng.uniform(0.0, 360.0, size=len(wind_times))
    speeds = np_rng.uniform(0.6, 5.0, size=len(wind_times))
    calm_positions = list(range(11, len(wind_times), max(13, len(wind_times) // 12)))
    for pos in calm_positions:
        speeds[pos] = float(np_rng.uniform(0.0, 0.25))
    winds = [
        WindSample(t, float(round(d, 1)), float(round(s, 2)))
        for t, d, s in zip(wind_times, directions, speeds)
    ]

    baseline = np_rng.uniform(
        0.05, cfg.baseline_max_ppm, size=(9, len(CHEMICALS), len(slots))
    ).round(4)

    factory_by_name = {f.name: f for f in factories}
    spikes = []
    spike_cells: set[tuple[int, int, int]] = set()  # (monitor-1, chem_idx, slot_idx)
    for chem_idx, chemical in enumerate(CHEMICALS):
        emitter_name = cfg.emitters[chemical.value]
        if emitter_name not in factory_by_name:
            raise ConfigError(f"unknown emitting factory {emitter_name!r}")
        factory = factory_by_name[emitter_name]
        candidates = [w for w in winds if w.speed_mps >= 0.8 and w.timestamp in slot_index]
        order = list(range(len(candidates)))
        rng.shuffle(order)
        used_days: set = set()
        planted = 0
        for pos in order:
            if planted >= cfg.spikes_per_chemical:
                break
            wind = candidates[pos]
            if wind.timestamp.date() in used_days:
                continue
            noisy_dir = (wind.direction_deg + rng.uniform(-cfg.wind_noise_deg,
                                                          cfg.wind_noise_deg)) % 360.0
            blow = _blow_vector(noisy_dir)
            receivers = []
            for monitor in sorted(sites):
                site = sites[monitor]
                offset = (site.coord[0] - factory.coord[0], site.coord[1] - factory.coord[1])
                if _angle_deg(offset, blow) <= cfg.plume_half_angle_deg:
                    receivers.append(monitor)
            if not receivers:
                continue
            slot = slot_index[wind.timestamp]
            for monitor in receivers:
                ppm = round(rng.uniform(cfg.spike_low_ppm, cfg.spike_high_ppm), 4)
                baseline[monitor - 1, chem_idx, slot] = ppm
                spike_cells.add((monitor - 1, chem_idx, slot))
            used_days.add(wind.timestamp.date())
            planted += 1
            spikes.append({
                "chemical": chemical.value,
                "factory": factory.name,
                "timestamp": wind.timestamp.isoformat(sep=" "),
                "date": wind.timestamp.date().isoformat(),
                "monitors": receivers,
                "calm": False,
            })
        # calm-wind spikes: deposited at the sensor nearest the emitter
        calm_candidates = [w for w in winds
                           if w.speed_mps < 0.3 and w.timestamp in slot_index
                           and w.timestamp.date() not in used_days]
        nearest = min(
            sorted(sites),
            key=lambda m: math.hypot(sites[m].coord[0] - factory.coord[0],
                                     sites[m].coord[1] - factory.coord[1]),
        )
        for wind in calm_candidates[:cfg.calm_spikes]:
            slot = slot_index[wind.timestamp]
            ppm = round(rng.uniform(cfg.spike_low_ppm, cfg.spike_high_ppm), 4)
            baseline[nearest - 1, chem_idx, slot] = ppm
            spike_cells.add((nearest - 1, chem_idx, slot))
            used_days.add(wind.timestamp.date())
            spikes.append({
                "chemical": chemical.value,
                "factory": factory.name,
                "timestamp": wind.timestamp.isoformat(sep=" "),
                "date": wind.timestamp.date().isoformat(),
                "monitors": [nearest],
                "calm": True,
            })

    # Planted recording failures: never monitor 1, never a spike cell, at
    # most 3 removals per slot, Methylosmolene most often.
    missing: set[tuple[int, int, int]] = set()
    removals_per_slot: dict[tuple[int, int], int] = {}
    chem_weights = [1, 1, 4, 1]
    guard = 0
    while len(missing) < cfg.missing_count and guard < cfg.missing_count * 50:
        guard += 1
        monitor = rng.randint(2, 9)
        chem_idx = rng.choices(range(len(CHEMICALS)), weights=chem_weights)[0]
        slot = rng.randrange(len(slots))
        cell = (monitor - 1, chem_idx, slot)
        if cell in missing or cell in spike_cells:
            continue
        if removals_per_slot.get((monitor, slot), 0) >= 3:
            continue
        missing.add(cell)
        removals_per_slot[(monitor, slot)] = removals_per_slot.get((monitor, slot), 0) + 1
    if len(missing) < cfg.missing_count:
        raise ConfigError("could not place the requested number of missing readings")

    rows = []
    for monitor in range(1, 10):
        for slot_idx, slot_time in enumerate(slots):
            for chem_idx, chemical in enumerate(CHEMICALS):
                if (monitor - 1, chem_idx, slot_idx) in missing:
                    continue
                rows.append((chemical.value, monitor, slot_time,
                             float(baseline[monitor - 1, chem_idx, slot_idx])))
    manifest = {
        "missing_triples": sorted(
            [m + 1, slots[s].isoformat(sep=" "), CHEMICALS[c].value]
            for (m, c, s) in missing
        ),
        "spikes": spikes,
        "baseline_max_ppm": cfg.baseline_max_ppm,
        "reading_count": len(rows),
        "wind_sample_count": len(winds),
        "wind_noise_deg": cfg.wind_noise_deg,
        "plume_half_angle_deg": cfg.plume_half_angle_deg,
    }
    return rows, winds, manifest


def gen_scenes(cfg: ScenarioConfig):
    """Band rasters with exact planted threshold fractions.

    Painted counts are round(fraction x non-excluded pixels), so the
    measured fraction equals the manifest value up to that one-pixel
    quantization. Cloud rectangles are painted bright in every band and
    recorded as exclusions.
    """
    size = cfg.scene_size
    for name in ("veg_fraction", "dry_fraction", "mineral_fraction"):
        value = getattr(cfg, name)
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"{name} {value} outside [0, 1]")
    lake = (4, 4, max(9, size // 12), max(9, size // 12))
    scenes = []
    manifest = []
    for i, date_text in enumerate(sorted(cfg.scene_dates)):
        veg_f = max(0.0, cfg.veg_fraction - i * cfg.veg_decline_per_scene)
        dry_f = min(1.0, cfg.dry_fraction + i * cfg.dry_drift_per_scene)
        min_f = cfg.mineral_fraction
        rects = [tuple(int(v) for v in r) for r in cfg.cloud_rects.get(date_text, [])]
        excluded = np.zeros((size, size), dtype=bool)
        for x0, y0, x1, y1 in rects:
            if not (0 <= x0 <= x1 < size and 0 <= y0 <= y1 < size):
                raise SceneError(f"cloud rect {(x0, y0, x1, y1)} outside {size}x{size} scene")
            excluded[y0:y1 + 1, x0:x1 + 1] = True
        n_valid = size * size - int(excluded.sum())
        in_lake = np.zeros((size, size), dtype=bool)
        in_lake[lake[1]:lake[3] + 1, lake[0]:lake[2] + 1] = True
        pool = np.flatnonzero(~excluded.ravel() & ~in_lake.ravel())
        k_veg = round(veg_f * n_valid)
        k_dry = round(dry_f * n_valid)
        k_min = round(min_f * n_valid)
        if max(k_veg, k_dry, k_min) > pool.size:
            raise SceneError("planted fractions exceed the paintable area")
        bands = {
            "B1": np.full((size, size), 102, dtype=np.uint8),
            "B2": np.full((size, size), 128, dtype=np.uint8),
            "B3": np.full((size, size), 77, dtype=np.uint8),
            "B4": np.full((size, size), 77, dtype=np.uint8),
            "B5": np.full((size, size), 102, dtype=np.uint8),
            "B6": np.full((size, size), 77, dtype=np.uint8),
        }
        flat = {b: bands[b].ravel() for b in bands}
        veg_px = pool[:k_veg]
        flat["B4"][veg_px] = 204  # NDVI (204-51)/255 = 0.6
        flat["B3"][veg_px] = 51
        dry_px = pool[pool.size - k_dry:]
        flat["B5"][dry_px] = 217  # 0.851, above the 0.7 threshold
        mid = (pool.size - k_min) // 2
        flat["B6"][pool[mid:mid + k_min]] = 217
        for b in bands:
            view = bands[b]
            view[lake[1]:lake[3] + 1, lake[0]:lake[2] + 1] = 0
            view[excluded] = 255  # clouds saturate every band
        scenes.append({"date": date_text, "bands": bands,
                       "exclusions": [list(r) for r in rects]})
        manifest.append({
            "date": date_text,
            "fractions": {
                "vegetated": k_veg / n_valid,
                "dry": k_dry / n_valid,
                "mineral_rich": k_min / n_valid,
            },
            "excluded_pixel_count": int(excluded.sum()),
        })
    return scenes, manifest


def generate_scenario(cfg: ScenarioConfig, out_dir: str | Path) -> dict:
    """Write the complete synthetic data tree and return the manifest.

    Layout under out_dir:
      map.png, map_sidecar.json          preserve bitmap + palette/names
      gate_records.csv                   traffic feed
      sensor_readings.csv, meteorology.csv, sites.json
      scenes/<date>_B<k>.png, scenes.json
      manifest.json, scenario_config.json
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(cfg.seed)

    image, palette, names, nodes = build_synthetic_map()
    Image.fromarray(image, mode="RGB").save(out / "map.png", format="PNG")
    sidecar = {
        "palette": {color_hex(color): kind.value for kind, color in
                    sorted(palette.items(), key=lambda kv: kv[0].value)},
        "road_color": color_hex(ROAD_COLOR),
        "background_color": color_hex(BACKGROUND_COLOR),
        "gate_names": {f"{x},{y}": name for (x, y), name in sorted(names.items())},
    }
    (out / "map_sidecar.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    records, traffic_manifest = gen_traffic(cfg, nodes, rng)
    with open(out / "gate_records.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("Timestamp,car-id,car-type,gate-name\n")
        for ts, car_id, vtype, gate in records:
            code = "2P" if vtype == 7 else str(vtype)
            fh.write(f"{ts:%Y-%m-%d %H:%M:%S},{car_id},{code},{gate}\n")

    sites = {m: SensorSite(m, xy) for m, xy in DEFAULT_SITES.items()}
    factories = list(DEFAULT_FACTORIES)
    rows, winds, chem_manifest = gen_chemistry(cfg, sites, factories, rng)
    with open(out / "sensor_readings.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("Chemical,Monitor,Date Time,Reading\n")
        for chemical, monitor, ts, ppm in rows:
            fh.write(f"{chemical},{monitor},{format_slash_timestamp(ts)},{repr(ppm)}\n")
    with open(out / "meteorology.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("Date,Wind Direction,Wind Speed (m/s)\n")
        for w in winds:
            fh.write(f"{format_slash_timestamp(w.timestamp)},{repr(w.direction_deg)},"
                     f"{repr(w.speed_mps)}\n")
    (out / "sites.json").write_text(json.dumps({
        "sites": {str(m): list(xy) for m, xy in sorted(DEFAULT_SITES.items())},
        "factories": [{"name": f.name, "coord": list(f.coord)} for f in factories],
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    scenes, scene_manifest = gen_scenes(cfg)
    scene_dir = out / "scenes"
    scene_dir.mkdir(exist_ok=True)
    for scene in scenes:
        for band_id, arr in scene["bands"].items():
            Image.fromarray(arr, mode="L").save(
                scene_dir / f"{scene['date']}_{band_id}.png", format="PNG")
    (out / "scenes.json").write_text(json.dumps({
        "scenes": [{"date": s["date"], "exclusions": s["exclusions"]} for s in scenes],
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    manifest = {
        "seed": cfg.seed,
        "traffic": traffic_manifest,
        "chemistry": chem_manifest,
        "scenes": scene_manifest,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out / "scenario_config.json").write_text(
        json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest
