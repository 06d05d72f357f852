"""Parsers and domain types for all external inputs.

Covers the three CSV feeds (gate traffic, chemical sensors, meteorology),
the color-coded preserve bitmap, and multi-band aerial scenes. All parsers
are pure functions of their input streams and return immutable records in
a canonical sort order, so shuffled inputs produce identical outputs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date, datetime
from enum import Enum, IntEnum
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np
from PIL import Image

from .errors import MapDecodeError, ParseError, SceneError


class VehicleType(IntEnum):
    """Seven vehicle categories; type 7 is the rangers' truck."""

    CAR = 1
    TRUCK_2AXLE = 2
    TRUCK_3AXLE = 3
    TRUCK_4AXLE = 4
    BUS_2AXLE = 5
    BUS_3AXLE = 6
    RANGER = 7

    @classmethod
    def parse(cls, text: str) -> "VehicleType":
        text = text.strip()
        if text.upper() == "2P":  # ranger-truck code used by the public data files
            return cls.RANGER
        try:
            code = int(text)
        except ValueError:
            raise ValueError(f"car type {text!r} is not an integer 1..7") from None
        if not 1 <= code <= 7:
            raise ValueError(f"car type {code} outside 1..7")
        return cls(code)


class GateKind(Enum):
    ENTRANCE = "Entrance"
    GENERAL_GATE = "GeneralGate"
    GATE = "Gate"
    RANGER_STOP = "RangerStop"
    CAMPING = "Camping"
    RANGER_BASE = "RangerBase"

    @property
    def rangers_only(self) -> bool:
        return self in (GateKind.GATE, GateKind.RANGER_BASE)

    @classmethod
    def parse(cls, text: str) -> "GateKind":
        for kind in cls:
            if kind.value == text:
                return kind
        raise ValueError(f"unknown gate kind {text!r}")


class Chemical(Enum):
    APPLUIMONIA = "Appluimonia"
    CHLORODININE = "Chlorodinine"
    METHYLOSMOLENE = "Methylosmolene"
    AGOC_3A = "AGOC-3A"

    @classmethod
    def parse(cls, text: str) -> "Chemical":
        for chem in cls:
            if chem.value == text:
                return chem
        raise ValueError(f"unknown chemical {text!r}")


CHEMICALS = tuple(Chemical)


@dataclass(frozen=True)
class GateRecord:
    timestamp: datetime
    car_id: str
    vehicle_type: VehicleType
    gate_name: str


@dataclass(frozen=True)
class GateNode:
    name: str
    kind: GateKind
    x: int
    y: int


@dataclass(frozen=True)
class PreserveMap:
    """Decoded preserve map with north-west origin, (0,0) at top-left."""

    width: int
    height: int
    gates: tuple[GateNode, ...]
    road_mask: np.ndarray  # bool, shape (height, width), row 0 = north

    def __post_init__(self):
        index = {g.name: g for g in self.gates}
        if len(index) != len(self.gates):
            raise MapDecodeError("duplicate gate names in map")
        object.__setattr__(self, "_by_name", index)

    def node(self, gate_name: str) -> GateNode:
        try:
            return self._by_name[gate_name]
        except KeyError:
            raise KeyError(f"gate {gate_name!r} not on the preserve map") from None

    def has(self, gate_name: str) -> bool:
        return gate_name in self._by_name


@dataclass(frozen=True)
class ChemicalReading:
    chemical: Chemical
    monitor: int
    timestamp: datetime
    ppm: float


@dataclass(frozen=True)
class WindSample:
    timestamp: datetime
    direction_deg: float  # north-referenced origin azimuth, [0, 360]
    speed_mps: float


@dataclass(frozen=True)
class Factory:
    name: str
    coord: tuple[float, float]


@dataclass(frozen=True)
class SensorSite:
    monitor: int
    coord: tuple[float, float]


BAND_IDS = ("B1", "B2", "B3", "B4", "B5", "B6")


@dataclass(frozen=True)
class MultiSpectralScene:
    """Six normalized reflectance rasters in [0, 1], all the same shape."""

    capture_date: date
    bands: Mapping[str, np.ndarray]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bands["B1"].shape


# Column headers used by the public challenge files; callers may remap.
GATE_COLUMNS = {
    "timestamp": "Timestamp",
    "car_id": "car-id",
    "car_type": "car-type",
    "gate_name": "gate-name",
}
SENSOR_COLUMNS = {
    "chemical": "Chemical",
    "monitor": "Monitor",
    "timestamp": "Date Time",
    "reading": "Reading",
}
METEO_COLUMNS = {
    "timestamp": "Date",
    "direction": "Wind Direction",
    "speed": "Wind Speed (m/s)",
}

_TIMESTAMP_FORMATS = (
    "%Y-%m-%d %H:%M:%S",
    "%m/%d/%Y %H:%M",
    "%m/%d/%y %H:%M",
    "%Y-%m-%d %H:%M",
)


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    for fmt in _TIMESTAMP_FORMATS:
        try:
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    raise ValueError(f"unparseable timestamp {text!r}")


def _text_lines(source) -> Iterable[str]:
    """Accept a path, CSV text, bytes, or an open file and yield text lines."""
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and Path(source).exists()
    ):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            yield from fh
        return
    if isinstance(source, str):
        yield from io.StringIO(source)
        return
    if isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8"))
        return
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    yield from io.StringIO(data)


def _reader(source, required: Iterable[str]):
    reader = csv.DictReader(_text_lines(source))
    header = reader.fieldnames or []
    missing = [c for c in required if c not in header]
    if missing:
        raise ParseError(f"missing CSV columns: {missing} (header was {header})")
    return reader


def _cell(row: Mapping[str, str | None], column: str) -> str:
    return (row.get(column) or "").strip()


def parse_gate_records(source, columns: Mapping[str, str] | None = None) -> list[GateRecord]:
    """Parse the gate-traffic CSV into records sorted by (car_id, timestamp).

    Raises ParseError naming the 1-based data row for a malformed timestamp,
    a car type outside 1..7, or an empty gate name.
    """
    cols = dict(GATE_COLUMNS)
    if columns:
        cols.update(columns)
    records = []
    for row_no, row in enumerate(_reader(source, cols.values()), start=1):
        try:
            ts = parse_timestamp(_cell(row, cols["timestamp"]))
            vtype = VehicleType.parse(_cell(row, cols["car_type"]))
        except ValueError as exc:
            raise ParseError(str(exc), row=row_no) from None
        gate = _cell(row, cols["gate_name"])
        if not gate:
            raise ParseError("empty gate name", row=row_no)
        car_id = _cell(row, cols["car_id"])
        if not car_id:
            raise ParseError("empty car id", row=row_no)
        records.append(GateRecord(ts, car_id, vtype, gate))
    records.sort(key=lambda r: (r.car_id, r.timestamp, r.gate_name))
    return records


def parse_sensor_readings(source, columns: Mapping[str, str] | None = None) -> list[ChemicalReading]:
    """Parse the chemical-sensor CSV, sorted by (monitor, timestamp, chemical)."""
    cols = dict(SENSOR_COLUMNS)
    if columns:
        cols.update(columns)
    readings = []
    for row_no, row in enumerate(_reader(source, cols.values()), start=1):
        try:
            chem = Chemical.parse(_cell(row, cols["chemical"]))
            ts = parse_timestamp(_cell(row, cols["timestamp"]))
            monitor = int(_cell(row, cols["monitor"]))
            ppm = float(_cell(row, cols["reading"]))
        except ValueError as exc:
            raise ParseError(str(exc), row=row_no) from None
        if not 1 <= monitor <= 9:
            raise ParseError(f"monitor {monitor} outside 1..9", row=row_no)
        if ppm < 0:
            raise ParseError(f"negative reading {ppm}", row=row_no)
        readings.append(ChemicalReading(chem, monitor, ts, ppm))
    readings.sort(key=lambda r: (r.monitor, r.timestamp, r.chemical.value))
    return readings


def parse_meteorology(source, columns: Mapping[str, str] | None = None) -> tuple[list[WindSample], int]:
    """Parse the meteorology CSV.

    Returns (samples sorted by timestamp, count of rows skipped for blank
    direction/speed cells). Blank cells are gaps in the real data, not errors.
    """
    cols = dict(METEO_COLUMNS)
    if columns:
        cols.update(columns)
    samples = []
    skipped = 0
    for row_no, row in enumerate(_reader(source, cols.values()), start=1):
        raw_dir = _cell(row, cols["direction"])
        raw_speed = _cell(row, cols["speed"])
        if not raw_dir or not raw_speed:
            skipped += 1
            continue
        try:
            ts = parse_timestamp(_cell(row, cols["timestamp"]))
            direction = float(raw_dir)
            speed = float(raw_speed)
        except ValueError as exc:
            raise ParseError(str(exc), row=row_no) from None
        if not 0.0 <= direction <= 360.0:
            raise ParseError(f"wind direction {direction} outside [0, 360]", row=row_no)
        if speed < 0:
            raise ParseError(f"negative wind speed {speed}", row=row_no)
        samples.append(WindSample(ts, direction, speed))
    samples.sort(key=lambda s: (s.timestamp, s.direction_deg, s.speed_mps))
    return samples, skipped


def format_slash_timestamp(ts: datetime) -> str:
    return f"{ts.month}/{ts.day}/{ts.year} {ts.hour}:{ts.minute:02d}"


def write_gate_records(records: Iterable[GateRecord], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([GATE_COLUMNS["timestamp"], GATE_COLUMNS["car_id"],
                     GATE_COLUMNS["car_type"], GATE_COLUMNS["gate_name"]])
    for r in records:
        code = "2P" if r.vehicle_type == VehicleType.RANGER else str(int(r.vehicle_type))
        writer.writerow([r.timestamp.strftime("%Y-%m-%d %H:%M:%S"), r.car_id, code, r.gate_name])


def write_sensor_readings(readings: Iterable[ChemicalReading], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([SENSOR_COLUMNS["chemical"], SENSOR_COLUMNS["monitor"],
                     SENSOR_COLUMNS["timestamp"], SENSOR_COLUMNS["reading"]])
    for r in readings:
        writer.writerow([r.chemical.value, r.monitor, format_slash_timestamp(r.timestamp), repr(r.ppm)])


def write_meteorology(samples: Iterable[WindSample], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([METEO_COLUMNS["timestamp"], METEO_COLUMNS["direction"], METEO_COLUMNS["speed"]])
    for s in samples:
        writer.writerow([format_slash_timestamp(s.timestamp), repr(s.direction_deg), repr(s.speed_mps)])


@dataclass(frozen=True)
class MapPalette:
    """Color legend for the preserve bitmap.

    kinds maps an RGB triple to the gate kind it marks; road/background are
    the two non-gate colors. Every other color in the bitmap is an error.
    """

    kinds: Mapping[tuple[int, int, int], GateKind]
    road: tuple[int, int, int]
    background: tuple[int, int, int]


def decode_preserve_map(
    bitmap: np.ndarray,
    palette: MapPalette,
    names: Mapping[tuple[int, int], str],
) -> PreserveMap:
    """Decode the color-coded bitmap into a PreserveMap.

    `bitmap` is an (H, W, 3) uint8 grid whose row 0 is the SOUTH edge, the
    convention the raw data uses. Map coordinates flip the y axis so (0, 0)
    is the north-west corner: y_map = (H - 1) - y_bitmap. `names` is keyed
    by bitmap (x, y) pixel and must name every gate-colored pixel.
    """
    bitmap = np.asarray(bitmap)
    if bitmap.ndim != 3 or bitmap.shape[2] != 3:
        raise MapDecodeError(f"bitmap must be (H, W, 3) RGB, got shape {bitmap.shape}")
    height, width = bitmap.shape[:2]
    road_mask = np.zeros((height, width), dtype=bool)
    gates: list[GateNode] = []
    seen_names: set[str] = set()
    for yb in range(height):
        for x in range(width):
            color = tuple(int(v) for v in bitmap[yb, x])
            y_map = (height - 1) - yb
            if color == palette.background:
                continue
            if color == palette.road:
                road_mask[y_map, x] = True
                continue
            kind = palette.kinds.get(color)
            if kind is None:
                raise MapDecodeError(f"unmapped color {color} at bitmap pixel ({x}, {yb})")
            name = names.get((x, yb))
            if name is None:
                raise MapDecodeError(f"no gate name for pixel ({x}, {yb})")
            if name in seen_names:
                raise MapDecodeError(f"duplicate gate name {name!r}")
            seen_names.add(name)
            gates.append(GateNode(name, kind, x, y_map))
    gates.sort(key=lambda g: g.name)
    return PreserveMap(width, height, tuple(gates), road_mask)


def load_preserve_bitmap(path: str | Path) -> np.ndarray:
    """Read the map image into the south-origin grid decode expects.

    Image files put row 0 at the top (north); the raw-data convention puts
    (0, 0) at the south-west corner, so the rows are flipped here.
    """
    with Image.open(path) as img:
        rgb = np.asarray(img.convert("RGB"))
    return np.flipud(rgb).copy()


def _band_array(value) -> np.ndarray:
    """Normalize one band to float64 in [0, 1].

    Integer imagery is divided by its dtype range (the 0..255 / 0..65535
    span), so a uniform mid-gray 8-bit band becomes constant 0.5 and the
    absolute 0..1 thresholds keep their meaning across scenes. Float input
    is assumed pre-normalized. Values are clamped to [0, 1] either way.
    """
    if isinstance(value, (str, Path)):
        with Image.open(value) as img:
            arr = np.asarray(img)
    else:
        arr = np.asarray(value)
    if arr.ndim == 3:  # grayscale stored with redundant channels
        arr = arr[:, :, 0]
    if arr.ndim != 2:
        raise SceneError(f"band image must be 2-D, got shape {arr.shape}")
    if np.issubdtype(arr.dtype, np.integer):
        info = np.iinfo(arr.dtype)
        span = float(info.max - info.min) or 1.0
        out = (arr.astype(np.float64) - info.min) / span
    else:
        out = arr.astype(np.float64)
    return np.clip(out, 0.0, 1.0)


def load_scene(band_files: Mapping[str, object], capture_date: date) -> MultiSpectralScene:
    """Load six single-band images into a normalized scene.

    `band_files` maps each band id B1..B6 to an image path or array.
    """
    missing = [b for b in BAND_IDS if b not in band_files]
    if missing:
        raise SceneError(f"missing band(s): {missing}")
    bands: dict[str, np.ndarray] = {}
    shape = None
    for band_id in BAND_IDS:
        arr = _band_array(band_files[band_id])
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise SceneError(f"band {band_id} shape {arr.shape} != {shape}")
        bands[band_id] = arr
    return MultiSpectralScene(capture_date, bands)
