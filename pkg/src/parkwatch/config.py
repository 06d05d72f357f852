"""Pipeline configuration and sidecar files.

One config file (JSON or TOML) carries every tunable default plus the
data that only exists graphically in the source material: the map color
palette, gate names, sensor-site coordinates, and per-scene exclusion
rectangles. The analysis code never invents coordinates; they must be
supplied here (the synthetic generator writes its own sidecars).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ConfigError
from .imagery import ExclusionRect
from .ingest import Factory, GateKind, MapPalette, SensorSite

# The four factories south of the preserve, in sensor-map coordinates.
DEFAULT_FACTORIES = (
    Factory("Roadrunner Fitness Electronics", (89.0, 27.0)),
    Factory("Kasios Office Furniture", (90.0, 21.0)),
    Factory("Radiance ColourTek", (109.0, 26.0)),
    Factory("Indigo Sol Boards", (120.0, 22.0)),
)


@dataclass
class PipelineConfig:
    seed: int = 0
    # clustering
    per_stratum: int = 100
    k: int = 7
    n_axes: int = 20
    variance_threshold: float | None = None  # alternative to a fixed axis count
    # sensors
    sensor_span: float = 0.05
    meteo_span: float = 0.20
    tukey_k: float = 3.0
    floor_ppm: float = 10.0
    # traffic
    surge_factor: float = 2.0
    # attribution
    cone_half_angle_deg: float = 30.0
    calm_threshold_mps: float = 0.3
    max_wind_gap_hours: float = 3.0
    max_range: float | None = None  # optional distance cutoff for suspects
    # imagery
    ndvi_threshold: float = 0.1
    b5_threshold: float = 0.7
    b6_threshold: float = 0.7
    lake_bbox_px: tuple[float, float] = (96.0, 98.0)
    lake_length_feet: float = 3000.0
    scene_size_px: int = 650
    # CSV header remapping, e.g. {"timestamp": "Date"}; None keeps the
    # public challenge headers
    gate_columns: dict | None = None
    sensor_columns: dict | None = None
    meteo_columns: dict | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lake_bbox_px"] = list(self.lake_bbox_px)
        return out


def _read_structured(path: Path) -> dict:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def load_config(path: str | Path | None) -> PipelineConfig:
    config = PipelineConfig()
    if path is None:
        return config
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    data = _read_structured(path)
    for key, value in data.items():
        if not hasattr(config, key):
            raise ConfigError(f"unknown config key {key!r}")
        if key == "lake_bbox_px":
            value = (float(value[0]), float(value[1]))
        setattr(config, key, value)
    return config


def _parse_color(text: str) -> tuple[int, int, int]:
    text = text.lstrip("#")
    if len(text) != 6:
        raise ConfigError(f"color {text!r} is not #RRGGBB")
    return tuple(int(text[i:i + 2], 16) for i in (0, 2, 4))


def color_hex(color: tuple[int, int, int]) -> str:
    return "#{:02x}{:02x}{:02x}".format(*color)


def load_map_sidecar(path: str | Path) -> tuple[MapPalette, dict[tuple[int, int], str]]:
    """Palette and pixel->gate-name table for the preserve bitmap.

    Expected JSON shape:
      {"palette": {"#rrggbb": "Entrance", ...},
       "road_color": "#rrggbb", "background_color": "#rrggbb",
       "gate_names": {"x,y": "entrance0", ...}}   (bitmap pixel keys)
    """
    data = _read_structured(Path(path))
    try:
        kinds = {
            _parse_color(color): GateKind.parse(kind)
            for color, kind in data["palette"].items()
        }
        palette = MapPalette(
            kinds=kinds,
            road=_parse_color(data["road_color"]),
            background=_parse_color(data["background_color"]),
        )
        names = {}
        for key, name in data["gate_names"].items():
            x_text, y_text = key.split(",")
            names[(int(x_text), int(y_text))] = name
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad map sidecar {path}: {exc}") from None
    return palette, names


def load_sites_sidecar(path: str | Path) -> tuple[dict[int, SensorSite], list[Factory]]:
    """Sensor-site and factory coordinates.

    Expected JSON shape:
      {"sites": {"1": [x, y], ...}, "factories": [{"name": ..., "coord": [x, y]}, ...]}
    Factories default to the four canonical plants when omitted.
    """
    data = _read_structured(Path(path))
    try:
        sites = {
            int(monitor): SensorSite(int(monitor), (float(xy[0]), float(xy[1])))
            for monitor, xy in data["sites"].items()
        }
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad sites sidecar {path}: {exc}") from None
    if "factories" in data:
        factories = [
            Factory(item["name"], (float(item["coord"][0]), float(item["coord"][1])))
            for item in data["factories"]
        ]
    else:
        factories = list(DEFAULT_FACTORIES)
    return sites, factories


def load_scenes_sidecar(path: str | Path) -> list[dict]:
    """Per-scene metadata: capture date and exclusion rectangles.

    Expected JSON shape:
      {"scenes": [{"date": "YYYY-MM-DD", "exclusions": [[x0, y0, x1, y1], ...]}, ...]}
    """
    data = _read_structured(Path(path))
    scenes = []
    for item in data.get("scenes", []):
        rects = [ExclusionRect(*map(int, rect)) for rect in item.get("exclusions", [])]
        scenes.append({"date": item["date"], "exclusions": rects})
    return scenes
