import json

import pytest

from parkwatch.config import DEFAULT_FACTORIES, PipelineConfig, load_config
from parkwatch.errors import ConfigError
from parkwatch.synth import ScenarioConfig
from parkwatch.trajectory import _month_span


class TestPipelineConfig:
    def test_defaults(self):
        cfg = PipelineConfig()
        assert cfg.k == 7
        assert cfg.n_axes == 20
        assert cfg.ndvi_threshold == 0.1
        assert cfg.cone_half_angle_deg == 30.0
        assert cfg.floor_ppm == 10.0
        assert cfg.lake_bbox_px == (96.0, 98.0)

    def test_load_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"k": 5, "surge_factor": 3.0}))
        cfg = load_config(path)
        assert cfg.k == 5
        assert cfg.surge_factor == 3.0
        assert cfg.n_axes == 20  # untouched default

    def test_load_toml(self, tmp_path):
        path = tmp_path / "cfg.toml"
        path.write_text('k = 4\nndvi_threshold = 0.2\n')
        cfg = load_config(path)
        assert cfg.k == 4
        assert cfg.ndvi_threshold == 0.2

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"bogus": 1}))
        with pytest.raises(ConfigError, match="bogus"):
            load_config(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.json")

    def test_canonical_factories(self):
        coords = {f.name: f.coord for f in DEFAULT_FACTORIES}
        assert coords["Roadrunner Fitness Electronics"] == (89.0, 27.0)
        assert coords["Kasios Office Furniture"] == (90.0, 21.0)
        assert coords["Radiance ColourTek"] == (109.0, 26.0)
        assert coords["Indigo Sol Boards"] == (120.0, 22.0)


class TestScenarioConfig:
    def test_from_dict_coerces_type_keys(self):
        cfg = ScenarioConfig.from_dict({"vehicles_per_type": {"1": 5, "7": 2}})
        assert cfg.vehicles_per_type == {1: 5, 7: 2}

    def test_unknown_scenario_key_rejected(self):
        with pytest.raises(ConfigError, match="nonsense"):
            ScenarioConfig.from_dict({"nonsense": True})


class TestMonthSpan:
    def test_year_boundary(self):
        assert _month_span("2015-11", "2016-02") == \
            ["2015-11", "2015-12", "2016-01", "2016-02"]

    def test_single_month(self):
        assert _month_span("2016-04", "2016-04") == ["2016-04"]
