import io
import random
from datetime import datetime

import numpy as np
import pytest

from parkwatch.errors import MapDecodeError, ParseError, SceneError
from parkwatch.ingest import (
    Chemical,
    GateKind,
    MapPalette,
    VehicleType,
    decode_preserve_map,
    load_scene,
    parse_gate_records,
    parse_meteorology,
    parse_sensor_readings,
    parse_timestamp,
    write_gate_records,
    write_meteorology,
    write_sensor_readings,
)

GATE_HEADER = "Timestamp,car-id,car-type,gate-name\n"
SENSOR_HEADER = "Chemical,Monitor,Date Time,Reading\n"
METEO_HEADER = "Date,Wind Direction,Wind Speed (m/s)\n"


class TestParseGateRecords:
    def test_header_only_gives_empty_list(self):
        assert parse_gate_records(GATE_HEADER) == []

    def test_rows_sorted_by_car_then_time(self):
        csv_text = GATE_HEADER + (
            "2015-05-01 10:00:00,b,1,g1\n"
            "2015-05-01 09:00:00,b,1,g0\n"
            "2015-05-01 08:00:00,a,2,g2\n"
        )
        records = parse_gate_records(csv_text)
        assert [r.car_id for r in records] == ["a", "b", "b"]
        assert records[1].gate_name == "g0"

    def test_bad_car_type_names_row(self):
        csv_text = GATE_HEADER + (
            "2015-05-01 10:00:00,a,1,g1\n"
            "2015-05-01 10:05:00,a,8,g2\n"
            "2015-05-01 10:10:00,a,2,g3\n"
        )
        with pytest.raises(ParseError, match="row 2"):
            parse_gate_records(csv_text)

    def test_bad_timestamp_rejected(self):
        with pytest.raises(ParseError, match="timestamp"):
            parse_gate_records(GATE_HEADER + "not-a-time,a,1,g1\n")

    def test_empty_gate_name_rejected(self):
        with pytest.raises(ParseError, match="gate name"):
            parse_gate_records(GATE_HEADER + "2015-05-01 10:00:00,a,1,\n")

    def test_ranger_code_2p_is_type_7(self):
        records = parse_gate_records(GATE_HEADER + "2015-05-01 10:00:00,a,2P,g1\n")
        assert records[0].vehicle_type == VehicleType.RANGER

    def test_slash_timestamp_format_accepted(self):
        records = parse_gate_records(GATE_HEADER + "5/1/2015 9:05,a,1,g1\n")
        assert records[0].timestamp == datetime(2015, 5, 1, 9, 5)

    def test_column_mapping_override(self):
        csv_text = "when,who,kind,where\n2015-05-01 10:00:00,a,3,g1\n"
        records = parse_gate_records(csv_text, columns={
            "timestamp": "when", "car_id": "who", "car_type": "kind",
            "gate_name": "where"})
        assert records[0].gate_name == "g1"
        assert records[0].vehicle_type == VehicleType.TRUCK_3AXLE

    def test_shuffle_insensitive(self):
        rows = [f"2015-05-{d:02d} 10:00:00,car-{i},1,g{i}\n"
                for i in range(1, 6) for d in (i, i + 10)]
        shuffled = rows[:]
        random.Random(3).shuffle(shuffled)
        assert shuffled != rows
        assert parse_gate_records(GATE_HEADER + "".join(rows)) == \
            parse_gate_records(GATE_HEADER + "".join(shuffled))

    def test_round_trip(self):
        csv_text = GATE_HEADER + (
            "2015-05-01 10:00:00,a,1,g1\n"
            "2015-06-02 11:30:05,b,2P,g2\n"
        )
        records = parse_gate_records(csv_text)
        buf = io.StringIO()
        write_gate_records(records, buf)
        assert parse_gate_records(buf.getvalue()) == records


class TestParseSensorReadings:
    def test_single_row(self):
        readings = parse_sensor_readings(SENSOR_HEADER + "AGOC-3A,3,4/1/2016 0:00,1.27\n")
        assert len(readings) == 1
        assert readings[0].chemical == Chemical.AGOC_3A
        assert readings[0].monitor == 3
        assert readings[0].ppm == 1.27

    def test_unknown_chemical_named_in_error(self):
        with pytest.raises(ParseError, match="Foo"):
            parse_sensor_readings(SENSOR_HEADER + "Foo,3,4/1/2016 0:00,1.0\n")

    def test_monitor_out_of_range(self):
        with pytest.raises(ParseError, match="monitor 10"):
            parse_sensor_readings(SENSOR_HEADER + "AGOC-3A,10,4/1/2016 0:00,1.0\n")

    def test_negative_reading(self):
        with pytest.raises(ParseError, match="negative"):
            parse_sensor_readings(SENSOR_HEADER + "AGOC-3A,3,4/1/2016 0:00,-0.5\n")

    def test_sorted_by_monitor_time_chemical(self):
        csv_text = SENSOR_HEADER + (
            "Methylosmolene,2,4/1/2016 1:00,1.0\n"
            "AGOC-3A,2,4/1/2016 1:00,1.0\n"
            "Appluimonia,1,4/1/2016 2:00,1.0\n"
        )
        readings = parse_sensor_readings(csv_text)
        assert [(r.monitor, r.chemical.value) for r in readings] == [
            (1, "Appluimonia"), (2, "AGOC-3A"), (2, "Methylosmolene")]

    def test_round_trip(self):
        csv_text = SENSOR_HEADER + (
            "Appluimonia,1,4/1/2016 2:00,1.125\n"
            "Chlorodinine,9,12/31/2016 23:00,0.0375\n"
        )
        readings = parse_sensor_readings(csv_text)
        buf = io.StringIO()
        write_sensor_readings(readings, buf)
        assert parse_sensor_readings(buf.getvalue()) == readings


class TestParseMeteorology:
    def test_blank_cells_skipped_with_count(self):
        csv_text = METEO_HEADER + (
            "4/1/2016 0:00,177.9,0.4\n"
            "4/1/2016 3:00,,\n"
            "4/1/2016 6:00,242.6,1.2\n"
        )
        samples, skipped = parse_meteorology(csv_text)
        assert len(samples) == 2
        assert skipped == 1

    def test_direction_360_accepted(self):
        samples, _ = parse_meteorology(METEO_HEADER + "4/1/2016 0:00,360,1.0\n")
        assert samples[0].direction_deg == 360.0

    def test_direction_361_rejected(self):
        with pytest.raises(ParseError, match="361"):
            parse_meteorology(METEO_HEADER + "4/1/2016 0:00,361,1.0\n")

    def test_negative_speed_rejected(self):
        with pytest.raises(ParseError, match="speed"):
            parse_meteorology(METEO_HEADER + "4/1/2016 0:00,90,-1\n")

    def test_round_trip(self):
        csv_text = METEO_HEADER + (
            "4/1/2016 0:00,177.9,0.4\n"
            "8/15/2016 12:00,13.25,2.75\n"
        )
        samples, _ = parse_meteorology(csv_text)
        buf = io.StringIO()
        write_meteorology(samples, buf)
        assert parse_meteorology(buf.getvalue()) == (samples, 0)


class TestTimestampParsing:
    @pytest.mark.parametrize("text,expected", [
        ("2015-05-01 00:43:28", datetime(2015, 5, 1, 0, 43, 28)),
        ("4/1/2016 0:00", datetime(2016, 4, 1, 0, 0)),
        ("12/31/2016 23:59", datetime(2016, 12, 31, 23, 59)),
    ])
    def test_accepted_formats(self, text, expected):
        assert parse_timestamp(text) == expected

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            parse_timestamp("yesterday")


def _palette():
    return MapPalette(
        kinds={
            (88, 196, 88): GateKind.ENTRANCE,
            (102, 153, 238): GateKind.GENERAL_GATE,
            (238, 102, 102): GateKind.GATE,
        },
        road=(176, 176, 176),
        background=(255, 255, 255),
    )


class TestDecodePreserveMap:
    def test_three_gates_with_flipped_y(self):
        bitmap = np.full((200, 200, 3), 255, dtype=np.uint8)
        bitmap[10, 5] = (88, 196, 88)      # bitmap (x=5, y=10) -> map y 189
        bitmap[40, 30] = (102, 153, 238)
        bitmap[0, 5] = (238, 102, 102)     # bottom row -> map y 199
        names = {(5, 10): "e0", (30, 40): "g0", (5, 0): "gate0"}
        preserve = decode_preserve_map(bitmap, _palette(), names)
        assert len(preserve.gates) == 3
        assert preserve.node("e0").y == 189
        assert preserve.node("g0").y == 159
        assert (preserve.node("gate0").x, preserve.node("gate0").y) == (5, 199)

    def test_y_flip_is_an_involution(self):
        height = 200
        for y in (0, 7, 199):
            assert (height - 1) - ((height - 1) - y) == y

    def test_all_background_is_empty(self):
        bitmap = np.full((20, 20, 3), 255, dtype=np.uint8)
        preserve = decode_preserve_map(bitmap, _palette(), {})
        assert preserve.gates == ()
        assert not preserve.road_mask.any()

    def test_road_pixels_fill_mask(self):
        bitmap = np.full((20, 20, 3), 255, dtype=np.uint8)
        bitmap[0, 3] = (176, 176, 176)  # bitmap south row -> map row 19
        preserve = decode_preserve_map(bitmap, _palette(), {})
        assert preserve.road_mask[19, 3]
        assert preserve.road_mask.sum() == 1

    def test_unmapped_color_rejected(self):
        bitmap = np.full((20, 20, 3), 255, dtype=np.uint8)
        bitmap[4, 4] = (1, 2, 3)
        with pytest.raises(MapDecodeError, match="unmapped"):
            decode_preserve_map(bitmap, _palette(), {})

    def test_duplicate_gate_name_rejected(self):
        bitmap = np.full((20, 20, 3), 255, dtype=np.uint8)
        bitmap[4, 4] = (88, 196, 88)
        bitmap[5, 5] = (88, 196, 88)
        names = {(4, 4): "dup", (5, 5): "dup"}
        with pytest.raises(MapDecodeError, match="duplicate"):
            decode_preserve_map(bitmap, _palette(), names)


class TestLoadScene:
    def test_uniform_midgray_normalizes_to_half(self):
        bands = {b: np.full((10, 10), 128, dtype=np.uint8) for b in
                 ("B1", "B2", "B3", "B4", "B5", "B6")}
        scene = load_scene(bands, datetime(2016, 6, 1).date())
        for b in scene.bands.values():
            assert np.allclose(b, 128 / 255)

    def test_missing_band_named(self):
        bands = {b: np.zeros((4, 4), dtype=np.uint8) for b in ("B1", "B2", "B3", "B4", "B5")}
        with pytest.raises(SceneError, match="B6"):
            load_scene(bands, datetime(2016, 6, 1).date())

    def test_dimension_mismatch_rejected(self):
        bands = {b: np.zeros((650, 650), dtype=np.uint8) for b in
                 ("B1", "B2", "B3", "B4", "B5")}
        bands["B6"] = np.zeros((100, 100), dtype=np.uint8)
        with pytest.raises(SceneError, match="shape"):
            load_scene(bands, datetime(2016, 6, 1).date())

    def test_float_input_clamped(self):
        bands = {b: np.full((4, 4), 1.5) for b in ("B1", "B2", "B3", "B4", "B5", "B6")}
        scene = load_scene(bands, datetime(2016, 6, 1).date())
        assert scene.bands["B1"].max() == 1.0

    def test_sixteen_bit_bands_normalized_by_dtype_range(self):
        bands = {b: np.full((4, 4), 65535 // 4, dtype=np.uint16)
                 for b in ("B1", "B2", "B3", "B4", "B5", "B6")}
        scene = load_scene(bands, datetime(2016, 6, 1).date())
        assert np.allclose(scene.bands["B3"], (65535 // 4) / 65535)
