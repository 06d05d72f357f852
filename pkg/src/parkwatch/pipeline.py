"""Pipeline stages behind the CLI subcommands.

Each stage reads its inputs from a data directory laid out the way the
synthetic generator writes it (the same layout real challenge files can be
arranged into), writes artifacts into an output directory, and returns a
summary dict. `run_all` chains every stage into one deterministic tree.

Data directory layout:
  gate_records.csv, sensor_readings.csv, meteorology.csv
  map.png + map_sidecar.json
  sites.json (sensor/factory coordinates)
  scenes/<date>_B<k>.png + scenes.json (exclusion rectangles)
"""

from __future__ import annotations

import csv
import datetime as dt
import json
from pathlib import Path

import numpy as np

from . import attribution, charts, clustering, imagery, report, sensors, trajectory
from .config import PipelineConfig, load_map_sidecar, load_scenes_sidecar, load_sites_sidecar
from .errors import ConfigError
from .ingest import (
    CHEMICALS,
    Chemical,
    decode_preserve_map,
    load_preserve_bitmap,
    load_scene,
    parse_gate_records,
    parse_meteorology,
    parse_sensor_readings,
    write_gate_records,
    write_meteorology,
    write_sensor_readings,
)

GATE_CSV = "gate_records.csv"
SENSOR_CSV = "sensor_readings.csv"
METEO_CSV = "meteorology.csv"
MAP_PNG = "map.png"
MAP_SIDECAR = "map_sidecar.json"
SITES_SIDECAR = "sites.json"
SCENES_SIDECAR = "scenes.json"
SCENES_DIR = "scenes"


def _require(path: Path) -> Path:
    if not path.exists():
        raise ConfigError(f"required input not found: {path}")
    return path


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_map(in_dir: Path):
    palette, names = load_map_sidecar(_require(in_dir / MAP_SIDECAR))
    bitmap = load_preserve_bitmap(_require(in_dir / MAP_PNG))
    return decode_preserve_map(bitmap, palette, names)


def _load_trajectories(in_dir: Path, cfg: PipelineConfig):
    preserve = _load_map(in_dir)
    records = parse_gate_records(_require(in_dir / GATE_CSV), cfg.gate_columns)
    return preserve, records, trajectory.build_trajectories(records, preserve)


def _day_float(ts: dt.datetime, origin: dt.datetime) -> float:
    return (ts - origin).total_seconds() / 86400.0


def run_ingest(in_dir: Path, out_dir: Path, cfg: PipelineConfig) -> dict:
    """Parse and validate every available input; re-serialize canonically."""
    out_dir.mkdir(parents=True, exist_ok=True)
    summary: dict = {}
    records = parse_gate_records(_require(in_dir / GATE_CSV), cfg.gate_columns)
    summary["gate_records"] = len(records)
    with open(out_dir / "canonical_gate_records.csv", "w", encoding="utf-8", newline="\n") as fh:
        write_gate_records(records, fh)
    readings = parse_sensor_readings(_require(in_dir / SENSOR_CSV), cfg.sensor_columns)
    summary["sensor_readings"] = len(readings)
    with open(out_dir / "canonical_sensor_readings.csv", "w", encoding="utf-8", newline="\n") as fh:
        write_sensor_readings(readings, fh)
    winds, blank = parse_meteorology(_require(in_dir / METEO_CSV), cfg.meteo_columns)
    summary["wind_samples"] = len(winds)
    summary["meteorology_blank_rows_skipped"] = blank
    summary["meteorology_months"] = sorted({f"{w.timestamp:%Y-%m}" for w in winds})
    with open(out_dir / "canonical_meteorology.csv", "w", encoding="utf-8", newline="\n") as fh:
        write_meteorology(winds, fh)
    preserve = _load_map(in_dir)
    summary["map_gates"] = len(preserve.gates)
    summary["road_pixels"] = int(preserve.road_mask.sum())
    scene_meta = load_scenes_sidecar(_require(in_dir / SCENES_SIDECAR))
    summary["scenes"] = len(scene_meta)
    _write_json(out_dir / "summary.json", summary)
    return summary


def _overlay_spec(title: str, trajs, preserve, mean_path=None) -> charts.ChartSpec:
    roads = [(int(x), int(y)) for y, x in np.argwhere(preserve.road_mask)]
    return charts.ChartSpec(
        kind=charts.ChartKind.TRAJECTORY_OVERLAY,
        data={
            "trajectories": [[p.xy for p in t.points] for t in trajs],
            "mean": mean_path,
            "bounds": (preserve.width, preserve.height),
            "roads": roads,
        },
        width=520, height=520, title=title, alpha=0.12,
    )


def run_trajectories(in_dir: Path, out_dir: Path, cfg: PipelineConfig) -> dict:
    """Build trajectories, run the four traffic detectors, emit histograms."""
    out_dir.mkdir(parents=True, exist_ok=True)
    chart_dir = out_dir / "charts"
    chart_dir.mkdir(exist_ok=True)
    preserve, records, trajs = _load_trajectories(in_dir, cfg)
    digest = report.file_digest(in_dir / GATE_CSV)

    findings = []
    findings += trajectory.detect_terminated_inside(trajs)
    findings += trajectory.detect_illegal_gate_pass(trajs)
    findings += trajectory.ranger_coverage_gaps(trajs, preserve)
    hists = trajectory.monthly_traffic_histogram(trajs, "type")
    surge = trajectory.detect_traffic_surge(hists, cfg.surge_factor)
    findings += surge

    with open(out_dir / "findings.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for finding in findings:
            entry = finding.to_dict()
            entry["input_digest"] = digest
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    _write_csv(out_dir / "findings.csv", ["rule", "subject", "evidence"],
               [[f.rule.value, f.subject, f.evidence] for f in findings])
    _write_csv(out_dir / "histograms.csv", ["stratum", "month", "count"],
               [[h.stratum, month, h.bins[month]] for h in hists for month in sorted(h.bins)])
    _write_json(out_dir / "diagnostics.json", {
        "trajectories": len(trajs),
        "collapsed_single_point_visits": trajectory.count_collapsed_visits(trajs),
        "findings_by_rule": {
            rule.value: sum(1 for f in findings if f.rule == rule)
            for rule in trajectory.AnomalyRule
        },
    })

    surge_months = sorted({f.subject for f in surge})
    for hist in hists:
        months = sorted(hist.bins)
        spec = charts.ChartSpec(
            kind=charts.ChartKind.HISTOGRAM,
            data={"labels": months, "counts": [hist.bins[m] for m in months],
                  "highlight": surge_months},
            title=f"monthly passes, {hist.stratum}",
        )
        charts.save_chart(chart_dir / f"hist_{hist.stratum.replace(':', '_')}.svg", spec)
    by_type: dict[int, list] = {}
    for traj in trajs:
        by_type.setdefault(int(traj.vehicle_type), []).append(traj)
    for vtype in sorted(by_type):
        group = by_type[vtype]
        padded = trajectory.pad_trajectories(group, max(len(t.points) for t in group))
        mean_path = trajectory.mean_trajectory(padded)
        charts.save_chart(chart_dir / f"overlay_type_{vtype}.svg",
                          _overlay_spec(f"type {vtype} trajectories", group, preserve, mean_path))
    return {"findings": len(findings), "trajectories": len(trajs)}


def run_cluster(in_dir: Path, out_dir: Path, cfg: PipelineConfig) -> dict:
    """Stratified sample, PCA + scree, k-means, proportions heat map."""
    out_dir.mkdir(parents=True, exist_ok=True)
    chart_dir = out_dir / "charts"
    chart_dir.mkdir(exist_ok=True)
    preserve, _, trajs = _load_trajectories(in_dir, cfg)
    sampled = clustering.stratified_sample(trajs, cfg.per_stratum, cfg.seed)
    matrix = clustering.vectorize(sampled)
    model = clustering.pca_fit(matrix)
    summary = clustering.scree(model)
    _write_csv(out_dir / "scree.csv", ["axis", "eigenvalue", "ratio", "cumulative"],
               [[i + 1, repr(float(model.eigenvalues[i])), repr(float(summary.ratios[i])),
                 repr(float(summary.cumulative[i]))]
                for i in range(model.eigenvalues.size)])
    charts.save_chart(chart_dir / "scree.svg", charts.ChartSpec(
        kind=charts.ChartKind.SCREE_PLOT,
        data={"ratios": [float(r) for r in summary.ratios],
              "cumulative": [float(c) for c in summary.cumulative]},
        title="eigenvalue ratios",
    ))
    if cfg.variance_threshold is not None:
        n_axes = clustering.axes_for_cumulative_variance(summary, cfg.variance_threshold)
    else:
        n_axes = min(cfg.n_axes, model.eigenvalues.size)
    projected = clustering.pca_project(model, matrix, n_axes)
    kmodel = clustering.kmeans_fit(projected, cfg.k, cfg.seed)
    proportions = clustering.cluster_type_proportions(kmodel, sampled)

    _write_json(out_dir / "model.json", {
        "n_axes": n_axes,
        "k": kmodel.k,
        "seed": cfg.seed,
        "mean": [float(v) for v in model.mean],
        "eigenvalues": [float(v) for v in model.eigenvalues],
        "axes": [[float(v) for v in axis] for axis in model.axes],
        "centroids": [[float(v) for v in c] for c in kmodel.centroids],
        "assignments": {car: int(c) for car, c in zip(matrix.row_ids, kmodel.assignments)},
        "inertia": kmodel.inertia,
    })
    _write_csv(out_dir / "proportions.csv", ["cluster", "vehicle_type", "proportion"],
               [[c, t + 1, repr(float(proportions.proportions[c, t]))]
                for c in range(kmodel.k) for t in range(7)])
    charts.save_chart(chart_dir / "proportions_heatmap.svg", charts.ChartSpec(
        kind=charts.ChartKind.HEAT_MAP,
        data={"values": [[float(v) for v in row] for row in proportions.proportions],
              "row_labels": [f"cluster {c}" for c in range(kmodel.k)],
              "col_labels": [f"type {t}" for t in range(1, 8)]},
        title="vehicle types per cluster",
    ))
    colors = [int(c) for c in kmodel.assignments]
    first_dims = projected[:, :min(5, projected.shape[1])]
    charts.save_chart(chart_dir / "pairs_plot.svg", charts.ChartSpec(
        kind=charts.ChartKind.SCATTER_MATRIX,
        data={"matrix": [[float(v) for v in row] for row in first_dims],
              "dims": first_dims.shape[1], "colors": colors},
        width=720, height=720, title="projected trajectories (first dims)",
    ))
    charts.save_chart(chart_dir / "parallel_coordinates.svg", charts.ChartSpec(
        kind=charts.ChartKind.PARALLEL_COORDINATES,
        data={"rows": [[float(v) for v in row] for row in first_dims],
              "axis_labels": [f"dim {i + 1}" for i in range(first_dims.shape[1])],
              "colors": colors},
        title="projected trajectories",
    ))

    assignments = {car: int(c) for car, c in zip(matrix.row_ids, kmodel.assignments)}
    hists = trajectory.monthly_traffic_histogram(sampled, "cluster", assignments)
    _write_csv(out_dir / "cluster_histograms.csv", ["stratum", "month", "count"],
               [[h.stratum, month, h.bins[month]] for h in hists for month in sorted(h.bins)])
    by_cluster: dict[int, list] = {}
    for traj in sampled:
        by_cluster.setdefault(assignments[traj.car_id], []).append(traj)
    for cluster in sorted(by_cluster):
        group = by_cluster[cluster]
        padded = trajectory.pad_trajectories(group, max(len(t.points) for t in group))
        mean_path = trajectory.mean_trajectory(padded)
        charts.save_chart(chart_dir / f"overlay_cluster_{cluster}.svg",
                          _overlay_spec(f"cluster {cluster} trajectories", group, preserve, mean_path))
    return {"sampled": len(sampled), "n_axes": n_axes, "k": kmodel.k,
            "inertia": kmodel.inertia}


def run_sensors(in_dir: Path, out_dir: Path, cfg: PipelineConfig) -> dict:
    """Failure audit, quantiles, high-value labels, smoothing, correlations."""
    out_dir.mkdir(parents=True, exist_ok=True)
    chart_dir = out_dir / "charts"
    chart_dir.mkdir(exist_ok=True)
    readings = parse_sensor_readings(_require(in_dir / SENSOR_CSV), cfg.sensor_columns)

    events = sensors.audit_failures(readings)
    _write_csv(out_dir / "failures.csv", ["monitor", "timestamp", "missing"],
               [[e.monitor, e.timestamp.isoformat(sep=" "),
                 ";".join(c.value for c in e.missing)] for e in events])
    origin = min(r.timestamp for r in readings)
    end = max(r.timestamp for r in readings)
    rows = []
    for monitor in range(1, 10):
        ticks = [_day_float(e.timestamp, origin) for e in events if e.monitor == monitor]
        rows.append((f"sensor {monitor}", ticks))
    charts.save_chart(chart_dir / "failure_timeline.svg", charts.ChartSpec(
        kind=charts.ChartKind.FAILURE_TIMELINE,
        data={"rows": rows, "t_min": 0.0, "t_max": _day_float(end, origin)},
        title="recording failures (days from first reading)",
    ))

    summaries = sensors.quantile_summary(readings)
    _write_csv(out_dir / "quantiles.csv",
               ["monitor", "chemical", "q0", "q25", "q50", "q75", "q100", "count"],
               [[s.monitor, s.chemical.value, repr(s.q0), repr(s.q25), repr(s.q50),
                 repr(s.q75), repr(s.q100), s.count] for s in summaries])

    labels = sensors.label_high_values(readings, cfg.tukey_k, cfg.floor_ppm)
    _write_csv(out_dir / "labels.csv", ["monitor", "chemical", "timestamp", "ppm", "label"],
               [[l.monitor, l.chemical.value, l.timestamp.isoformat(sep=" "),
                 repr(l.ppm), l.label.value] for l in labels])
    with open(out_dir / "labels.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for l in labels:
            fh.write(json.dumps({
                "monitor": l.monitor, "chemical": l.chemical.value,
                "timestamp": l.timestamp.isoformat(sep=" "), "ppm": l.ppm,
                "label": l.label.value, "small_group": l.small_group,
            }, sort_keys=True) + "\n")

    series: dict[tuple[int, Chemical], list] = {}
    for r in readings:
        series.setdefault((r.monitor, r.chemical), []).append(r)
    for (monitor, chemical) in sorted(series, key=lambda k: (k[0], k[1].value)):
        group = series[(monitor, chemical)]
        values = [r.ppm for r in group]
        smoothed = sensors.smooth_series(values, cfg.sensor_span)
        times = [_day_float(r.timestamp, origin) for r in group]
        charts.save_chart(
            chart_dir / f"timeseries_m{monitor}_{chemical.value}.svg",
            charts.ChartSpec(
                kind=charts.ChartKind.TIME_SERIES,
                data={"points": list(zip(times, values)),
                      "smoothed": list(zip(times, smoothed))},
                title=f"sensor {monitor} {chemical.value} (span {cfg.sensor_span:g})",
            ))

    # static per-monitor views of the four chemical series against each
    # other, slots aligned on shared timestamps, high slots highlighted
    aligned: dict[int, dict] = {}
    for r in readings:
        aligned.setdefault(r.monitor, {}).setdefault(r.timestamp, {})[r.chemical] = r.ppm
    high_slots = {(l.monitor, l.timestamp) for l in labels if l.label == sensors.Label.HIGH}
    for monitor in sorted(aligned):
        complete = [ts for ts in sorted(aligned[monitor])
                    if len(aligned[monitor][ts]) == len(CHEMICALS)]
        step = max(1, len(complete) // 600)  # keeps the SVGs a sane size
        kept = complete[::step]
        if not kept:
            continue
        rows = [[aligned[monitor][ts][c] for c in CHEMICALS] for ts in kept]
        colors = [1 if (monitor, ts) in high_slots else 0 for ts in kept]
        names = [c.value for c in CHEMICALS]
        charts.save_chart(chart_dir / f"pairs_m{monitor}.svg", charts.ChartSpec(
            kind=charts.ChartKind.SCATTER_MATRIX,
            data={"matrix": rows, "dims": 4, "colors": colors},
            width=640, height=640,
            title=f"sensor {monitor} chemical pairs (1:{step} slots)",
        ))
        charts.save_chart(chart_dir / f"parallel_m{monitor}.svg", charts.ChartSpec(
            kind=charts.ChartKind.PARALLEL_COORDINATES,
            data={"rows": rows, "axis_labels": names, "colors": colors},
            title=f"sensor {monitor} chemicals, scaled per axis",
        ))

    correlations = sensors.pairwise_correlation(readings)
    corr_rows = []
    for corr in correlations:
        for i, a in enumerate(corr.chemicals):
            for j, b in enumerate(corr.chemicals):
                if j <= i:
                    continue
                value = "" if not corr.defined[i, j] else repr(float(corr.r[i, j]))
                corr_rows.append([corr.monitor, a.value, b.value, value])
    _write_csv(out_dir / "correlations.csv", ["monitor", "chemical_a", "chemical_b", "r"],
               corr_rows)
    return {"failures": len(events),
            "high_labels": sum(1 for l in labels if l.label == sensors.Label.HIGH)}


def run_attribute(in_dir: Path, out_dir: Path, cfg: PipelineConfig) -> dict:
    """Suspect tables from high labels, wind matching, and upwind cones."""
    out_dir.mkdir(parents=True, exist_ok=True)
    chart_dir = out_dir / "charts"
    chart_dir.mkdir(exist_ok=True)
    readings = parse_sensor_readings(_require(in_dir / SENSOR_CSV), cfg.sensor_columns)
    winds, _ = parse_meteorology(_require(in_dir / METEO_CSV), cfg.meteo_columns)
    sites, factories = load_sites_sidecar(_require(in_dir / SITES_SIDECAR))
    labels = sensors.label_high_values(readings, cfg.tukey_k, cfg.floor_ppm)
    tables = attribution.build_suspect_tables(
        labels, winds, sites, factories,
        half_angle_deg=cfg.cone_half_angle_deg,
        calm_threshold_mps=cfg.calm_threshold_mps,
        max_gap=dt.timedelta(hours=cfg.max_wind_gap_hours),
        max_range=cfg.max_range,
    )
    _write_csv(out_dir / "suspects.csv",
               ["chemical", "monitor", "date", "wind_arrow", "wind_direction_deg",
                "wind_speed_mps", "verdict"],
               [[r.chemical.value, r.monitor, r.date.isoformat(), r.wind_arrow,
                 repr(r.wind_direction_deg), repr(r.wind_speed_mps), r.verdict.render()]
                for r in tables.rows])
    for chemical in CHEMICALS:
        rows = tables.for_chemical(chemical)
        lines = [f"high {chemical.value} readings and upwind suspects", ""]
        lines.append(f"{'sensor':>6}  {'date':<12} {'wind':<4} suspects")
        for r in rows:
            lines.append(f"{r.monitor:>6}  {r.date.isoformat():<12} {r.wind_arrow:<4} "
                         f"{r.verdict.render()}")
        (out_dir / f"suspects_{chemical.value}.txt").write_text(
            "\n".join(lines) + "\n", encoding="utf-8")
    _write_csv(out_dir / "unmatched.csv", ["monitor", "date", "chemical"],
               [[m, d.isoformat(), c.value] for m, d, c in tables.unmatched])

    counts: dict[str, int] = {f.name: 0 for f in factories}
    for row in tables.rows:
        if row.verdict.kind == attribution.VerdictKind.ALL:
            for f in factories:
                counts[f.name] += 1
        else:
            for name in row.verdict.factories:
                counts[name] += 1
    _write_json(out_dir / "summary.json", {
        "rows": len(tables.rows),
        "unmatched": len(tables.unmatched),
        "verdict_counts_by_factory": counts,
        "indeterminate_rows": sum(
            1 for r in tables.rows if r.verdict.kind == attribution.VerdictKind.INDETERMINATE),
    })

    by_month: dict[str, list] = {}
    for w in winds:
        by_month.setdefault(f"{w.timestamp:%Y-%m}", []).append(w)
    for month in sorted(by_month):
        group = by_month[month]
        charts.save_chart(chart_dir / f"hexbin_wind_{month}.svg", charts.ChartSpec(
            kind=charts.ChartKind.HEXBIN_WIND,
            data={"points": [(w.direction_deg, w.speed_mps) for w in group]},
            title=f"wind direction vs speed, {month}",
        ))
        directions = [w.direction_deg for w in group]
        days = [_day_float(w.timestamp, group[0].timestamp) for w in group]
        charts.save_chart(chart_dir / f"wind_direction_{month}.svg", charts.ChartSpec(
            kind=charts.ChartKind.TIME_SERIES,
            data={"points": list(zip(days, directions)),
                  "smoothed": list(zip(days, sensors.smooth_series(directions, cfg.meteo_span)))},
            title=f"wind direction over {month} (span {cfg.meteo_span:g})",
        ))
    return {"rows": len(tables.rows), "unmatched": len(tables.unmatched)}


def _discover_scenes(in_dir: Path) -> list[tuple[str, dict]]:
    scene_dir = _require(in_dir / SCENES_DIR)
    groups: dict[str, dict] = {}
    for path in sorted(scene_dir.glob("*_B?.png")):
        stem = path.stem
        date_text, band_id = stem.rsplit("_", 1)
        groups.setdefault(date_text, {})[band_id] = path
    return sorted(groups.items())


def run_imagery(in_dir: Path, out_dir: Path, cfg: PipelineConfig) -> dict:
    """Scale estimate, composites, index masks with exclusions, trends."""
    out_dir.mkdir(parents=True, exist_ok=True)
    scale = imagery.estimate_scale(cfg.lake_bbox_px, cfg.lake_length_feet, cfg.scene_size_px)
    _write_csv(out_dir / "scale.csv",
               ["feet_per_pixel", "meters_per_pixel", "image_extent_feet", "diag_pixels"],
               [[repr(scale.feet_per_pixel), repr(scale.meters_per_pixel),
                 repr(scale.image_extent_feet), repr(scale.diag_pixels)]])
    exclusions_by_date = {
        meta["date"]: meta["exclusions"]
        for meta in load_scenes_sidecar(_require(in_dir / SCENES_SIDECAR))
    }
    stats_list = []
    composite_dir = out_dir / "composites"
    composite_dir.mkdir(exist_ok=True)
    index_dir = out_dir / "indexes"
    index_dir.mkdir(exist_ok=True)
    for date_text, band_files in _discover_scenes(in_dir):
        capture = dt.date.fromisoformat(date_text)
        scene = load_scene(band_files, capture)
        exclusions = exclusions_by_date.get(date_text, [])
        imagery.write_composite_png(composite_dir / f"natural_{date_text}.png",
                                    imagery.composite_false_color(scene, ("B3", "B2", "B1")))
        imagery.write_composite_png(composite_dir / f"vegetation_{date_text}.png",
                                    imagery.composite_false_color(scene, ("B4", "B3", "B2")))
        imagery.write_composite_png(composite_dir / f"dryness_{date_text}.png",
                                    imagery.composite_false_color(scene, ("B5", "B4", "B2")))
        imagery.write_index_pgm(index_dir / f"ndvi_{date_text}.pgm", imagery.ndvi(scene))
        stats_list.append(imagery.scene_stats(
            scene, exclusions, cfg.ndvi_threshold, cfg.b5_threshold, cfg.b6_threshold))
    stats_list.sort(key=lambda s: s.capture_date)
    _write_csv(out_dir / "stats.csv",
               ["date", "fraction_vegetated", "fraction_dry", "fraction_mineral_rich",
                "excluded_pixel_count"],
               [[s.capture_date.isoformat(), repr(s.fraction_vegetated), repr(s.fraction_dry),
                 repr(s.fraction_mineral_rich), s.excluded_pixel_count] for s in stats_list])
    deltas = imagery.trend_series(stats_list)
    _write_csv(out_dir / "trends.csv",
               ["date_from", "date_to", "delta_vegetated", "delta_dry", "delta_mineral_rich"],
               [[d.date_from.isoformat(), d.date_to.isoformat(), repr(d.vegetated),
                 repr(d.dry), repr(d.mineral_rich)] for d in deltas])
    _write_json(out_dir / "annotations.json", {
        "orientation": imagery.IMAGE_ORIENTATION,
        "scene_dates": [s.capture_date.isoformat() for s in stats_list],
    })
    return {"scenes": len(stats_list),
            "feet_per_pixel": scale.feet_per_pixel}


def run_report(results_dir: Path, data_dir: Path, out_dir: Path, cfg: PipelineConfig) -> dict:
    """Assemble the three-section findings report from stage outputs."""
    out_dir.mkdir(parents=True, exist_ok=True)
    traffic = []
    findings_path = results_dir / "trajectories" / "findings.jsonl"
    if findings_path.exists():
        for line in findings_path.read_text(encoding="utf-8").splitlines():
            traffic.append(json.loads(line))

    chemical = []
    sensor_digest = report.file_digest(data_dir / SENSOR_CSV) if (data_dir / SENSOR_CSV).exists() else ""
    failures_path = results_dir / "sensors" / "failures.csv"
    if failures_path.exists():
        with open(failures_path, encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                chemical.append({
                    "rule": "RecordingFailure",
                    "subject": f"sensor {row['monitor']}",
                    "evidence": f"sensor {row['monitor']} missing {row['missing']} "
                                f"at {row['timestamp']}",
                    "details": {"monitor": int(row["monitor"]),
                                "timestamp": row["timestamp"],
                                "missing": row["missing"].split(";")},
                    "input_digest": sensor_digest,
                })
    suspects_path = results_dir / "attribution" / "suspects.csv"
    if suspects_path.exists():
        with open(suspects_path, encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                chemical.append({
                    "rule": "SuspectAttribution",
                    "subject": f"sensor {row['monitor']}",
                    "evidence": f"high {row['chemical']} at sensor {row['monitor']} on "
                                f"{row['date']} (wind {row['wind_arrow']}): {row['verdict']}",
                    "details": dict(row),
                    "input_digest": sensor_digest,
                })

    imagery_findings = []
    stats_path = results_dir / "imagery" / "stats.csv"
    if stats_path.exists():
        scene_digest = report.file_digest(stats_path)
        with open(stats_path, encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                imagery_findings.append({
                    "rule": "SceneStats",
                    "subject": row["date"],
                    "evidence": f"{row['date']}: vegetated {float(row['fraction_vegetated']):.4f}, "
                                f"dry {float(row['fraction_dry']):.4f}, "
                                f"mineral-rich {float(row['fraction_mineral_rich']):.4f}",
                    "details": dict(row),
                    "input_digest": scene_digest,
                })
        trends_path = results_dir / "imagery" / "trends.csv"
        if trends_path.exists():
            with open(trends_path, encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    direction = "declined" if float(row["delta_vegetated"]) < 0 else "improved"
                    imagery_findings.append({
                        "rule": "VegetationTrend",
                        "subject": f"{row['date_from']}..{row['date_to']}",
                        "evidence": f"vegetated fraction {direction} by "
                                    f"{abs(float(row['delta_vegetated'])):.4f} from "
                                    f"{row['date_from']} to {row['date_to']}",
                        "details": dict(row),
                        "input_digest": scene_digest,
                    })

    inputs = {}
    for name in (GATE_CSV, SENSOR_CSV, METEO_CSV, MAP_PNG, MAP_SIDECAR, SITES_SIDECAR,
                 SCENES_SIDECAR):
        path = data_dir / name
        if path.exists():
            inputs[name] = report.file_digest(path)
    document = report.build_report(traffic, chemical, imagery_findings, {
        "inputs": inputs,
        "config": cfg.to_dict(),
    })
    report.emit_report(document, out_dir, fmt="both")
    return {"traffic": len(traffic), "chemical": len(chemical),
            "imagery": len(imagery_findings)}


def run_all(in_dir: Path, out_dir: Path, cfg: PipelineConfig) -> dict:
    """Run every stage into subdirectories of out_dir."""
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {
        "ingest": run_ingest(in_dir, out_dir / "ingest", cfg),
        "trajectories": run_trajectories(in_dir, out_dir / "trajectories", cfg),
        "cluster": run_cluster(in_dir, out_dir / "cluster", cfg),
        "sensors": run_sensors(in_dir, out_dir / "sensors", cfg),
        "attribution": run_attribute(in_dir, out_dir / "attribution", cfg),
        "imagery": run_imagery(in_dir, out_dir / "imagery", cfg),
    }
    summary["report"] = run_report(out_dir, in_dir, out_dir / "report", cfg)
    _write_json(out_dir / "pipeline_summary.json", summary)
    return summary
