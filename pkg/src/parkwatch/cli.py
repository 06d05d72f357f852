"""Command-line interface tying the pipeline stages together.

Exit codes: 0 success, 1 input/usage error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from . import pipeline, synth
from .config import load_config
from .errors import ParkwatchError


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_io(sub, out_only=False):
    if not out_only:
        sub.add_argument("--in", dest="in_dir", required=True, help="input data directory")
    sub.add_argument("--out", dest="out_dir", required=True, help="output directory")
    sub.add_argument("--config", help="pipeline config file (JSON or TOML)")


def _add_overrides(sub):
    sub.add_argument("--seed", type=int, help="sampling/clustering seed")
    sub.add_argument("--k", type=int, help="number of k-means clusters")
    sub.add_argument("--axes", type=int, help="principal axes to keep")
    sub.add_argument("--per-stratum", type=int, help="vehicles sampled per type")
    sub.add_argument("--variance-threshold", type=float,
                     help="pick axes by cumulative variance instead of a fixed count")
    sub.add_argument("--span", type=float, help="sensor time-series smoothing span")
    sub.add_argument("--threshold", type=float, help="NDVI vegetation threshold")
    sub.add_argument("--b5-threshold", type=float, help="dryness (B5) threshold")
    sub.add_argument("--b6-threshold", type=float, help="soil mineral (B6) threshold")
    sub.add_argument("--cone-deg", type=float, help="upwind cone half-angle, degrees")
    sub.add_argument("--max-range", type=float, help="suspect distance cutoff (map units)")
    sub.add_argument("--surge-factor", type=float, help="traffic surge factor over median")
    sub.add_argument("--tukey-k", type=float, help="Tukey fence multiplier")
    sub.add_argument("--floor-ppm", type=float, help="absolute High-label floor, ppm")


_OVERRIDE_MAP = {
    "seed": "seed",
    "k": "k",
    "axes": "n_axes",
    "per_stratum": "per_stratum",
    "variance_threshold": "variance_threshold",
    "span": "sensor_span",
    "threshold": "ndvi_threshold",
    "b5_threshold": "b5_threshold",
    "b6_threshold": "b6_threshold",
    "cone_deg": "cone_half_angle_deg",
    "max_range": "max_range",
    "surge_factor": "surge_factor",
    "tukey_k": "tukey_k",
    "floor_ppm": "floor_ppm",
}


def _config_from(args) -> "pipeline.PipelineConfig":
    cfg = load_config(getattr(args, "config", None))
    for arg_name, cfg_name in _OVERRIDE_MAP.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            setattr(cfg, cfg_name, value)
    return cfg


def build_parser() -> _Parser:
    parser = _Parser(prog="parkwatch",
                     description="forensic analytics over preserve traffic, "
                                 "air-chemistry, and aerial-imagery data")
    subs = parser.add_subparsers(dest="command", required=True)

    synth_p = subs.add_parser("synth", parents=[], help="generate a synthetic scenario")
    synth_p.add_argument("--seed", type=int, default=7)
    synth_p.add_argument("--out", dest="out_dir", required=True)
    synth_p.add_argument("--scenario", help="scenario config JSON overriding the defaults")

    stages = {
        "ingest": "parse and validate every input feed",
        "trajectories": "build trajectories and run the traffic detectors",
        "cluster": "sample, PCA, k-means, and cluster/type proportions",
        "sensors": "failure audit, quantiles, labels, correlations",
        "attribute": "wind-based factory attribution of high readings",
        "imagery": "composites, index masks, and cross-date trends",
        "all": "run every stage into one output tree",
    }
    for name, help_text in stages.items():
        sub = subs.add_parser(name, help=help_text)
        _add_io(sub)
        _add_overrides(sub)

    report_p = subs.add_parser("report", help="assemble the findings report")
    report_p.add_argument("--in", dest="in_dir", required=True,
                          help="results directory produced by `all` (or stage outputs)")
    report_p.add_argument("--data", dest="data_dir", required=True,
                          help="original input data directory (for provenance digests)")
    report_p.add_argument("--out", dest="out_dir", required=True)
    report_p.add_argument("--config", help="pipeline config file")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            scenario = synth.ScenarioConfig(seed=args.seed)
            if args.scenario:
                data = json.loads(Path(args.scenario).read_text(encoding="utf-8"))
                data.setdefault("seed", args.seed)
                scenario = synth.ScenarioConfig.from_dict(data)
                scenario.seed = args.seed if args.seed != 7 else scenario.seed
            manifest = synth.generate_scenario(scenario, args.out_dir)
            print(f"scenario written to {args.out_dir} "
                  f"({manifest['traffic']['record_count']} gate records, "
                  f"{manifest['chemistry']['reading_count']} readings)")
            return 0
        cfg = _config_from(args)
        if args.command == "report":
            summary = pipeline.run_report(Path(args.in_dir), Path(args.data_dir),
                                          Path(args.out_dir), cfg)
        else:
            runner = {
                "ingest": pipeline.run_ingest,
                "trajectories": pipeline.run_trajectories,
                "cluster": pipeline.run_cluster,
                "sensors": pipeline.run_sensors,
                "attribute": pipeline.run_attribute,
                "imagery": pipeline.run_imagery,
                "all": pipeline.run_all,
            }[args.command]
            summary = runner(Path(args.in_dir), Path(args.out_dir), cfg)
        print(json.dumps({args.command: summary}, sort_keys=True))
        return 0
    except (ParkwatchError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"parkwatch: input error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        print("parkwatch: internal error", file=sys.stderr)
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
