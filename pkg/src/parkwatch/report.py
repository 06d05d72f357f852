"""Findings-report assembly and emission.

A report groups findings under three headings (traffic, chemical,
imagery), carries provenance (input digests plus the config snapshot that
produced them), and serializes to a schema-stable JSON document or a
markdown rendering of the same content.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import ParkwatchError

SECTIONS = ("traffic", "chemical", "imagery")


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_report(
    traffic: list[dict],
    chemical: list[dict],
    imagery: list[dict],
    provenance: dict,
) -> dict:
    document = {
        "sections": {
            "traffic": list(traffic),
            "chemical": list(chemical),
            "imagery": list(imagery),
        },
        "provenance": dict(provenance),
    }
    validate_report(document)
    return document


def validate_report(document: dict) -> None:
    """Schema check: three sections, and provenance on the document and on
    every finding (a producing rule plus an input digest)."""
    if set(document) != {"sections", "provenance"}:
        raise ParkwatchError(f"report must have sections+provenance, got {sorted(document)}")
    if set(document["sections"]) != set(SECTIONS):
        raise ParkwatchError(f"report sections must be {SECTIONS}")
    prov = document["provenance"]
    if "inputs" not in prov or "config" not in prov:
        raise ParkwatchError("report provenance needs 'inputs' digests and 'config'")
    for section in SECTIONS:
        for finding in document["sections"][section]:
            for key in ("rule", "input_digest"):
                if key not in finding:
                    raise ParkwatchError(f"{section} finding missing {key!r}: {finding}")


def render_markdown(document: dict) -> str:
    lines = ["# Findings Report", ""]
    titles = {
        "traffic": "Traffic findings",
        "chemical": "Chemical findings",
        "imagery": "Imagery findings",
    }
    for section in SECTIONS:
        findings = document["sections"][section]
        lines.append(f"## {titles[section]}")
        lines.append("")
        if not findings:
            lines.append("(none)")
        for finding in findings:
            text = finding.get("evidence") or finding.get("summary") or json.dumps(finding)
            lines.append(f"- **{finding['rule']}**: {text}")
        lines.append("")
    lines.append("## Provenance")
    lines.append("")
    for name in sorted(document["provenance"]["inputs"]):
        lines.append(f"- `{name}`: sha256 {document['provenance']['inputs'][name]}")
    lines.append("")
    lines.append("### Configuration")
    lines.append("")
    lines.append("```json")
    lines.append(json.dumps(document["provenance"]["config"], indent=2, sort_keys=True))
    lines.append("```")
    lines.append("")
    return "\n".join(lines)


def emit_report(document: dict, out_dir: str | Path, fmt: str = "both") -> list[Path]:
    """Write the report as JSON, markdown, or both. Returns written paths."""
    validate_report(document)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        path = out / "report.json"
        path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)
    if fmt in ("markdown", "both"):
        path = out / "report.md"
        path.write_text(render_markdown(document), encoding="utf-8")
        written.append(path)
    if not written:
        raise ParkwatchError(f"unknown report format {fmt!r}")
    return written
