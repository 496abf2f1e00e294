from __future__ import annotations

import csv
import io
import logging
from pathlib import Path
from typing import Dict

import orjson

from .schemas import ScenarioReport

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.csv"
SAMPLES_FILE = "samples.csv"
TIMINGS_FILE = "timings.json"

_JSON_OPTS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def report_bytes(report: ScenarioReport) -> bytes:
    """Canonical report encoding: sorted keys, no timings, trailing newline."""
    return orjson.dumps(report.model_dump(mode="json"), option=_JSON_OPTS) + b"\n"


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


CSV_HEADER = ["scenario", "p", "replicate", "metric", "value"]


def summary_rows(report: ScenarioReport):
    """Aggregate rows; diagnostics and checks are namespaced in the metric column."""
    agg = "aggregate"
    for point in report.grid:
        p = repr(point.p)
        for name in sorted(point.metrics):
            yield [report.scenario, p, agg, name, repr(float(point.metrics[name]))]
        for name in sorted(point.diagnostics):
            yield [report.scenario, p, agg, f"diagnostic.{name}", repr(float(point.diagnostics[name]))]
    for name in sorted(report.aggregate):
        yield [report.scenario, "", agg, name, repr(float(report.aggregate[name]))]
    for check in report.checks:
        yield [report.scenario, "", agg, f"check.{check.name}", repr(float(check.value))]


def sample_rows(report: ScenarioReport):
    """Long format: one row per (p, replicate, metric)."""
    for point in report.grid:
        for name in sorted(point.samples):
            for r, value in enumerate(point.samples[name]):
                yield [report.scenario, repr(point.p), r, name, repr(float(value))]


def write_report(report: ScenarioReport, out_dir: str | Path) -> Dict[str, Path]:
    """Write report.json, summary.csv, samples.csv and timings.json under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out / REPORT_FILE,
        "summary": out / SUMMARY_FILE,
        "samples": out / SAMPLES_FILE,
        "timings": out / TIMINGS_FILE,
    }
    paths["report"].write_bytes(report_bytes(report))
    paths["summary"].write_text(
        _csv_text(CSV_HEADER, summary_rows(report)), encoding="utf-8", newline=""
    )
    paths["samples"].write_text(
        _csv_text(CSV_HEADER, sample_rows(report)), encoding="utf-8", newline=""
    )
    paths["timings"].write_bytes(orjson.dumps(report.timings, option=_JSON_OPTS) + b"\n")
    logger.info("report_written path=%s passed=%s", out, report.passed, extra={"path": str(out)})
    return paths
