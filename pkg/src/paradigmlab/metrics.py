from __future__ import annotations

from prometheus_client import REGISTRY, CollectorRegistry, Counter, Histogram, write_to_textfile


def _lookup(name: str):
    for c in REGISTRY._collector_to_names:
        if getattr(c, "_name", None) == name:
            return c
    return None


def _safe_counter(name: str, doc: str, labels: list | None = None):
    try:
        return Counter(name, doc, labels or [])
    except ValueError:
        existing = _lookup(name)
        if existing is not None:
            return existing
        raise


def _safe_histogram(name: str, doc: str, labels: list | None = None, buckets: tuple | None = None):
    try:
        if buckets:
            return Histogram(name, doc, labels or [], buckets=buckets)
        return Histogram(name, doc, labels or [])
    except ValueError:
        existing = _lookup(name)
        if existing is not None:
            return existing
        raise


CHAIN_STEPS = _safe_counter("paradigmlab_chain_steps", "Raw congestion-window chain steps simulated")
CHAIN_REFLECTIONS = _safe_counter("paradigmlab_chain_reflections", "Chain steps clamped at the window floor")
LIMIT_JUMPS = _safe_counter("paradigmlab_limit_jumps", "Poisson events processed by the beta=1 limit simulator")
REPLICATES = _safe_counter("paradigmlab_replicates", "Replicates simulated", ["scenario", "family"])
CHECK_FAILURES = _safe_counter("paradigmlab_check_failures", "Acceptance checks that failed", ["scenario", "check"])
SCENARIO_DURATION = _safe_histogram(
    "paradigmlab_scenario_duration_seconds",
    "Wall-clock time per scenario run (s)",
    ["scenario"],
    buckets=(1, 5, 15, 30, 60, 120, 300, 600, 1800),
)


def write_metrics(path: str, registry: CollectorRegistry = REGISTRY) -> None:
    """Dump the registry in the text exposition format."""
    write_to_textfile(path, registry)
