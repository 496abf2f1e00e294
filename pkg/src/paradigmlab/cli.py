from __future__ import annotations

import logging
from pathlib import Path

import click
import orjson

from .config import settings
from .errors import ConfigError, LabError, ParamsError
from .experiments import load_config, run_scenario, validate_config
from .logging_utils import setup_logging
from .metrics import write_metrics
from .params import derived_constants
from .reporting import write_report

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

_config_arg = click.argument("config_path", type=click.Path(exists=True, dir_okay=False))


def _load_checked(config_path: str, seed: int | None = None):
    config = load_config(config_path)
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    plist = validate_config(config)
    return config, plist


@click.group()
def cli():
    """Simulate congestion-avoidance chains and check them against their limits."""


@cli.command("run")
@_config_arg
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Override the config seed")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads [env PARADIGM_LAB_THREADS]")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory")
@click.option("--metrics", "metrics_path", type=click.Path(dir_okay=False), default=None,
              help="Write process metrics in text exposition format")
@click.pass_context
def run_cmd(ctx, config_path, seed, threads, out_dir, metrics_path):
    try:
        config, _ = _load_checked(config_path, seed)
    except (ConfigError, ParamsError) as exc:
        click.echo(f"config error: {exc}", err=True)
        ctx.exit(EXIT_CONFIG)
    setup_logging(run_id=f"{config.scenario}-{config.seed}")
    out = Path(out_dir or config.output_path or settings.output_dir)
    try:
        report = run_scenario(config, threads or settings.threads)
    except LabError as exc:
        logger.error("run_failed scenario=%s error=%s", config.scenario, exc, extra={"scenario": config.scenario})
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_CONFIG)
    write_report(report, out)
    if metrics_path:
        write_metrics(metrics_path)
    for check in report.checks:
        mark = "ok  " if check.passed else "FAIL"
        click.echo(f"[{mark}] {check.name} = {check.value:.6g} ({check.comparator} {check.threshold:g}"
                   + (f"..{check.upper:g})" if check.upper is not None else ")"))
    click.echo(f"{config.scenario}: {'PASS' if report.passed else 'FAIL'} -> {out}")
    ctx.exit(EXIT_PASS if report.passed else EXIT_FAIL)


@cli.command("validate")
@_config_arg
@click.pass_context
def validate_cmd(ctx, config_path):
    try:
        config, plist = _load_checked(config_path)
    except (ConfigError, ParamsError) as exc:
        click.echo(f"config error: {exc}", err=True)
        ctx.exit(EXIT_CONFIG)
    click.echo(f"{config_path}: ok ({config.scenario}, {len(plist)} grid point(s))")


@cli.command("params")
@_config_arg
@click.pass_context
def params_cmd(ctx, config_path):
    """Print gamma, nu, tau, c_p, mu and sigma for each p of the config."""
    try:
        _, plist = _load_checked(config_path)
    except (ConfigError, ParamsError) as exc:
        click.echo(f"config error: {exc}", err=True)
        ctx.exit(EXIT_CONFIG)
    rows = [{"p": prm.p, **derived_constants(prm)} for prm in plist]
    click.echo(orjson.dumps(rows, option=orjson.OPT_INDENT_2).decode())


@cli.command("selftest")
@click.pass_context
def selftest_cmd(ctx):
    from .selftest import run_selftest

    setup_logging()
    res = run_selftest()
    for d in res["details"]:
        click.echo(f"[{'ok  ' if d['ok'] else 'FAIL'}] {d['check']}: {d['info']}")
    ctx.exit(EXIT_PASS if res["passed"] else EXIT_FAIL)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
