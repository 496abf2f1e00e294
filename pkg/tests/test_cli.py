import orjson
import pytest
from click.testing import CliRunner

from paradigmlab.cli import EXIT_CONFIG, cli


@pytest.fixture
def config_file(tmp_path, small_limit_config):
    path = tmp_path / "limit.json"
    path.write_bytes(orjson.dumps(small_limit_config))
    return path


def test_validate_ok(config_file):
    res = CliRunner().invoke(cli, ["validate", str(config_file)])
    assert res.exit_code == 0, res.output
    assert "limit_beta1" in res.output


def test_validate_config_error_exit_code(tmp_path, small_limit_config):
    path = tmp_path / "bad.json"
    path.write_bytes(orjson.dumps(dict(small_limit_config, replicates=0)))
    res = CliRunner().invoke(cli, ["validate", str(path)])
    assert res.exit_code == EXIT_CONFIG


def test_params_prints_derived_constants(config_file):
    res = CliRunner().invoke(cli, ["params", str(config_file)])
    assert res.exit_code == 0, res.output
    rows = orjson.loads(res.output)
    assert [r["p"] for r in rows] == [0.05, 0.02]
    assert rows[0]["gamma"] == 0.5
    assert rows[0]["mu"] is None


def test_run_writes_outputs(tmp_path, config_file):
    out = tmp_path / "out"
    metrics = tmp_path / "metrics.prom"
    res = CliRunner().invoke(
        cli, ["run", str(config_file), "--threads", "2", "--out", str(out), "--metrics", str(metrics)]
    )
    assert res.exit_code in (0, 1), res.output
    for name in ("report.json", "summary.csv", "samples.csv", "timings.json"):
        assert (out / name).exists()
    assert "paradigmlab_chain_steps_total" in metrics.read_text()
    header = (out / "samples.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "scenario,p,replicate,metric,value"


def test_run_seed_override_changes_report(tmp_path, config_file):
    runner = CliRunner()
    runner.invoke(cli, ["run", str(config_file), "--out", str(tmp_path / "a"), "--seed", "1"])
    runner.invoke(cli, ["run", str(config_file), "--out", str(tmp_path / "b"), "--seed", "2"])
    a = orjson.loads((tmp_path / "a" / "report.json").read_bytes())
    b = orjson.loads((tmp_path / "b" / "report.json").read_bytes())
    assert (a["seed"], b["seed"]) == (1, 2)
    assert a["grid"] != b["grid"]


def test_selftest_passes():
    res = CliRunner().invoke(cli, ["selftest"])
    assert res.exit_code == 0, res.output
    assert res.output.count("[ok  ]") == 3
