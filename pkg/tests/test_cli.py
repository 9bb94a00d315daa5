import numpy as np
import pytest

from becprobe import cli
from becprobe.acceptance import Criterion, format_report
from becprobe.config import apply_axis, parse_config
from becprobe.dissipation import ChannelKind
from becprobe.errors import ConfigError, ValidationError

MINIMAL = """
[model]
chi = 1.0

[oscillator]
kind = "coherent"
alpha = 2.0

[[channels]]
kind = "one_body"
rate = 0.005

[protocol]
n_delta = 16
"""

SWEEP = MINIMAL + """
[sweep]
axis = "gamma"
values = [0.0, 0.002, 0.005]
"""


def _write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parse_minimal(tmp_path):
    run = parse_config(_write(tmp_path, MINIMAL))
    assert run.probe.params.chi == 1.0
    assert run.probe.osc.kind == "coherent"
    assert run.probe.channels == ((ChannelKind.ONE_BODY, 0.005),)
    assert run.sweep_axis is None
    assert len(run.config_hash) == 12
    assert run.units == "chi"


def test_parse_rejects_bad_toml(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(_write(tmp_path, "[model\nchi=1"))


def test_parse_rejects_negative_rate(tmp_path):
    bad = MINIMAL.replace("rate = 0.005", "rate = -0.005")
    with pytest.raises(ValidationError):
        parse_config(_write(tmp_path, bad))


def test_parse_rejects_unknown_keys(tmp_path):
    with pytest.raises(ValidationError):
        parse_config(_write(tmp_path, MINIMAL + "\n[model2]\nx = 1\n"))


def test_parse_rate_catalog_exclusivity(tmp_path):
    both = MINIMAL.replace(
        "rate = 0.005",
        "rate = 0.005\ncatalog = { k1 = 0.1, n_atoms = 10, volume = 1.0 }")
    with pytest.raises(ValidationError):
        parse_config(_write(tmp_path, both))


def test_parse_catalog_rate(tmp_path):
    cat = MINIMAL.replace(
        "rate = 0.005",
        "catalog = { k1 = 0.001, n_atoms = 5, volume = 1.0 }")
    run = parse_config(_write(tmp_path, cat))
    assert run.probe.channels[0][1] == pytest.approx(0.005)


def test_parse_mixture_and_thermal(tmp_path):
    mix = MINIMAL.replace(
        'kind = "coherent"\nalpha = 2.0',
        'kind = "mixture"\ncomponents = [[0.5, 1.0], [0.5, 1.0, 0.5]]')
    run = parse_config(_write(tmp_path, mix))
    assert run.probe.osc.kind == "mixture"
    th = MINIMAL.replace('kind = "coherent"\nalpha = 2.0',
                         'kind = "thermal"\nnbar = 1.5')
    assert parse_config(_write(tmp_path, th)).probe.osc.nbar == 1.5


def test_sweep_axis_application(tmp_path):
    run = parse_config(_write(tmp_path, SWEEP))
    points = run.sweep_points()
    assert [v for v, _ in points] == [0.0, 0.002, 0.005]
    assert points[1][1].channels[0][1] == 0.002
    with pytest.raises(ValidationError):
        apply_axis(run.probe, "nonsense", 1.0)


def test_cli_run_writes_expected_files(tmp_path, capsys):
    cfg = _write(tmp_path, MINIMAL)
    out = tmp_path / "out"
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
    probe = (out / "probe.csv").read_text()
    summary = (out / "summary.csv").read_text()
    assert probe.startswith("# config_hash=")
    assert "# units=chi" in probe
    assert "# cutoff=" in probe
    assert "delta,p_e" in probe
    assert ("axis_value,visibility,gamma_bar_measured,gamma_bar_analytic,"
            "rel_error,disentanglement_fidelity") in summary
    assert "gamma_bar measured=" in capsys.readouterr().out


def test_cli_run_deterministic(tmp_path):
    cfg = _write(tmp_path, MINIMAL)
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "probe.csv").read_bytes() == \
        (tmp_path / "b" / "probe.csv").read_bytes()
    assert (tmp_path / "a" / "summary.csv").read_bytes() == \
        (tmp_path / "b" / "summary.csv").read_bytes()


def test_cli_validation_error_writes_nothing(tmp_path):
    bad = _write(tmp_path, MINIMAL.replace("rate = 0.005", "rate = -1.0"))
    out = tmp_path / "out"
    assert cli.main(["run", "--config", bad, "--out", str(out)]) == 3
    assert not out.exists()


def test_cli_parse_error_exit_code(tmp_path):
    bad = _write(tmp_path, "not toml [[[")
    assert cli.main(["run", "--config", bad, "--out", str(tmp_path / "o")]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "missing.toml"),
                     "--out", str(tmp_path / "o")]) == 2


def test_cli_sweep_requires_block(tmp_path):
    cfg = _write(tmp_path, MINIMAL)
    assert cli.main(["sweep", "--config", cfg, "--out",
                     str(tmp_path / "out")]) == 3


def test_cli_sweep_summary(tmp_path):
    cfg = _write(tmp_path, SWEEP)
    out = tmp_path / "out"
    assert cli.main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    lines = [l for l in (out / "summary.csv").read_text().splitlines()
             if l and not l.startswith("#")]
    assert lines[0] == ("axis_value,visibility,gamma_bar_measured,"
                        "gamma_bar_analytic,rel_error,disentanglement_fidelity")
    rows = np.array([[float(x) for x in l.split(",")] for l in lines[1:]])
    assert rows.shape == (3, 6)
    assert np.all(np.diff(rows[:, 2]) >= 0)  # gamma_bar nondecreasing in Gamma
    assert (out / "run_000.csv").exists() and (out / "run_002.csv").exists()


def test_verify_exit_logic(monkeypatch, capsys):
    import becprobe.acceptance as acceptance
    ok = [Criterion("AC-1", True, "fine")]
    monkeypatch.setattr(acceptance, "run_all", lambda: ok)
    assert cli.main(["verify"]) == 0
    bad = [Criterion("AC-1", True, "fine"), Criterion("AC-4", False, "off")]
    monkeypatch.setattr(acceptance, "run_all", lambda: bad)
    assert cli.main(["verify"]) == 1
    out = capsys.readouterr().out
    assert "AC-4: FAIL" in out
    assert "1/2 criteria passed" in out


def test_report_format_deterministic():
    crits = [Criterion("AC-1", True, "a"), Criterion("AC-2", False, "b")]
    assert format_report(crits) == format_report(crits)
    assert format_report(crits).splitlines() == [
        "AC-1: PASS -- a", "AC-2: FAIL -- b", "1/2 criteria passed"]
