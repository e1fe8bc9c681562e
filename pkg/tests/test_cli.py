import csv
import io
import json
import subprocess
import sys

import pytest

from diamag import cli


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def parse_csv(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_kernel_mehler_row(capsys):
    code, out = run(["kernel", "--method", "mehler", "--b", "2", "--beta", "1",
                     "--x", "0", "0", "--y", "0", "0"], capsys)
    assert code == 0
    rows = parse_csv(out.out)
    assert float(rows[0]["re"]) == pytest.approx(0.1354278262757913, rel=1e-15)
    assert out.out.startswith("# diamag ")
    assert "# config_hash " in out.out and "# seed 0" in out.out


def test_csv_has_17_digits(capsys):
    _, out = run(["kernel", "--b", "2", "--beta", "1"], capsys)
    assert "0.13542782627579134" in out.out


def test_band_csv(capsys):
    code, out = run(["band", "--field", "sine", "--k-halfwidth", "8", "--k-points", "17"], capsys)
    assert code == 0
    rows = parse_csv(out.out)
    assert len(rows) == 17 and float(rows[0]["k"]) == -8.0
    assert min(float(r["e0"]) for r in rows) >= 0.5


def test_energy_closed_and_radial(capsys):
    code, out = run(["energy", "--method", "closed", "--b", "2", "--omega", "1.5",
                     "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out.out)["result"]["e0"] == pytest.approx(1.8027756377319946)
    code, out = run(["energy", "--method", "radial", "--b", "2", "--omega", "1.5"], capsys)
    assert code == 0 and float(parse_csv(out.out)[0]["e0"]) == pytest.approx(1.802776, rel=1e-4)


def test_energy_flag_exit_code(capsys):
    # a decaying radial field has its ground state at the box wall
    code, _ = run(["energy", "--method", "radial", "--field", "exponential"], capsys)
    assert code == cli.EXIT_FLAG


@pytest.fixture
def pair_toml(tmp_path):
    p = tmp_path / "pair.toml"
    p.write_text("""
check = "theorem2"
[field]
preset = "constant"
b = 1.0
[field_hat]
preset = "fact4"
b = 1.0
lambda = 1.0
[query]
x1s = [0.0, 1.0]
y1s = [0.0]
betas = [1.0]
dx2s = [0.0, 1.0]
""")
    return p


def test_check_theorem2_json_and_round_trip(pair_toml, tmp_path, capsys):
    out1 = tmp_path / "r1.json"
    code, _ = run(["check", "theorem2", "--config", str(pair_toml), "--format", "json",
                   "--out", str(out1)], capsys)
    assert code == 0
    rep = json.loads(out1.read_text())
    assert rep["result"]["status"] == "pass" and rep["result"]["points_tested"] == 4
    echoed = tmp_path / "r1.json.config.json"
    out2 = tmp_path / "r2.json"
    code, _ = run(["check", "--config", str(echoed), "--out", str(out2)], capsys)
    assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_check_failure_exit_code(tmp_path, capsys):
    # bhat below |b| is a configuration error, not a failed check
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"field": {"preset": "constant", "b": 5.0},
                             "field_hat": {"preset": "sine"}}))
    code, out = run(["check", "theorem2", "--config", str(p)], capsys)
    assert code == cli.EXIT_CONFIG and "configuration error" in out.err


def test_check_not_verified_exit_code(pair_toml, capsys):
    code, _ = run(["check", "theorem1", "--config", str(pair_toml)], capsys)
    assert code == cli.EXIT_NOT_VERIFIED


def test_scan_fact3(capsys):
    code, out = run(["scan", "fact3"], capsys)
    assert code == 0 and int(parse_csv(out.out)[0]["n_increasing"]) >= 3


def test_scan_fact3_none_is_failure(capsys, tmp_path):
    p = tmp_path / "s.toml"
    p.write_text('scan = "fact3"\nb = 0.0\n')
    code, _ = run(["scan", "--config", str(p)], capsys)
    assert code == cli.EXIT_FAIL


def test_usage_error_is_config_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["kernel", "--bogus"])
    assert exc.value.code == cli.EXIT_CONFIG


def test_bad_preset_and_missing_file(capsys, tmp_path):
    code, _ = run(["kernel", "--field", "nope"], capsys)
    assert code == cli.EXIT_CONFIG
    code, _ = run(["kernel", "--config", str(tmp_path / "missing.toml")], capsys)
    assert code == cli.EXIT_CONFIG
    code, _ = run(["kernel", "--method", "mehler", "--field", "sine"], capsys)
    assert code == cli.EXIT_CONFIG


def _kernel_cfg(tmp_path, name, method, extra=""):
    p = tmp_path / name
    p.write_text(f"""
method = "{method}"
points = [[0.0, 0.0, 0.5, 0.3, 1.0], [1.0, 0.0, 0.0, 0.0, 0.5]]
{extra}
[field]
preset = "constant"
b = 2.0
""")
    return p


def test_compare_mehler_iwatsuka(tmp_path, capsys):
    a = _kernel_cfg(tmp_path, "a.toml", "mehler")
    b = _kernel_cfg(tmp_path, "b.toml", "iwatsuka")
    code, out = run(["compare", "--config-a", str(a), "--config-b", str(b), "--format", "json"],
                    capsys)
    assert code == 0
    assert json.loads(out.out)["result"]["max_rel_diff"] < 1e-4


def test_compare_mehler_mc(tmp_path, capsys):
    a = _kernel_cfg(tmp_path, "a.toml", "mehler")
    b = _kernel_cfg(tmp_path, "b.toml", "mc", "n_samples = 50000\nn_steps = 64")
    code, out = run(["compare", "--config-a", str(a), "--config-b", str(b)], capsys)
    for r in parse_csv(out.out):
        assert float(r["abs_diff"]) < 3 * 1.5 * float(r["err_b"])


def test_compare_identical_and_mismatched(tmp_path, capsys):
    a = _kernel_cfg(tmp_path, "a.toml", "mehler")
    code, out = run(["compare", "--config-a", str(a), "--config-b", str(a)], capsys)
    assert all(float(r["abs_diff"]) == 0.0 for r in parse_csv(out.out))
    c = tmp_path / "c.toml"
    c.write_text('method = "mehler"\nbeta = 2.0\n')
    code, _ = run(["compare", "--config-a", str(a), "--config-b", str(c)], capsys)
    assert code == cli.EXIT_CONFIG


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "diamag", "--version"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and res.stdout.startswith("diamag")
