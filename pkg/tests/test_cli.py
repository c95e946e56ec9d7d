import csv
import json

import numpy as np

from nematic_walls.cli import main
from nematic_walls.model import TabulatedProfile, config_to_dict, ModelConfig
from nematic_walls.thresholds import ThresholdReport

SMALL = {"epsilon": 0.1, "grid.nx": 81, "tol.dt": 1.0}


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_simulate_no_wall(tmp_path):
    cfg = write(tmp_path, "c.json", {**SMALL, "a": 0.0})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    out = tmp_path / "o"
    manifest = json.loads((out / "manifest.json").read_text())
    for name in manifest["files"].values():
        assert (out / name).stat().st_size > 0
    assert rows(out / "zeroset.csv") == [["polyline_id", "x1", "x2"]]
    field = rows(out / "field.csv")
    assert field[0] == ["x1", "x2", "u"] and len(field) == 81 * 81 + 1
    energy = json.loads((out / "energy.json").read_text())
    assert energy["solver"]["converged"]


def test_simulate_standard_wall_is_one_line(tmp_path):
    cfg = write(tmp_path, "c.json", {**SMALL, "a": 2.1})
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    z = np.array([[float(v) for v in r] for r in rows(tmp_path / "o" / "zeroset.csv")[1:]])
    assert set(z[:, 0]) == {0.0}  # a single polyline
    # on the axis up to the solver's residual tolerance
    assert np.max(np.abs(z[:, 1])) < 1e-6


def test_simulate_is_bitwise_deterministic(tmp_path):
    cfg = write(tmp_path, "c.json", {**SMALL, "a": 0.7})
    for d in ("a", "b"):
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / d), "--seed", "5"]) == 0
    for name in ("field.csv", "zeroset.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_malformed_json(tmp_path, capsys):
    cfg = write(tmp_path, "bad.json", '{\n  "a": 1,\n}')
    assert main(["simulate", "--config", cfg]) == 1
    assert "bad.json:3:1" in capsys.readouterr().err


def test_unknown_key_and_bad_value(tmp_path, capsys):
    assert main(["simulate", "--config", write(tmp_path, "c.json", {"eps": 0.1})]) == 1
    assert main(["simulate", "--config", write(tmp_path, "d.json", {"epsilon": -1})]) == 1
    assert main(["thresholds", "--config", str(tmp_path / "missing.json")]) == 1


def test_nonconvergence_exit_code(tmp_path):
    cfg = write(tmp_path, "c.json", {**SMALL, "a": 2.1, "tol.max_steps": 2})
    assert main(["simulate", "--config", cfg]) == 2


def test_thresholds_json_roundtrip(tmp_path, capsys):
    assert main(["thresholds", "--json"]) == 0
    rep = ThresholdReport.from_dict(json.loads(capsys.readouterr().out))
    assert abs(rep.a_star - 2**0.5) < 1e-6


def test_thresholds_rejects_bad_profile(tmp_path, capsys):
    prof = TabulatedProfile.from_functions(lambda r: 1 - r**2, lambda r: r * (1 - r), 3.0, n=201)
    cfg = write(tmp_path, "c.json", config_to_dict(ModelConfig(profile=prof)))
    assert main(["thresholds", "--config", cfg]) == 3
    assert "f_positive" in capsys.readouterr().err


def test_verify_broken_tolerance_names_check(capsys):
    assert main(["verify", "--only", "1", "9", "--tol", "threshold_abs=1e-30"]) == 4
    cap = capsys.readouterr()
    assert "FAIL [ 1] threshold exactness" in cap.out
    assert "PASS [ 9] Hastings-McLeod" in cap.out
    assert "[1] threshold exactness" in cap.err


def test_verify_input_errors():
    assert main(["verify", "--tol", "nonsense=1"]) == 1
    assert main(["verify", "--tol", "threshold_abs"]) == 1
    assert main(["verify", "--only", "99"]) == 1


def test_sweep_empty_values(tmp_path):
    assert main(["sweep", "--param", "a", "--values", "", "--out", str(tmp_path)]) == 1


def test_sweep_across_threshold(tmp_path):
    cfg = write(tmp_path, "c.json", {"epsilon": 0.05, "grid.nx": 201, "tol.dt": 1.0})
    out = tmp_path / "sw"
    assert main(["sweep", "--config", cfg, "--param", "a", "--values", "0.5,1.0,1.41,1.45,2.0",
                 "--out", str(out)]) == 0
    table = rows(out / "sweep_summary.csv")
    assert table[0][:5] == ["value", "energy", "renormalized", "wall_deviation", "regime"]
    regimes = [r[4] for r in table[1:]]
    assert regimes == ["shadow_wall"] * 3 + ["standard_wall"] * 2


def test_epsilon_sweep_thomas_fermi_monotone(tmp_path):
    out = tmp_path / "sw"
    cfg = write(tmp_path, "c.json", {"a": 0.0, "tol.dt": 1.0})
    assert main(["sweep", "--config", cfg, "--param", "epsilon", "--values", "0.1,0.07,0.05",
                 "--out", str(out)]) == 0
    table = rows(out / "sweep_summary.csv")
    col = table[0].index("thomas_fermi_error")
    tf = [float(r[col]) for r in table[1:]]
    assert tf[0] > tf[1] > tf[2]


def test_sweep_parallel_matches_serial_regimes(tmp_path):
    cfg = write(tmp_path, "c.json", SMALL)
    assert main(["sweep", "--config", cfg, "--param", "a", "--values", "0.7,2.1", "--jobs", "2",
                 "--out", str(tmp_path / "p")]) == 0
    regimes = [r[4] for r in rows(tmp_path / "p" / "sweep_summary.csv")[1:]]
    assert regimes == ["shadow_wall", "standard_wall"]
