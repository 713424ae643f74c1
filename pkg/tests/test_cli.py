import csv
import json

import numpy as np
import pytest

from nlgeom.cli import GridSpec, emit_grid, main, metric_evaluator
from nlgeom.diffgeo import MetricField
from nlgeom.inversion import OneFunctionConstants, onefunction_h_metric


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_flat_grid_csv(tmp_path):
    flat = MetricField(lambda T, X: np.array([1.0, 0.0, 1.0]))
    out = tmp_path / "flat.csv"
    emit_grid(metric_evaluator(flat), GridSpec(0, 1, 2, 0, 1, 2), str(out))
    rows = read_csv(out)
    assert rows[0] == ["T", "X", "g00", "g01", "g11", "det", "R", "signature", "singular"]
    assert len(rows) == 5
    assert [r[:2] for r in rows[1:]] == [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]]
    for r in rows[1:]:
        assert float(r[6]) == 0.0 and r[7] == "Euclidean" and r[8] == "0"


def test_singular_points_flagged(tmp_path):
    # D = 2TX - 1 vanishes at (1, 0.5)
    h = onefunction_h_metric(OneFunctionConstants.from_primes(0.0, -1.0, 0.0))
    out = tmp_path / "h.json"
    emit_grid(metric_evaluator(h), GridSpec(1, 2, 2, 0, 0.5, 2), str(out), fmt="json")
    data = json.loads(out.read_text())
    by_point = {tuple(r[:2]): r for r in data["rows"]}
    sing = by_point[(1.0, 0.5)]
    assert sing[-1] is True and sing[-2] == "Singular" and sing[6] == "nan"
    regular = by_point[(1.0, 0.0)]
    assert regular[-1] is False and regular[6] == pytest.approx(-2.0, rel=1e-9)


def run_cli(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def test_invert_one_report(tmp_path, capsys):
    out = tmp_path / "g.csv"
    code, cap = run_cli(["invert-one", "--out", str(out)], capsys)
    assert code == 0
    report = json.loads(cap.out)
    assert all(c["pass"] for c in report["checks"])
    assert report["meta"]["scenario"] == "invert-one"
    assert len(read_csv(out)) == 1 + 11 * 11


def test_outputs_deterministic_and_thread_independent(tmp_path, capsys, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(["invert-two-b", "--out", str(a)], capsys)
    monkeypatch.setenv("NLGEOM_THREADS", "3")
    run_cli(["invert-two-b", "--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_config_file_equals_flags(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text("[evolve]\nomega0 = 2.0\nt_count = 7\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    r1 = tmp_path / "r1.json"
    r2 = tmp_path / "r2.json"
    assert main(["evolve", "--config", str(ini), "--out", str(a), "--report", str(r1)]) == 0
    assert main(["evolve", "--omega0", "2.0", "--t-count", "7", "--out", str(b), "--report", str(r2)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(r1.read_text())["meta"]["config_hash"] == json.loads(r2.read_text())["meta"]["config_hash"]


def test_unknown_config_key(tmp_path, capsys):
    ini = tmp_path / "bad.ini"
    ini.write_text("[evolve]\nomega = 2.0\n")
    code, cap = run_cli(["evolve", "--config", str(ini)], capsys)
    assert code == 2 and "unknown key" in cap.err


@pytest.mark.parametrize(
    "argv",
    [
        ["evolve", "--t-count", "1"],
        ["evolve", "--omega0", "-1"],
        ["invert-one", "--f=-exp(t)"],
        ["invert-one", "--t-min", "2", "--t-max", "1"],
        ["kruskal", "--babs", "0"],
    ],
)
def test_invalid_input_exit_2(argv, capsys):
    assert run_cli(argv, capsys)[0] == 2


def test_unknown_scenario_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_unwritable_output(tmp_path, capsys):
    assert run_cli(["invert-one", "--out", str(tmp_path / "missing" / "x.csv")], capsys)[0] == 2


def test_failed_check_exit_1(capsys):
    code, cap = run_cli(["evolve", "--tol-residual", "1e-15"], capsys)
    assert code == 1
    assert not all(c["pass"] for c in json.loads(cap.out)["checks"])


def test_kruskal_json(capsys):
    code, cap = run_cli(["kruskal", "--line", "0,3", "--line=-0.7071067811865476,1"], capsys)
    assert code == 0
    report = json.loads(cap.out)
    lines = report["lines"]
    assert lines[0]["classification"] == "spacelike"
    assert lines[0]["traversability"]["crosses_throat"] is True
    assert lines[1]["classification"] == "null"
    assert lines[1]["tangency"]["status"] == "tangent"
    assert report["chart"]["scalar_curvature"] == -8.0


def test_verify_report(capsys):
    code, cap = run_cli(["verify"], capsys)
    report = json.loads(cap.out)
    assert code == 0
    assert len(report["checks"]) >= 25
    assert all(c["pass"] for c in report["checks"])
    assert len({c["name"] for c in report["checks"]}) == len(report["checks"])
