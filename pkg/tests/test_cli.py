import csv
import json

import numpy as np
import pytest

from kleingordon import cli

U2 = [[2.0, -1.0], [-1.0, 2.0]]


def write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def run(tmp_path, *argv):
    out = tmp_path / "out"
    return cli.main(["--out", str(out), *argv]), out


def test_spectrum_free_pair(tmp_path):
    f = write(tmp_path / "p.json", {"dim": 2, "u2": [[1.0, 0.0], [0.0, 4.0]], "v": [[0.0, 0.0], [0.0, 0.0]]})
    code, out = run(tmp_path, "spectrum", f)
    assert code == 0
    r = rows(out / "spectrum.csv")
    assert [float(x["value"]) for x in r] == pytest.approx([-2, -1, 1, 2])
    assert [x["signature"] for x in r] == ["minus", "minus", "plus", "plus"]
    assert all(float(x["residual"]) < 1e-12 for x in r)


def test_spectrum_shift(tmp_path):
    f = write(tmp_path / "p.json", {"u2": U2, "v": [[1.0, 0.0], [0.0, 0.0]]})
    _, a = run(tmp_path, "spectrum", f)
    base = [float(x["value"]) for x in rows(a / "spectrum.csv")]
    code, b = cli.main(["spectrum", f, "--shift", "0.25", "--out", str(tmp_path / "b")]), tmp_path / "b"
    assert code == 0
    assert [float(x["value"]) for x in rows(b / "spectrum.csv")] == pytest.approx(np.add(base, 0.25))


def test_spectrum_fallback_past_collision(tmp_path):
    f = write(tmp_path / "p.json", {"u2": U2, "v": [[2.5, 0.0], [0.0, 0.0]]})
    code, out = run(tmp_path, "spectrum", f)
    assert code == cli.EXIT_INDEFINITE
    r = rows(out / "spectrum.csv")
    assert set(r[0]) == {"re", "im"}
    assert sum(abs(float(x["im"])) > 1e-8 for x in r) == 2


@pytest.mark.parametrize(
    "data",
    [
        {"u2": U2},
        {"u2": [[1.0, 0.0], [0.0, -1.0]], "v": [[0.0, 0.0], [0.0, 0.0]]},
        {"u2": U2, "v": [[1.0, 0.0]]},
        {"dim": 3, "u2": U2, "v": [[0.0, 0.0], [0.0, 0.0]]},
        {"u2": "nope", "v": [[0.0]]},
        [1, 2, 3],
    ],
)
def test_malformed_input(tmp_path, data):
    f = write(tmp_path / "p.json", data)
    assert run(tmp_path, "spectrum", f)[0] == cli.EXIT_INPUT


def test_unreadable_input(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    assert run(tmp_path, "spectrum", str(tmp_path / "bad.json"))[0] == cli.EXIT_INPUT
    assert run(tmp_path, "spectrum", str(tmp_path / "missing.json"))[0] == cli.EXIT_INPUT
    assert cli.main(["nosuchcommand"]) == cli.EXIT_INPUT


def test_flow_example(tmp_path):
    f = write(tmp_path / "h.json", {"u2": U2, "v0": [[0.0, 0.0], [0.0, 0.0]], "v1": [[1.0, 0.0], [0.0, 0.0]]})
    code, out = run(tmp_path, "flow", f, "--t0", "0", "--t1", "2", "--steps", "201")
    assert code == 0
    r = rows(out / "flow.csv")
    assert list(r[0]) == ["t", "curve_id", "value", "imag", "signature", "matched"]
    assert len(r) == 4 * 201
    events = rows(out / "events.csv")
    assert {"collision", "definiteness_lost"} <= {e["kind"] for e in events}
    summary = json.loads((out / "flow.json").read_text())
    assert "nonmonotone" in [c["verdict"] for c in summary["curves"]]
    svg = (out / "flow.svg").read_text()
    assert svg.count("<path") >= 4


def test_flow_trivial_homotopies(tmp_path):
    v = [[0.3, 0.1], [0.1, 0.2]]
    f = write(tmp_path / "h.json", {"u2": U2, "v0": v, "v1": v})
    code, out = run(tmp_path, "flow", f, "--steps", "11")
    assert code == 0
    by_curve = {}
    for x in rows(out / "flow.csv"):
        by_curve.setdefault(x["curve_id"], []).append(float(x["value"]))
    assert all(np.ptp(vals) < 1e-12 for vals in by_curve.values())

    v1 = (np.array(v) + 0.1 * np.eye(2)).tolist()
    f = write(tmp_path / "h2.json", {"u2": U2, "v0": v, "v1": v1})
    code = cli.main(["flow", f, "--steps", "11", "--out", str(tmp_path / "o2")])
    by_curve = {}
    for x in rows(tmp_path / "o2" / "flow.csv"):
        by_curve.setdefault(x["curve_id"], []).append(float(x["value"]))
    for vals in by_curve.values():
        assert np.diff(vals) == pytest.approx(np.full(10, 0.01), abs=1e-12)


def test_flow_bad_range(tmp_path):
    f = write(tmp_path / "h.json", {"u2": U2, "v0": [[0.0, 0.0], [0.0, 0.0]], "v1": [[1.0, 0.0], [0.0, 0.0]]})
    assert run(tmp_path, "flow", f, "--t0", "1", "--t1", "0")[0] == cli.EXIT_INPUT


def test_bounds_coulomb(tmp_path):
    code, out = run(tmp_path, "bounds", "--model", "coulomb", "--Z", "40", "--tau", "0.01", "--l", "10", "--table")
    assert code == 0
    data = json.loads((out / "bounds.json").read_text())
    assert [r["kind"] for r in data["records"]] == ["refined", "relative", "combined", "nv"]
    assert all(r["hypotheses_ok"] for r in data["records"])
    assert data["crossover_electron_radii"] > 100
    assert (out / "bound_table.svg").exists()
    assert list(rows(out / "bound_table.csv")[0]) == [
        "l", "refined_lower", "refined_upper", "relative_lower", "relative_upper"
    ]


def test_bounds_zero_tau(tmp_path):
    code, out = run(tmp_path, "bounds", "--model", "coulomb", "--Z", "40", "--tau", "0", "--l", "10")
    assert code == 0
    for r in json.loads((out / "bounds.json").read_text())["records"]:
        assert r["upper"] - r["lower"] == pytest.approx(0.0, abs=1e-15)


def test_bounds_out_of_validity(tmp_path, capsys):
    code, _ = run(tmp_path, "bounds", "--model", "coulomb", "--Z", "70", "--tau", "0.01", "--l", "10")
    assert code == cli.EXIT_CONDITION
    assert "2 Z alpha" in capsys.readouterr().err
    assert run(tmp_path, "bounds", "--model", "coulomb", "--Z", "40")[0] == cli.EXIT_INPUT


def test_bounds_matrix_mode(tmp_path):
    p = write(tmp_path / "p.json", {"u2": U2, "v": [[1.0, 0.0], [0.0, 0.0]]})
    d = write(tmp_path / "d.json", {"delta_v": [[0.01, 0.0], [0.0, 0.01]]})
    code, out = run(tmp_path, "bounds", p, d)
    assert code == 0
    recs = json.loads((out / "bounds.json").read_text())["records"]
    absolute = [r for r in recs if r["kind"] == "absolute"]
    assert len(absolute) == 4
    assert all(r["upper"] - r["lower"] == pytest.approx(0.02) for r in absolute)
    assert all(r["upper"] - r["lower"] == pytest.approx(0.0, abs=1e-15) for r in recs if r["kind"] == "refined")


def test_penalty(tmp_path, capsys):
    code, out = run(tmp_path, "--figure-mode", "penalty", "--zmin", "0.01", "--zmax", "70", "--steps", "200")
    assert code == 0
    assert "skipped" in capsys.readouterr().err
    r = rows(out / "penalty.csv")
    zeta = [float(x["zeta"]) for x in r]
    assert zeta[0] == pytest.approx(1.0, abs=1e-3)
    assert np.all(np.diff(zeta) > 0)
    assert (out / "penalty.svg").exists()
    assert run(tmp_path, "penalty", "--zmin", "80", "--zmax", "90", "--figure-mode")[0] == cli.EXIT_CONDITION
    assert run(tmp_path, "penalty", "--zmin", "5", "--zmax", "1")[0] == cli.EXIT_INPUT


def test_verify_radial(tmp_path):
    code, out = run(tmp_path, "verify", "radial", "--Z", "1", "--grid", "1000,2000")
    assert code == 0
    report = json.loads((out / "verify.json").read_text())
    assert report["convergence"]["final_error"] < 1e-5
    code, out = run(tmp_path, "verify", "radial", "--Z", "40", "--grid", "500,1000", "--tol", "1e-6")
    assert code == cli.EXIT_ACCEPTANCE
    assert run(tmp_path, "verify", "radial", "--grid", "a,b")[0] == cli.EXIT_INPUT
    assert run(tmp_path, "verify", "radial", "--Z", "80", "--grid", "100")[0] == cli.EXIT_CONDITION


def test_verify_radial_inclusion(tmp_path):
    code, out = run(tmp_path, "verify", "radial", "--Z", "40", "--grid", "1000,2000", "--tau", "0.01", "--l", "10")
    assert code == 0
    assert json.loads((out / "verify.json").read_text())["inclusion"]["inclusion"]["ok"]


def test_verify_oscillator(tmp_path):
    code, out = run(tmp_path, "verify", "oscillator", "--levels", "5")
    assert code == 0
    r = rows(out / "oscillator.csv")
    assert len(r) == 5
    assert all(float(x["rel_error"]) < 1e-3 for x in r)
    assert run(tmp_path, "verify", "oscillator", "--levels", "5", "--n", "50", "--tol", "1e-9")[0] == 5


def test_outputs_are_byte_identical(tmp_path):
    f = write(tmp_path / "h.json", {"u2": U2, "v0": [[0.0, 0.0], [0.0, 0.0]], "v1": [[1.0, 0.0], [0.0, 0.0]]})
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        cli.main(["flow", f, "--t1", "2", "--steps", "41", "--seed", "7", "--out", str(out)])
        cli.main(["penalty", "--figure-mode", "--out", str(out)])
        cli.main(["bounds", "--model", "coulomb", "--Z", "40", "--tau", "0.01", "--l", "10", "--out", str(out)])
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outputs[0].keys() == outputs[1].keys()
    assert len(outputs[0]) == 7
    for name in outputs[0]:
        assert outputs[0][name] == outputs[1][name], name


def test_alpha_override(tmp_path):
    code, out = run(tmp_path, "--alpha", "0.005", "bounds", "--model", "coulomb", "--Z", "40", "--tau", "0.01", "--l", "10")
    assert code == 0
    assert json.loads((out / "bounds.json").read_text())["config"]["alpha"] == 0.005
    assert run(tmp_path, "--alpha", "-1", "penalty")[0] == cli.EXIT_INPUT
