import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from sweeppath import solve_path
from sweeppath.cli import main, parse_grid
from sweeppath.errors import ProblemError
from sweeppath.io import eval_path_dict, load_problem_document, parse_problem_document
from sweeppath.oracle import minimize_penalized_grid

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
TOY = str(FIXTURES / "toy.json")
TOY_QP = str(FIXTURES / "toy_qp.json")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write_doc(tmp_path, doc, name="doc.json"):
    f = tmp_path / name
    f.write_text(json.dumps(doc))
    return str(f)


def test_solve_toy(capsys):
    code, out, _ = run(capsys, "solve", TOY_QP)
    assert code == 0
    doc = json.loads(out)
    assert doc["format"] == "sweeppath-path"
    np.testing.assert_allclose(doc["breakpoints"], [0.0, 0.2116], atol=1e-4)
    np.testing.assert_allclose(doc["terminal"]["x"], [0.3787, 0.6213], atol=1e-4)
    assert doc["segments"][-1]["rho_end"] is None
    assert doc["segments"][-1]["active"][0]["index"] == 2
    assert doc["segments"][-1]["active"][0]["kind"] == "ineq"
    assert set(doc["tolerances"]) >= {"residual", "time", "pivot"}


def test_solve_writes_output_file(capsys, tmp_path):
    target = tmp_path / "path.json"
    code, out, _ = run(capsys, "solve", TOY, "--output", target)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["m"] == 2


def test_round_trip_from_file_alone(capsys, tmp_path):
    for name in ("toy.json", "fish.json", "concave.json"):
        target = tmp_path / f"{name}.path"
        assert run(capsys, "solve", FIXTURES / name, "-o", target)[0] == 0
        doc = json.loads(target.read_text())
        path = solve_path(load_problem_document(str(FIXTURES / name)).problem)
        top = 1.2 * path.terminal_rho + 1.0
        for rho in np.concatenate([np.linspace(0, top, 97), path.breakpoints]):
            np.testing.assert_allclose(eval_path_dict(doc, rho), path.eval_at(rho), rtol=0, atol=1e-10)


def test_feasible_document_single_segment(capsys, tmp_path):
    f = write_doc(tmp_path, {"A": [[1, 0], [0, 1]], "b": [-0.1, -0.1],
                             "constraints": {"W": [[1, 1]], "e": [1]}})
    code, out, _ = run(capsys, "solve", f)
    assert code == 0
    assert len(json.loads(out)["segments"]) == 1


def test_duplicate_row_exit_1(capsys):
    code, _, err = run(capsys, "solve", FIXTURES / "duplicate_row.json")
    assert code == 1
    assert "DependentConstraints" in err


def test_indefinite_exit_2(capsys, tmp_path):
    f = write_doc(tmp_path, {"A": [[1, 2], [2, 1]], "b": [0, 0], "constraints": {}})
    code, _, err = run(capsys, "solve", f)
    assert code == 2
    assert "NotPositiveDefinite" in err


def test_segment_cap_exit_2(capsys):
    code, _, err = run(capsys, "solve", FIXTURES / "fish.json", "--max-segments", 1)
    assert code == 2
    assert "MaxSegmentsExceeded" in err


@pytest.mark.parametrize("content", ["{not json", "[1, 2]"])
def test_bad_input_exit_1(capsys, tmp_path, content):
    f = tmp_path / "bad.json"
    f.write_text(content)
    assert run(capsys, "solve", f)[0] == 1


def test_missing_file_exit_1(capsys, tmp_path):
    assert run(capsys, "solve", tmp_path / "nope.json")[0] == 1


def test_eval_toy(capsys):
    code, out, _ = run(capsys, "eval", TOY_QP, "--rho", 0)
    assert code == 0
    np.testing.assert_allclose(json.loads(out)["x"], [0.0835, 1.3004], atol=1e-4)
    code, out, _ = run(capsys, "eval", TOY_QP, "--rho", 1e9)
    res = json.loads(out)
    np.testing.assert_allclose(res["x"], [0.3787, 0.6213], atol=1e-4)
    assert [a["index"] for a in res["active"]] == [2] and res["df"] == 1
    code, out, _ = run(capsys, "eval", TOY_QP, "--rho", 0.1)
    p = load_problem_document(TOY_QP).problem
    np.testing.assert_allclose(json.loads(out)["x"], minimize_penalized_grid(p, 0.1), atol=1e-5)


def test_eval_negative_rho(capsys):
    assert run(capsys, "eval", TOY_QP, "--rho", -1)[0] == 1


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["rho", "rss", "df", "cp"]
    return [(float(a), float(b), int(c), float(d)) for a, b, c, d in rows[1:]]


def test_profile_toy_grid(capsys):
    code, out, _ = run(capsys, "profile", TOY, "--sigma2", 0.01)
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 3
    assert [r[2] for r in rows] == [2, 2, 1]


def test_profile_single_point(capsys):
    for grid in ("0", "0,"):
        code, out, _ = run(capsys, "profile", TOY, "--grid", grid, "--sigma2", 0.01)
        rows = read_csv(out)
        assert code == 0 and len(rows) == 1 and rows[0][2] == 2


def test_profile_bad_count(capsys):
    code, out, _ = run(capsys, "profile", TOY, "--grid", "-3", "--sigma2", 0.01)
    assert code == 1 and out == ""


def test_profile_full_precision(capsys):
    code, out, _ = run(capsys, "profile", TOY, "--grid", "0.1,", "--sigma2", 0.01)
    rss = out.splitlines()[1].split(",")[1]
    assert float(rss) == float(repr(float(rss)))
    assert len(rss.replace(".", "").lstrip("0")) >= 15


def test_profile_concave(capsys):
    code, out, _ = run(capsys, "profile", FIXTURES / "concave.json")
    assert code == 0
    rows = read_csv(out)
    assert len(rows) >= 100
    rho = [r[0] for r in rows]
    assert rho == sorted(rho)
    rss = np.array([r[1] for r in rows])
    assert np.all(np.diff(rss) >= -1e-10 * rss.max())
    assert rows[0][2] == 100
    assert all(np.isfinite(r[3]) for r in rows)
    path = solve_path(load_problem_document(str(FIXTURES / "concave.json")).problem)
    assert set(path.breakpoints.tolist()) <= set(rho)


def test_profile_count_grid(capsys):
    code, out, _ = run(capsys, "profile", TOY, "--grid", "5", "--sigma2", 0.01)
    assert code == 0
    assert len(read_csv(out)) == 5


def test_profile_without_provenance(capsys):
    code, _, err = run(capsys, "profile", TOY_QP, "--sigma2", 1.0)
    assert code == 1
    assert "least squares" in err


def test_profile_needs_sigma2_when_n_equals_m(capsys):
    code, _, err = run(capsys, "profile", FIXTURES / "fish.json")
    assert code == 1 and "--sigma2" in err
    assert run(capsys, "profile", FIXTURES / "fish.json", "--sigma2", 0.01)[0] == 0


def test_tolerance_flags_echoed(capsys):
    code, out, _ = run(capsys, "solve", TOY, "--tol-residual", 1e-7, "--tol-time", 1e-8, "--tol-pivot", 1e-11)
    tol = json.loads(out)["tolerances"]
    assert (tol["residual"], tol["time"], tol["pivot"]) == (1e-7, 1e-8, 1e-11)


def test_parse_grid():
    assert parse_grid("7") == 7
    assert parse_grid("0") == [0.0]
    assert parse_grid("0, 0.5,1") == [0.0, 0.5, 1.0]
    with pytest.raises(ProblemError):
        parse_grid("a,b")
    with pytest.raises(ProblemError):
        parse_grid("-1,2")


@pytest.mark.parametrize("doc", [
    {"b": [1.0], "constraints": {}},
    {"A": [[1.0]], "b": [1.0], "X": [[1.0]], "y": [1.0], "constraints": {}},
    {"A": [[1.0]], "b": [1.0]},
    {"A": [[1.0]], "b": [1.0], "constraints": {}, "shape": {"kind": "isotone"}},
    {"y": [1.0, 2.0], "shape": {"kind": "isotone", "colour": 1}},
    {"y": [1.0, 2.0], "shape": {"kind": "wiggly"}},
])
def test_invalid_documents(doc):
    with pytest.raises(ProblemError):
        parse_problem_document(doc)


def test_shape_document_defaults_to_identity_design():
    doc = parse_problem_document({"y": [3.0, 1.0], "weights": [1.0, 3.0], "shape": {"kind": "isotone"}})
    np.testing.assert_array_equal(doc.problem.X, np.eye(2))
    np.testing.assert_allclose(solve_path(doc.problem).terminal_x, [1.5, 1.5])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sweeppath", "eval", TOY_QP, "--rho", "0.1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0, res.stderr
    np.testing.assert_allclose(json.loads(res.stdout)["x"], [0.2230, 0.9794], atol=1e-4)
