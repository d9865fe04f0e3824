import json

import numpy as np
import pytest

from wishmom.cli import run

from conftest import PAPER_M, PAPER_N, PAPER_SIGMA


def matrix_doc(m):
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


@pytest.fixture
def paper_file(tmp_path):
    doc = {
        "n": PAPER_N,
        "sigma": matrix_doc(PAPER_SIGMA),
        "m_matrix": matrix_doc(PAPER_M),
        "convention": "paper",
    }
    path = tmp_path / "params.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_cumulants_paper_fixture(paper_file):
    code, out = run(["cumulants", paper_file, "--order", "3"])
    assert code == 0
    doc = json.loads(out)
    assert doc["convention"] == "paper"
    assert doc["command"] == "cumulants"
    assert len(doc["input_sha256"]) == 64
    assert doc["library_version"]
    first = doc["results"]["orders"][0]["value"]
    assert abs(first["re"] - 0.09629) < 1e-5
    assert abs(first["im"]) < 1e-12


def test_output_is_byte_identical(paper_file):
    code1, out1 = run(["moments", paper_file, "--order", "4"])
    code2, out2 = run(["moments", paper_file, "--order", "4"])
    assert code1 == code2 == 0
    assert out1 == out2
    # keys sorted at every level
    doc = json.loads(out1)
    assert list(doc) == sorted(doc)


def test_convention_override(paper_file):
    _, out_paper = run(["cumulants", paper_file, "--order", "1"])
    _, out_std = run(["cumulants", paper_file, "--order", "1",
                      "--convention", "standard"])
    v_paper = json.loads(out_paper)["results"]["orders"][0]["value"]["re"]
    v_std = json.loads(out_std)["results"]["orders"][0]["value"]["re"]
    assert abs((v_std - v_paper) - 2 * 0.001) < 1e-12  # 2 Tr(M)


def test_malformed_json_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out = run(["cumulants", str(bad)])
    assert code == 2
    assert "validation error" in out


def test_missing_file_and_missing_flags(tmp_path):
    code, _ = run(["cumulants", str(tmp_path / "absent.json")])
    assert code == 2
    code, out = run(["necklaces"])
    assert code == 2
    assert "kind" in out


def test_necklaces_command():
    code, out = run(["necklaces", "--kind", "1,1,1"])
    assert code == 0
    doc = json.loads(out)
    reps = [row["representative"] for row in doc["results"]["necklaces"]]
    assert reps == ["123", "132"]


def test_joint_commands(tmp_path):
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    sigma = a @ a.conj().T / 2
    h1 = rng.normal(size=(2, 2))
    h2 = rng.normal(size=(2, 2))
    doc = {
        "n": 4,
        "sigma": matrix_doc(sigma),
        "h": [matrix_doc(h1), matrix_doc(h2)],
        "index": [1, 1],
        "convention": "standard",
    }
    path = tmp_path / "joint.json"
    path.write_text(json.dumps(doc))
    code, out = run(["joint-moments", str(path)])
    assert code == 0
    got = json.loads(out)["results"]["value"]
    from wishmom import build, joint_moment
    params, _ = build(4, sigma, None, "standard")
    want = joint_moment(params, [h1, h2], (1, 1))
    assert abs(complex(got["re"], got["im"]) - want) < 1e-12 * abs(want)
    code, out = run(["joint-cumulants", str(path), "--index", "1,2"])
    assert code == 0
    assert json.loads(out)["results"]["index"] == [1, 2]


def test_generalized_command(tmp_path):
    rng = np.random.default_rng(1)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    sigma = a @ a.conj().T / 2
    doc = {
        "n": 3,
        "sigma": matrix_doc(sigma),
        "h": [matrix_doc(np.eye(2)), matrix_doc(np.eye(2))],
        "index": [2, 1],  # one-line permutation images: the transposition
    }
    path = tmp_path / "gen.json"
    path.write_text(json.dumps(doc))
    code, out = run(["generalized", str(path)])
    assert code == 0
    doc_out = json.loads(out)
    assert doc_out["results"]["fully_evaluated"] is True  # central input
    assert len(doc_out["results"]["terms"]) == 4


def test_permanent_command(tmp_path):
    y = np.array([[1.0, 2.0], [3.0, 4.0]])
    path = tmp_path / "perm.json"
    path.write_text(json.dumps({"n": 1, "sigma": matrix_doc(y)}))
    code, out = run(["permanent", str(path), "--d", "1"])
    assert code == 0
    assert json.loads(out)["results"]["value"]["re"] == pytest.approx(10.0)
    code, out = run(["permanent", str(path), "--d", "-1", "--index", "1,1"])
    assert code == 0
    doc = json.loads(out)
    assert doc["results"]["route"] == "master"
    # per_{-1} = (-1)^p det
    assert doc["results"]["value"]["re"] == pytest.approx(1 * 4 - 2 * 3)


def test_polykay_command(tmp_path):
    x = np.diag([1.0, 2.0, 3.0])
    path = tmp_path / "poly.json"
    path.write_text(json.dumps({"n": 1, "sigma": matrix_doc(x)}))
    code, out = run(["polykay", str(path), "--order", "2"])
    assert code == 0
    rows = json.loads(out)["results"]["orders"]
    assert rows[0]["value"] == pytest.approx(2.0)  # mean eigenvalue


def test_exit_code_numerical(tmp_path):
    doc = {
        "n": 2,
        "sigma": matrix_doc(np.diag([1.0, 0.0])),
        "m_matrix": matrix_doc(np.eye(2)),
        "h": [matrix_doc(np.eye(2)), matrix_doc(np.eye(2))],
        "index": [1, 1],
    }
    path = tmp_path / "singular.json"
    path.write_text(json.dumps(doc))
    code, out = run(["joint-moments", str(path)])
    assert code == 3
    assert "SingularMatrix" in out


def test_exit_code_budget(paper_file):
    code, out = run(["moments", paper_file, "--order", "25"])
    assert code == 4
    assert "budget" in out


def test_csv_format(paper_file):
    code, out = run(["cumulants", paper_file, "--order", "2", "--format", "csv"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "order,value_re,value_im,convention"
    assert len(lines) == 3
    assert lines[1].endswith(",paper")


def test_stdin_input(monkeypatch, capsys):
    import io
    import sys

    doc = json.dumps({"n": 2, "sigma": {"re": [[1.0, 0.0], [0.0, 1.0]]}})

    class FakeStdin:
        buffer = io.BytesIO(doc.encode())

    monkeypatch.setattr(sys, "stdin", FakeStdin)
    code, out = run(["cumulants", "-", "--order", "1"])
    assert code == 0
    assert json.loads(out)["results"]["orders"][0]["value"]["re"] == pytest.approx(4.0)


def test_mc_verify_command(tmp_path):
    rng = np.random.default_rng(2)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    sigma = a @ a.conj().T / 2
    m = a.conj().T @ a / 4
    doc = {"n": 3, "sigma": matrix_doc(sigma), "m_matrix": matrix_doc(m)}
    path = tmp_path / "mc.json"
    path.write_text(json.dumps(doc))
    code, out = run(["mc-verify", str(path), "--identity", "sheffer",
                     "--samples", "20000", "--seed", "5", "--n2", "2"])
    assert code == 0
    report = json.loads(out)
    assert report["convention"] == "standard"
    assert report["seed"] == 5
    assert report["results"]["max_abs_z"] <= 5.0
