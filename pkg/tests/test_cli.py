import json

import pytest

from cli import run


def _run(capsys, argv):
    code = run(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_prob_inclusion(capsys):
    code, out, _ = _run(capsys, ["--quiet", "prob", "--kernel", "diag(0.5,0.25)", "--subset", "0", "--mode", "inclusion"])
    assert code == 0
    assert json.loads(out) == {"value": 0.5}


@pytest.mark.parametrize("mode, subset, expected", [
    ("elementary", "0", 0.375),
    ("void", "0", 0.5),
    ("void", "0,1", 0.375),
    ("janossy", "0", 0.375),
])
def test_prob_modes(capsys, mode, subset, expected):
    code, out, _ = _run(capsys, ["--quiet", "prob", "--kernel", "diag(0.5,0.25)", "--subset", subset, "--mode", mode])
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(expected, abs=1e-14)


def test_validate(capsys):
    code, out, _ = _run(capsys, ["--quiet", "validate", "--kernel", "diag(0.25,0.5)"])
    report = json.loads(out)
    assert code == 0
    assert report["valid"] is True
    assert report["eigenvalues"] == pytest.approx([0.5, 0.25])


def test_invalid_kernel_exits_1(capsys):
    code, out, err = _run(capsys, ["--quiet", "validate", "--kernel", "diag(1.5)"])
    assert code == 1
    assert out == ""
    assert json.loads(err.strip().splitlines()[-1])["error"] == "SpectrumOutOfRange"


def test_parse_error_exits_2(capsys, tmp_path):
    code, _, err = _run(capsys, ["--quiet", "validate", "--kernel", str(tmp_path / "missing.json")])
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error"] == "ParseError"


def test_pmf_beyond_enum_cap_exits_3(capsys):
    kernel = "diag(" + ",".join(["0.5"] * 21) + ")"
    code, _, _ = _run(capsys, ["--quiet", "pmf", "--kernel", kernel])
    assert code == 3


def test_pmf(capsys):
    code, out, _ = _run(capsys, ["--quiet", "pmf", "--kernel", "diag(0.5,0.25)"])
    report = json.loads(out)
    assert code == 0
    assert list(report["probabilities"]) == ["", "0", "1", "0,1"]
    assert report["total"] == pytest.approx(1.0)


def test_sample_zero_draws_exits_1(capsys):
    code, _, _ = _run(capsys, ["--quiet", "sample", "--kernel", "diag(0.5,0.25)", "--draws", "0"])
    assert code == 1


def test_sample_is_byte_identical(capsys, monkeypatch):
    argv = ["--quiet", "sample", "--kernel", "diag(0.5,0.25,0.9)", "--draws", "3000", "--seed", "42"]
    monkeypatch.setenv("DPP_THREADS", "1")
    monkeypatch.setenv("DPP_REPLICATE_STRIDE", "500")
    _, first, _ = _run(capsys, argv)
    monkeypatch.setenv("DPP_THREADS", "4")
    _, second, _ = _run(capsys, argv)
    assert first == second
    report = json.loads(first)
    assert report["draws"] == 3000
    assert report["seed"] == 42


def test_counts(capsys):
    code, out, _ = _run(capsys, ["--quiet", "counts", "--kernel", "diag(0.5,0.25)"])
    report = json.loads(out)
    assert code == 0
    assert report["pmf"] == pytest.approx([0.375, 0.5, 0.125])
    assert report["subset"] == [0, 1]


def test_fock_check(capsys):
    code, out, _ = _run(capsys, ["--quiet", "fock-check", "--kernel", "diag(0.5,0.25,0.75)", "--m", "2"])
    report = json.loads(out)
    assert code == 0
    assert report["rotated_kernel_gap"] < 1e-9
    assert report["complement_discrepancy"] < 1e-10
    assert all(gap < 1e-9 for gap in report["key_identity_gaps"].values())
    assert all(gap < 1e-9 for gap in report["janossy_identity_gaps"].values())


def test_experiment_ust(capsys, tmp_path):
    graph = tmp_path / "triangle.json"
    graph.write_text(json.dumps({"vertices": 3, "edges": [[0, 1], [1, 2], [0, 2]]}))
    code, out, _ = _run(capsys, ["--quiet", "experiment", "ust", "--graph", str(graph), "--draws", "500", "--seed", "1"])
    report = json.loads(out)
    assert code == 0
    assert report["spanning_tree_count"] == 3
    assert report["dpp"]["all_spanning_trees"] is True


def test_experiment_cue(capsys):
    code, out, _ = _run(capsys, ["--quiet", "experiment", "cue", "--n", "4", "--arc-length", "3.0", "--replicates", "100"])
    report = json.loads(out)
    assert code == 0
    assert report["replicates"] == 100
    assert report["seed"] == 0


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = _run(capsys, ["--quiet", "--output", str(target), "prob", "--kernel", "diag(0.5)", "--subset", "0"])
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text()) == {"value": 0.5}


def test_bad_flags_exit_2(capsys):
    assert run(["prob", "--mode", "unknown"]) == 2


def test_flags_after_subcommand(capsys, tmp_path):
    target = tmp_path / "hist.json"
    argv = ["sample", "--kernel", "diag(0.5,0.25)", "--draws", "200", "--quiet", "--output", str(target)]
    code, out, err = _run(capsys, argv)
    assert code == 0
    assert out == ""
    assert " - INFO - " not in err
    assert json.loads(target.read_text())["draws"] == 200


def test_flags_after_nested_subcommand(capsys):
    code, out, _ = _run(capsys, ["experiment", "cue", "--n", "3", "--replicates", "100", "--quiet"])
    assert code == 0
    assert json.loads(out)["n"] == 3
