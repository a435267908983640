"""Command-line interface: flag grammar, exit codes, output formats,
atomicity, and byte-identical reruns."""

import json

import numpy as np
import pytest

from sketchla.cli import main
from sketchla.hashing import gaussians
from sketchla.matio import read_matrix_market, write_matrix_market
from sketchla.verify import gaussian_matrix


@pytest.fixture()
def problem(tmp_path):
    a = gaussian_matrix(60, 4, seed=1)
    b = gaussians(2, 60)
    a_path = tmp_path / "A.mtx"
    b_path = tmp_path / "b.mtx"
    write_matrix_market(a, a_path)
    write_matrix_market(b.reshape(-1, 1), b_path)
    return tmp_path, a_path, b_path, a, b


def test_regress_writes_solution_and_echoes_m(problem, capsys):
    tmp_path, a_path, b_path, a, b = problem
    out = tmp_path / "x.mtx"
    code = main(["regress", "--input", str(a_path), "--rhs", str(b_path),
                 "--eps", "0.5", "--delta", "0.333", "--kind", "tz",
                 "--seed", "7", "--output", str(out)])
    assert code == 0
    captured = capsys.readouterr()
    assert "m=" in captured.err
    assert captured.out == ""
    x = read_matrix_market(out)
    assert x.shape == (4, 1)


def test_verify_frobenius_bound_and_exit_code(problem, capsys):
    tmp_path = problem[0]
    out = tmp_path / "rep.json"
    code = main(["verify", "--experiment", "frobenius", "--d", "4", "--m", "100",
                 "--trials", "200", "--seed", "1", "--output", str(out)])
    report = json.loads(out.read_text())
    assert report["bound"] == pytest.approx(0.2)
    assert code == (0 if report["passed"] else 3)


def test_verify_embedding_passes(problem, tmp_path):
    out = tmp_path / "emb.json"
    code = main(["verify", "--experiment", "embedding", "--kind", "tz",
                 "--n", "100", "--d", "2", "--eps", "0.5", "--trials", "40",
                 "--seed", "0", "--output", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["passed"] is True


def test_verify_hash_independence(tmp_path):
    out = tmp_path / "hash.json"
    code = main(["verify", "--experiment", "hash-independence", "--k", "2",
                 "--p", "5", "--output", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["statistic"] == 0.0


def test_verify_product_experiment(tmp_path):
    out = tmp_path / "prod.json"
    code = main(["verify", "--experiment", "product", "--kind", "osnap-global",
                 "--n", "100", "--d", "3", "--d2", "4", "--eps", "0.3",
                 "--trials", "30", "--seed", "2", "--output", str(out)])
    report = json.loads(out.read_text())
    assert report["experiment"] == "matrix_product_error_check"
    assert report["params"]["d_a"] == 3 and report["params"]["d_b"] == 4
    assert code == (0 if report["passed"] else 3)


def test_verify_report_identical_across_runs(tmp_path):
    argv = ["verify", "--experiment", "embedding", "--kind", "osnap-block",
            "--n", "60", "--d", "2", "--eps", "0.5", "--trials", "20", "--seed", "5"]
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(argv + ["--output", str(out1)]) in (0, 3)
    assert main(argv + ["--output", str(out2)]) in (0, 3)
    assert out1.read_bytes() == out2.read_bytes()


def test_verify_missing_required_flag_is_exit_1(capsys):
    code = main(["verify", "--experiment", "frobenius", "--d", "4", "--trials", "5"])
    assert code == 1
    assert "--m" in capsys.readouterr().err


def test_sketch_block_divisibility_is_exit_1(capsys):
    code = main(["sketch", "--kind", "osnap-block", "--n", "100", "--m", "8", "--s", "3"])
    assert code == 1
    assert "divide" in capsys.readouterr().err


def test_sketch_writes_coordinate_file(tmp_path):
    out = tmp_path / "S.mtx"
    code = main(["sketch", "--kind", "osnap-block", "--n", "10", "--m", "8",
                 "--s", "2", "--seed", "3", "--output", str(out)])
    assert code == 0
    s = read_matrix_market(out)
    assert s.shape == (8, 10)
    assert s.nnz == 20


def test_apply_matches_sketch_times_input(problem, tmp_path):
    _, a_path, _, a, _ = problem
    s_path = tmp_path / "P.mtx"
    sa_path = tmp_path / "SA.mtx"
    args = ["--kind", "tz", "--m", "16", "--s", "1", "--seed", "11"]
    assert main(["sketch", "--n", "60"] + args + ["--output", str(s_path)]) == 0
    assert main(["apply", "--input", str(a_path)] + args + ["--output", str(sa_path)]) == 0
    p = read_matrix_market(s_path)
    sa = read_matrix_market(sa_path)
    assert np.allclose(sa, p.toarray() @ a, atol=1e-12)


def test_apply_sparse_input_file(tmp_path):
    import scipy.sparse as sp

    a = sp.csc_array(np.round(gaussian_matrix(40, 3, seed=22), 1))
    a_path = tmp_path / "sparse.mtx"
    out = tmp_path / "SA.mtx"
    write_matrix_market(a, a_path)
    code = main(["apply", "--input", str(a_path), "--kind", "osnap-block",
                 "--m", "12", "--s", "3", "--seed", "4", "--output", str(out)])
    assert code == 0
    sa = read_matrix_market(out)
    assert sa.shape == (12, 3)


def test_unknown_flag_exits_1(capsys):
    assert main(["regress", "--nope"]) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_subcommand_exits_1():
    assert main([]) == 1


def test_missing_input_file_exits_1(tmp_path, capsys):
    code = main(["leverage", "--input", str(tmp_path / "missing.mtx"),
                 "--eps", "0.3"])
    assert code == 1


def test_leverage_csv_format(problem, tmp_path):
    _, a_path, _, a, _ = problem
    out = tmp_path / "scores.csv"
    code = main(["leverage", "--input", str(a_path), "--eps", "0.3",
                 "--seed", "5", "--output", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "index,score"
    assert len(lines) == 61
    first = lines[1].split(",")
    assert first[0] == "0" and float(first[1]) >= 0.0


def test_leverage_rank_deficient_exits_2(tmp_path):
    a = gaussian_matrix(40, 3, seed=4)
    a[:, 2] = a[:, 0]
    path = tmp_path / "bad.mtx"
    write_matrix_market(a, path)
    code = main(["leverage", "--input", str(path), "--eps", "0.3"])
    assert code == 2


def test_lowrank_writes_three_factors(problem, tmp_path):
    _, a_path, _, a, _ = problem
    out = tmp_path / "lr.mtx"
    code = main(["lowrank", "--input", str(a_path), "--k", "2", "--eps", "0.5",
                 "--seed", "6", "--output", str(out)])
    assert code == 0
    u = read_matrix_market(tmp_path / "lr_u.mtx")
    s = read_matrix_market(tmp_path / "lr_s.mtx")
    v = read_matrix_market(tmp_path / "lr_v.mtx")
    assert u.shape == (60, 2) and s.shape == (2, 1) and v.shape == (4, 2)
    recon = (u * s[:, 0]) @ v.T
    assert np.linalg.norm(recon) > 0


def test_identical_invocations_byte_identical(problem, tmp_path):
    _, a_path, b_path, _, _ = problem
    out1, out2 = tmp_path / "x1.mtx", tmp_path / "x2.mtx"
    argv = ["regress", "--input", str(a_path), "--rhs", str(b_path),
            "--eps", "0.5", "--kind", "osnap-block", "--seed", "9"]
    assert main(argv + ["--output", str(out1)]) == 0
    assert main(argv + ["--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_no_partial_output_on_failure(tmp_path):
    # Output path collides with a directory: the rename fails, the exit code
    # is 1, and the temporary file is cleaned up.
    dest = tmp_path / "outdir"
    dest.mkdir()
    a_path = tmp_path / "A.mtx"
    write_matrix_market(gaussian_matrix(20, 2, seed=8), a_path)
    code = main(["apply", "--input", str(a_path), "--kind", "tz", "--m", "8",
                 "--s", "1", "--output", str(dest)])
    assert code == 1
    assert list(dest.iterdir()) == []
    leftovers = [p for p in tmp_path.iterdir() if p.name.startswith(".tmp-")]
    assert leftovers == []


def test_bench_subcommand_small(tmp_path):
    out = tmp_path / "bench.json"
    code = main(["bench", "--n", "2000", "--d", "4", "--kind", "tz", "--m", "64",
                 "--s", "1", "--nnz", "200", "2000", "20000", "--reps", "2",
                 "--output", str(out)])
    report = json.loads(out.read_text())
    assert report["experiment"] == "nnz_scaling_benchmark"
    assert code == (0 if report["passed"] else 3)


def test_stdout_output_when_no_file(problem, capsys):
    _, a_path, b_path, _, _ = problem
    code = main(["regress", "--input", str(a_path), "--rhs", str(b_path),
                 "--eps", "0.5", "--seed", "1"])
    assert code == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("%%MatrixMarket matrix array real general")


def test_cross_process_byte_identity(problem, tmp_path):
    # Same argv and seed in two fresh interpreter processes: identical bytes.
    import subprocess
    import sys

    _, a_path, b_path, _, _ = problem
    outs = [tmp_path / "p1.mtx", tmp_path / "p2.mtx"]
    for out in outs:
        cmd = [sys.executable, "-m", "sketchla.cli", "regress",
               "--input", str(a_path), "--rhs", str(b_path),
               "--eps", "0.5", "--kind", "osnap-global", "--seed", "123",
               "--output", str(out)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    assert outs[0].read_bytes() == outs[1].read_bytes()


def test_help_lists_defaults(capsys):
    assert main(["regress", "--help"]) == 0
    text = capsys.readouterr().out
    assert "--repeats" in text and "default" in text
    assert main(["verify", "--help"]) == 0
    assert "--experiment" in capsys.readouterr().out
