import csv

import pytest

from spsumma import bench
from spsumma.bench import COLUMNS, ExperimentSpec, main, run_experiment
from spsumma.formats import csc_from_coo
from spsumma.generators import RmatParams, rmat
from spsumma.mmio import write_matrix_market


def _summary(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == COLUMNS
    return rows[:-1], rows[-1]


@pytest.mark.parametrize("kind", bench.KINDS)
def test_every_kind_runs_and_checks(tmp_path, kind):
    out = tmp_path / f"{kind}.csv"
    assert main([kind, "--scale", "7", "--grid", "2x2", "--out", str(out)]) == 0
    rows, summary = _summary(out)
    assert summary["phase"] == "summary" and summary["check"] == "pass"
    assert float(summary["seconds"]) >= 0
    assert rows and all(r["phase"] != "summary" for r in rows)


def test_spgemm_counters_match_oracle(tmp_path):
    res = run_experiment(ExperimentSpec("spgemm", scale=10, grid="2x2"))
    s = res.summary
    assert res.ok and s["multiplies"] == s["flops_oracle"]
    assert s["blocking"] == 512
    assert s["measured_words_per_rank_mean"] == s["predicted_words_per_rank"]


def test_subgraph_blocks_do_not_exceed_matrix(tmp_path):
    res = run_experiment(ExperimentSpec("spref-subgraphs", scale=8, grid="2x2", chunks=10))
    assert res.ok and res.summary["nnz_c"] <= res.summary["nnz_a"]


def test_rerun_reproduces_counters(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        main(["restriction", "--scale", "7", "--grid", "2x2", "--order", "4", "--out", str(p)])
    rows_a, sum_a = _summary(paths[0])
    rows_b, sum_b = _summary(paths[1])
    assert rows_a == rows_b
    sum_a.pop("seconds"), sum_b.pop("seconds")
    assert sum_a == sum_b


def test_modes_and_latency_flags(tmp_path):
    seq = run_experiment(ExperimentSpec("spgemm", scale=7, grid="2x4", mode="seq"))
    conc = run_experiment(ExperimentSpec("spgemm", scale=7, grid="2x4", mode="conc"))
    assert seq.stats == conc.stats
    tree = run_experiment(ExperimentSpec("spgemm", scale=7, grid="4x4", latency="tree"))
    flat = run_experiment(ExperimentSpec("spgemm", scale=7, grid="4x4", latency="flat"))
    assert tree.stats.totals().words == flat.stats.totals().words
    assert tree.stats.totals().messages < flat.stats.totals().messages


def test_validation_failures_exit_nonzero(capsys):
    assert main(["spasgn", "--scale", "6", "--grid", "2x4"]) == 1
    assert main(["spgemm", "--scale", "6", "--grid", "3x3"]) == 1
    assert main(["spgemm", "--scale", "6", "--blocking", "5"]) == 1
    assert main(["spref-permute", "--matrix", "missing.mtx"]) == 1
    assert "bench:" in capsys.readouterr().err


def test_cross_check_failure_reports_diff(monkeypatch, capsys, tmp_path):
    real = bench.hypersparse_gemm

    def wrong(a, b, sr):
        c, fc = real(a, b, sr)
        r, col, v = c.coo()
        return csc_from_coo(r, col, v * 2, c.rows, c.cols), fc

    monkeypatch.setattr(bench, "hypersparse_gemm", wrong)
    out = tmp_path / "bad.csv"
    assert main(["spgemm", "--scale", "6", "--out", str(out)]) == 1
    _, summary = _summary(out)
    assert summary["check"] == "fail" and summary["seconds"] == ""
    assert "values differ" in capsys.readouterr().err


def test_matrix_market_and_index_files(tmp_path):
    a = rmat(RmatParams(6, seed=2))
    write_matrix_market(a, tmp_path / "a.mtx")
    (tmp_path / "rows.txt").write_text(" ".join(map(str, range(0, 64, 2))))
    (tmp_path / "cols.txt").write_text(" ".join(map(str, range(63, -1, -3))))
    spec = ExperimentSpec("spref-permute", grid="2x2", matrix=str(tmp_path / "a.mtx"),
                          rows_file=str(tmp_path / "rows.txt"),
                          cols_file=str(tmp_path / "cols.txt"),
                          save_inputs=str(tmp_path / "inputs"))
    res = run_experiment(spec)
    assert res.ok and res.summary["nnz_a"] == a.nnz
    assert (tmp_path / "inputs" / "spref-permute_A.mtx").exists()


def test_tall_skinny_shape():
    res = run_experiment(ExperimentSpec("tall-skinny", scale=9, grid="2x2", aspect=64))
    assert res.ok and res.summary["nnz_b"] == 8 * (512 // 64)
