import csv
import io
import json

import numpy as np
import pytest

from voxid.bench import DEFAULT_SIZES, BenchReport, bench_problem, check_sizes, run_bench
from voxid.errors import BadSizeList
from voxid.synthetic import two_cluster_problem


def test_default_sizes():
    assert DEFAULT_SIZES == (2477, 3470, 4912, 7366, 9888)


def test_size_checks():
    with pytest.raises(BadSizeList):
        check_sizes([50, 200])
    with pytest.raises(BadSizeList):
        check_sizes([300, 200])
    with pytest.raises(BadSizeList):
        check_sizes([])
    assert check_sizes(["100", 101]) == [100, 101]


def test_generator_seeded():
    X1, y1 = two_cluster_problem(500, seed=3)
    X2, y2 = two_cluster_problem(500, seed=3)
    assert np.array_equal(X1, X2) and np.array_equal(y1, y2)
    # roughly 10% of labels disagree with the generating cluster
    X, y = two_cluster_problem(20000, seed=0, separation=4.0)
    assert abs(np.mean(np.sign(X[:, 0]) != y) - 0.1) < 0.03


def test_small_sweep():
    rep = run_bench([150, 300], solvers=["smo", "chunking", "fixed-size"], repeats=3, seed=1)
    assert [r.training_set_size for r in rep.rows] == [150] * 3 + [300] * 3
    assert all(r.wall_seconds >= 0 and not r.flagged and not r.error for r in rep.rows)
    for n in (150, 300):
        objs = [r.dual_objective for r in rep.rows if r.training_set_size == n]
        assert max(objs) - min(objs) <= 1e-3 * max(objs)
    again = run_bench([150, 300], solvers=["smo", "chunking", "fixed-size"], seed=1)
    assert [r.iterations for r in rep.rows] == [r.iterations for r in again.rows]


def test_report_formats():
    rep = run_bench([120], solvers=["smo"], kernel="rbf")
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert list(rows[0]) == list(BenchReport.FIELDS)
    d = json.loads(rep.to_json())
    assert set(d["rows"][0]) == set(BenchReport.FIELDS)
    assert d["rows"][0]["kernel"] == "rbf"
    assert "objective" in rep.to_table()


def test_flagging(monkeypatch):
    rep = run_bench([120], solvers=["smo", "chunking"])
    rep2 = BenchReport(rows=rep.rows)
    assert rep2.notes() == []
    # a solver failure is recorded and the sweep goes on
    import voxid.bench as bench

    calls = []

    def broken(self, problem):
        calls.append(self.name)
        from voxid.errors import SvmError
        raise SvmError("boom")

    monkeypatch.setattr(bench.SolverSpec, "train", broken)
    rep3 = run_bench([120, 130], solvers=["smo"])
    assert len(rep3.rows) == 2 and all(r.error == "boom" for r in rep3.rows)
    assert calls == ["smo", "smo"]


def test_bench_problem_kernel():
    assert bench_problem(100, "linear").kernel.kind == "linear"
    assert bench_problem(100, "rbf").kernel.kind == "rbf"
