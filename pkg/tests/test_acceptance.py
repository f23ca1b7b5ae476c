"""Acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL: ...`` line; the lines
are repeated in the terminal summary (see conftest.py).
"""

from __future__ import annotations

import time
from decimal import Decimal

import numpy as np
import pytest

from oracles import brute_force_dual, dct_double_loop, direct_dft, gram
from voxid.bench import run_bench
from voxid.evaluation import EvaluationReport, success_pct
from voxid.features import LabeledDataset
from voxid.mfcc import cepstra, fft, hz_to_mel
from voxid.model_store import SpeakerRegistry, load_model, read_dataset_csv, save_model, write_dataset_csv
from voxid.svm import (
    Chunking,
    FixedSize,
    KernelSpec,
    TrainingProblem,
    classify,
    decision_value,
    decompose_train,
    kkt_violations,
    smo_train,
    train_one_vs_rest,
)

RESULTS: list[str] = []

# chunk size for the timing sweep; see the decisions ledger
BENCH_CHUNK_M = 500


def report(n: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    RESULTS.append(line)
    assert ok, line


def _random_problem(rng, n, kind, C, tol=1e-3):
    while True:
        y = rng.choice([-1.0, 1.0], n)
        if len(set(y)) == 2:
            break
    X = rng.normal(0, 1, (n, 2)) + 0.8 * y[:, None]
    spec = {"linear": KernelSpec.linear(), "rbf": KernelSpec.rbf(0.5),
            "polynomial": KernelSpec.polynomial(2, 1.0)}[kind]
    return TrainingProblem(X, y, C=C, kernel=spec, tol=tol)


def test_1_mel_anchor():
    m = hz_to_mel(1000.0)
    report(1, 999.9 <= m <= 1000.1, f"hz_to_mel(1000) = {m:.6f}")


def test_2_dct_against_double_loop():
    rng = np.random.default_rng(2)
    worst, worst_cK = 0.0, 0.0
    for _ in range(1000):
        e = rng.normal(0, 5, 20)
        got = cepstra(e, 19)
        ref = np.array(dct_double_loop(e, 20))
        worst = max(worst, float(np.max(np.abs(got - ref[:19]))))
        worst_cK = max(worst_cK, abs(ref[19]))
    # c_K from the package's own basis (order K) as well as the oracle
    from voxid.mfcc import cepstral_basis
    basis_cK = float(np.max(np.abs(cepstral_basis(20, [20]))))
    ok = worst <= 1e-12 and worst_cK < 1e-12 and basis_cK < 1e-12
    report(2, ok, f"max |dct - loop| = {worst:.2e}, |c_K| oracle {worst_cK:.2e}, basis {basis_cK:.2e}")


def test_3_fft_against_dft():
    rng = np.random.default_rng(3)
    worst_rel, worst_parseval = 0.0, 0.0
    for N in (8, 64, 1024):
        for _ in range(3 if N < 1024 else 1):
            x = rng.normal(size=N) + 1j * rng.normal(size=N)
            X = fft(x)
            ref = direct_dft(x)
            worst_rel = max(worst_rel, float(np.max(np.abs(X - ref)) / np.max(np.abs(ref))))
            lhs, rhs = float(np.sum(np.abs(x) ** 2)), float(np.sum(np.abs(X) ** 2) / N)
            worst_parseval = max(worst_parseval, abs(lhs - rhs) / lhs)
    ok = worst_rel <= 1e-9 and worst_parseval <= 1e-9
    report(3, ok, f"max relative error {worst_rel:.2e}, Parseval {worst_parseval:.2e}")


def test_4_smo_against_brute_force():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    kinds, Cs = ["linear", "rbf", "polynomial"], [0.1, 1.0, 10.0]
    worst_obj, worst_kkt = 0.0, 0.0
    for k in range(200):
        n = int(rng.integers(2, 9))
        p = _random_problem(rng, n, kinds[k % 3], Cs[(k // 3) % 3])
        kern = p.kernel
        best, _ = brute_force_dual(gram(p.points, kern.kind, kern.gamma, kern.degree, kern.coef0), p.labels, p.C)
        model = smo_train(p)
        worst_obj = max(worst_obj, abs(model.meta["objective"] - best))
        margins = p.labels * decision_value(model, p.points)
        viol = kkt_violations(model.alphas(p.n), margins, p.C, 0.0)
        worst_kkt = max(worst_kkt, float(np.max(viol)) / p.tol)
    dt = time.perf_counter() - t0
    ok = worst_obj <= 1e-3 and worst_kkt <= 10.0 and dt < 60
    report(4, ok, f"max |objective gap| {worst_obj:.2e}, max KKT/tol {worst_kkt:.2f}, {dt:.1f}s")


def test_5_solver_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    disagreements = 0
    for _ in range(50):
        while True:
            y = rng.choice([-1.0, 1.0], 200)
            if len(set(y)) == 2:
                break
        X = rng.normal(0, 0.6, (200, 2)) + 2.0 * y[:, None]
        p = TrainingProblem(X, y, C=10.0, kernel=KernelSpec.linear(), tol=1e-4)
        probes = rng.uniform(-5, 5, (1000, 2))
        models = [smo_train(p), decompose_train(p, Chunking(10)), decompose_train(p, FixedSize(10, 2))]
        pts = np.vstack([X, probes])
        signs = [classify(m, pts) for m in models]
        disagreements += int(np.count_nonzero((signs[0] != signs[1]) | (signs[0] != signs[2])))
    dt = time.perf_counter() - t0
    ok = disagreements == 0 and dt < 120
    report(5, ok, f"{disagreements} sign disagreements over 50 x 1200 points, {dt:.1f}s")


def test_6_timing_trend():
    t0 = time.perf_counter()
    rep = run_bench([2477, 4912, 9888], kernel="linear", solvers=["smo", "chunking"], chunk_M=BENCH_CHUNK_M)
    dt = time.perf_counter() - t0
    times = {(r.training_set_size, r.solver): r.wall_seconds for r in rep.rows}
    sizes = (2477, 4912, 9888)
    faster = all(times[(n, "smo")] < times[(n, "chunking")] for n in sizes)
    ratio = times[(9888, "smo")] / times[(9888, "chunking")]
    clean = not any(r.flagged or r.error for r in rep.rows)
    detail = ", ".join(f"n={n}: smo {times[(n, 'smo')]:.2f}s vs chunking {times[(n, 'chunking')]:.2f}s"
                       for n in sizes)
    ok = faster and ratio <= 0.5 and clean and dt < 600
    report(6, ok, f"{detail}; ratio at 9888 {ratio:.3f}; total {dt:.0f}s")


def test_7_speaker_identification(corpus):
    t0 = time.perf_counter()
    pct = {}
    for solver in ("smo", "chunking"):
        mc = train_one_vs_rest(corpus.train, kernel=KernelSpec.rbf(1.0 / corpus.train.feature_dim), solver=solver)
        rep = EvaluationReport.from_predictions(corpus.test.labels, mc.predict(corpus.test.features),
                                                mc.speakers, solver=solver)
        pct[solver] = rep.aggregate_pct
    dt = time.perf_counter() - t0
    ok = min(pct.values()) >= Decimal("90.00") and pct["smo"] == pct["chunking"] and dt < 120
    report(7, ok, f"smo {pct['smo']}%, chunking {pct['chunking']}%, {dt:.1f}s")


def test_8_success_rate_arithmetic():
    a, b = success_pct(147, 160), success_pct(152, 160)
    rep = EvaluationReport.from_counts({1: (147, 160)})
    ok = a == Decimal("91.88") and b == Decimal("95.00") and rep.aggregate_pct == a
    report(8, ok, f"147/160 -> {a}, 152/160 -> {b}")


def test_9_round_trips(tmp_path):
    rng = np.random.default_rng(9)
    X = np.vstack([rng.normal(c, 1.0, (15, 6)) for c in (-2.0, 0.0, 2.0)])
    ds = LabeledDataset(X, np.repeat([1, 2, 3], 15))
    mc = train_one_vs_rest(ds)
    save_model(mc, SpeakerRegistry.from_dataset(ds), tmp_path / "m.model")
    mc2, _ = load_model(tmp_path / "m.model")
    probes = rng.normal(0, 3, (100, 6))
    model_err = float(np.max(np.abs(mc2.scores(probes) - mc.scores(probes))))
    csv_ds = LabeledDataset(rng.normal(0, 1e3, (20, 6)) * 10.0 ** rng.integers(-300, 300, (20, 6)),
                            rng.integers(1, 9, 20))
    write_dataset_csv(csv_ds, tmp_path / "d.csv")
    back = read_dataset_csv(tmp_path / "d.csv")
    csv_exact = (back.features.tobytes() == csv_ds.features.tobytes()
                 and np.array_equal(back.labels, csv_ds.labels))
    ok = model_err <= 1e-12 and csv_exact
    report(9, ok, f"max decision-value change {model_err:.2e}, CSV exact: {csv_exact}")
