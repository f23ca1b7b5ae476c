"""SMO versus decomposition timing sweeps on seeded synthetic data."""

from __future__ import annotations

import csv
import io
import json
import logging
import statistics
import time
from dataclasses import dataclass, field

from voxid.errors import BadSizeList, VoxidError
from voxid.svm.kernels import KernelSpec
from voxid.svm.multiclass import SolverSpec
from voxid.svm.problem import TrainingProblem
from voxid.synthetic import two_cluster_problem

log = logging.getLogger(__name__)

DEFAULT_SIZES = (2477, 3470, 4912, 7366, 9888)
DEFAULT_SOLVERS = ("smo", "chunking")
MIN_SIZE = 100
BENCH_DIM = 2
BENCH_C = 1.0
AGREEMENT = 1e-3


@dataclass
class BenchRow:
    training_set_size: int
    solver: str
    kernel: str
    wall_seconds: float | None
    iterations: int | None
    support_vector_count: int | None
    dual_objective: float | None
    flagged: bool = False
    error: str = ""


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    seed: int = 0
    repeats: int = 1

    FIELDS = ("training_set_size", "solver", "kernel", "wall_seconds", "iterations",
              "support_vector_count", "dual_objective")

    def records(self) -> list[dict]:
        return [{k: getattr(r, k) for k in self.FIELDS} for r in self.rows]

    def notes(self) -> list[dict]:
        """Rows that failed, were truncated or disagree on the objective."""
        return [{"training_set_size": r.training_set_size, "solver": r.solver,
                 "note": r.error or "objective mismatch"} for r in self.rows if r.error or r.flagged]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.FIELDS)
        for rec in self.records():
            w.writerow(["" if v is None else v for v in rec.values()])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"rows": self.records(), "flagged": self.notes()}, indent=2)

    def to_table(self) -> str:
        head = ["size", "solver", "kernel", "seconds", "iterations", "SVs", "objective", "note"]
        body = []
        for r in self.rows:
            body.append([
                str(r.training_set_size), r.solver, r.kernel,
                "-" if r.wall_seconds is None else f"{r.wall_seconds:.3f}",
                "-" if r.iterations is None else str(r.iterations),
                "-" if r.support_vector_count is None else str(r.support_vector_count),
                "-" if r.dual_objective is None else f"{r.dual_objective:.6g}",
                r.error or ("objective mismatch" if r.flagged else ""),
            ])
        widths = [max(len(x[c]) for x in [head] + body) for c in range(len(head))]
        lines = ["  ".join(x[c].rjust(widths[c]) for c in range(len(head))).rstrip() for x in [head] + body]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)


def check_sizes(sizes) -> list[int]:
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise BadSizeList("size list is empty")
    small = [s for s in sizes if s < MIN_SIZE]
    if small:
        raise BadSizeList(f"sizes must be >= {MIN_SIZE}, got {small}")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise BadSizeList("sizes must be strictly increasing")
    return sizes


def bench_problem(n: int, kernel: str = "linear", seed: int = 0, C: float = BENCH_C) -> TrainingProblem:
    """Two Gaussian clusters with 10% label noise, seeded by (seed, n)."""
    X, y = two_cluster_problem(n, dim=BENCH_DIM, seed=seed)
    spec = KernelSpec.linear() if kernel == "linear" else KernelSpec.rbf(1.0 / BENCH_DIM)
    return TrainingProblem(X, y, C=C, kernel=spec, seed=seed)


def run_bench(sizes=DEFAULT_SIZES, kernel: str = "linear", solvers=DEFAULT_SOLVERS, seed: int = 0,
              repeats: int = 1, C: float = BENCH_C, chunk_M: int = 50, q: int = 50, swap: int = 10,
              progress=None) -> BenchReport:
    """Train every solver on each size; time is the median over ``repeats``.

    Rows whose dual objective differs from the size's best by more than
    1e-3 relative are flagged. A failing solver leaves an error row and the
    sweep continues.
    """
    sizes = check_sizes(sizes)
    if repeats < 1:
        raise BadSizeList("repeats must be >= 1")
    specs = [SolverSpec(s, chunk_M=chunk_M, q=q, swap=swap) for s in solvers]
    report = BenchReport(seed=seed, repeats=repeats)
    for n in sizes:
        problem = bench_problem(n, kernel, seed, C)
        rows = []
        for spec in specs:
            try:
                times = []
                for _ in range(repeats):
                    t0 = time.perf_counter()
                    model = spec.train(problem)
                    times.append(time.perf_counter() - t0)
                row = BenchRow(n, spec.name, kernel, statistics.median(times), int(model.meta["iterations"]),
                               model.n_support, float(model.meta["objective"]))
                if model.truncated:
                    row.error = "truncated"
            except VoxidError as exc:
                log.error("size %d, %s: %s", n, spec.name, exc)
                row = BenchRow(n, spec.name, kernel, None, None, None, None, error=str(exc))
            rows.append(row)
            if progress:
                progress(row)
        done = [r.dual_objective for r in rows if r.dual_objective is not None]
        if done:
            best = max(done)
            for r in rows:
                if r.dual_objective is not None:
                    r.flagged = abs(r.dual_objective - best) > AGREEMENT * max(abs(best), 1.0)
        report.rows += rows
    return report
