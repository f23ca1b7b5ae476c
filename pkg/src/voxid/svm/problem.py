"""Dual QP data, solver state and KKT bookkeeping shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from voxid.errors import DimensionMismatch, IndexOutOfRange, SingleClassData, SvmError
from voxid.svm.kernels import KernelSpec


@dataclass
class TrainingProblem:
    """Binary soft-margin SVM dual: maximize sum(a) - 1/2 a'Qa, 0 <= a <= C, y'a = 0."""

    points: np.ndarray
    labels: np.ndarray
    C: float = 10.0
    kernel: KernelSpec | None = None
    tol: float = 1e-3
    eps: float = 1e-8
    max_iter: int = 10**7
    seed: int = 0

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.labels = np.asarray(self.labels, dtype=float).ravel()
        n = len(self.points)
        if len(self.labels) != n:
            raise DimensionMismatch(f"{n} points but {len(self.labels)} labels")
        if n < 2:
            raise SvmError("training needs at least two points")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise SvmError("labels must be -1 or +1")
        if not (np.any(self.labels > 0) and np.any(self.labels < 0)):
            raise SingleClassData("training data contains a single class")
        if not self.C > 0:
            raise SvmError("C must be positive")
        if self.kernel is None:
            self.kernel = KernelSpec.rbf(1.0 / self.points.shape[1])

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass
class SolverState:
    """Multipliers, bias and error cache E_i = f(x_i) - y_i.

    The error cache is kept current only on ``active`` (all indices when
    ``active`` is None); decomposition solvers restrict it to a working set.
    """

    alphas: np.ndarray
    bias: float
    error_cache: np.ndarray
    iterations: int = 0
    active: np.ndarray | None = None
    _view: tuple | None = field(default=None, repr=False)

    @classmethod
    def initial(cls, problem: TrainingProblem) -> "SolverState":
        # f == 0 everywhere while every multiplier is zero
        return cls(np.zeros(problem.n), 0.0, -problem.labels.copy())

    def restrict(self, problem: TrainingProblem, active) -> None:
        """Limit error-cache upkeep to ``active`` (None = every example)."""
        if active is None:
            self.active = None
            self._view = None
            return
        self.active = np.asarray(active, dtype=np.intp)
        self._view = None

    def view(self, problem: TrainingProblem):
        """(points, squared norms, index->row map) for the active examples."""
        if self._view is None:
            if self.active is None:
                pts = problem.points
                pos = None
            else:
                pts = problem.points[self.active]
                pos = np.full(problem.n, -1, dtype=np.intp)
                pos[self.active] = np.arange(len(self.active))
            self._view = (pts, np.einsum("ij,ij->i", pts, pts), pos)
        return self._view

    def objective(self, problem: TrainingProblem) -> float:
        """Dual objective; needs a complete error cache."""
        if self.active is not None:
            raise SvmError("objective needs an unrestricted error cache")
        g = self.error_cache + problem.labels - self.bias
        return dual_objective(self.alphas, problem.labels, g)


def dual_objective(alphas: np.ndarray, labels: np.ndarray, g: np.ndarray) -> float:
    """sum(a) - 1/2 sum_i a_i y_i g_i, with g_i = sum_j a_j y_j K_ij."""
    return float(alphas.sum() - 0.5 * np.dot(alphas * labels, g))


def kkt_violations(alphas, margins, C, tol) -> np.ndarray:
    """Vectorized margin gaps; ``margins`` holds y_i f(x_i).

    Zero where the KKT condition for the example's multiplier holds within
    ``tol``.
    """
    alphas = np.asarray(alphas)
    gap = np.zeros_like(margins)
    at_zero = alphas <= 0.0
    at_c = alphas >= C
    free = ~(at_zero | at_c)
    low = 1.0 - margins
    gap[at_zero] = np.where(low[at_zero] > tol, low[at_zero], 0.0)
    high = margins - 1.0
    gap[at_c] = np.where(high[at_c] > tol, high[at_c], 0.0)
    dev = np.abs(margins[free] - 1.0)
    gap[free] = np.where(dev > tol, dev, 0.0)
    return gap


def kkt_violation(state: SolverState, problem: TrainingProblem, i: int) -> float:
    if not 0 <= i < problem.n:
        raise IndexOutOfRange(f"example index {i} outside 0..{problem.n - 1}")
    y = problem.labels[i]
    margin = y * (state.error_cache[i] + y)
    return float(
        kkt_violations(state.alphas[i : i + 1], np.array([margin]), problem.C, problem.tol)[0]
    )


POLISH_MAX_FREE = 2000


def polish(problem: TrainingProblem, alphas: np.ndarray, g: np.ndarray):
    """Exact optimum on the face picked out by a converged solution.

    Bound multipliers stay where they are and the free ones solve

        Q_FF a_F + y_F b = 1 - Q_FC a_C,   y_F . a_F = -y_C . a_C

    The result is returned as ``(alphas, bias, g)`` only if the free
    multipliers stay strictly inside (0, C) and every example then meets
    its KKT condition within ``tol``; otherwise None.  Two solvers that
    stop on the same active set thus agree to roundoff instead of to tol.
    """
    C, y, X, kern = problem.C, problem.labels, problem.points, problem.kernel
    free = np.flatnonzero((alphas > 0) & (alphas < C))
    if len(free) == 0 or len(free) > POLISH_MAX_FREE:
        return None
    at_c = np.flatnonzero(alphas >= C)
    m = len(free)
    yF = y[free]
    K_FF = kern.matrix(X[free], X[free])
    A = np.zeros((m + 1, m + 1))
    A[:m, :m] = K_FF * np.outer(yF, yF)
    A[:m, m] = yF
    A[m, :m] = yF
    rhs = np.empty(m + 1)
    # g on the free rows minus their own share leaves the bound examples' part
    rhs[:m] = 1.0 - yF * (g[free] - K_FF @ (alphas[free] * yF))
    rhs[m] = -C * y[at_c].sum()
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    if not np.allclose(A @ sol, rhs, rtol=0, atol=1e-9 * (1.0 + np.abs(rhs).max())):
        return None
    new_free, bias = sol[:m], float(sol[m])
    if not np.all((new_free > 0) & (new_free < C)):
        return None
    out = alphas.copy()
    out[free] = new_free
    g_new = g + kern.matrix(X, X[free]) @ ((new_free - alphas[free]) * yF)
    if np.any(kkt_violations(out, y * (g_new + bias), C, problem.tol) > 0):
        return None
    return out, bias, g_new

