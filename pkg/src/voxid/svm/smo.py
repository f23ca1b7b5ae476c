"""Sequential minimal optimization.

The analytic two-multiplier step and Platt's selection heuristics.  The
same loop also solves the working-set sub-problems of the decomposition
trainers, with the error cache restricted to the working set.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from voxid.errors import IndexOutOfRange, IterationLimitExceeded
from voxid.svm.kernels import kernel_eval
from voxid.svm.model import SvmModel
from voxid.svm.problem import SolverState, TrainingProblem, polish

log = logging.getLogger(__name__)


def solve_two_multipliers(state: SolverState, problem: TrainingProblem, i: int, j: int) -> bool:
    """Jointly optimize alpha_i and alpha_j; return True if they moved."""
    n = problem.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexOutOfRange(f"indices ({i}, {j}) outside 0..{n - 1}")
    if i == j:
        return False
    alphas, E, y = state.alphas, state.error_cache, problem.labels
    C, eps = problem.C, problem.eps
    a1, a2 = alphas[i], alphas[j]
    y1, y2 = y[i], y[j]
    E1, E2 = E[i], E[j]
    s = y1 * y2
    if y1 != y2:
        L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
    else:
        L, H = max(0.0, a1 + a2 - C), min(C, a1 + a2)
    if L >= H:
        return False

    x1, x2 = problem.points[i], problem.points[j]
    kern = problem.kernel
    k11 = kernel_eval(kern, x1, x1)
    k22 = kernel_eval(kern, x2, x2)
    k12 = kernel_eval(kern, x1, x2)
    eta = 2.0 * k12 - k11 - k22

    if eta < 0:
        new2 = a2 - y2 * (E1 - E2) / eta
        new2 = min(max(new2, L), H)
    else:
        # objective is linear along the constraint line: compare the ends
        b = state.bias
        v1 = E1 + y1 - b - a1 * y1 * k11 - a2 * y2 * k12
        v2 = E2 + y2 - b - a1 * y1 * k12 - a2 * y2 * k22

        def pair_objective(t):
            u = a1 + s * (a2 - t)
            return (u + t - 0.5 * k11 * u * u - 0.5 * k22 * t * t
                    - s * k12 * u * t - y1 * u * v1 - y2 * t * v2)

        lo, hi = pair_objective(L), pair_objective(H)
        if lo > hi + eps:
            new2 = L
        elif lo < hi - eps:
            new2 = H
        else:
            new2 = a2

    snap = 1e-8 * C
    if new2 < snap:
        new2 = 0.0
    elif new2 > C - snap:
        new2 = C
    if abs(new2 - a2) < eps * (new2 + a2 + eps):
        return False
    new1 = a1 + s * (a2 - new2)
    # roundoff residues would otherwise masquerade as free multipliers
    if new1 < snap or new1 > C - snap:
        new1 = 0.0 if new1 < snap else C
        new2 = a2 + s * (a1 - new1)
        new2 = 0.0 if new2 < snap else C if new2 > C - snap else new2
        if abs(new2 - a2) < eps * (new2 + a2 + eps):
            return False

    d1 = y1 * (new1 - a1)
    d2 = y2 * (new2 - a2)
    b = state.bias
    b1 = b - E1 - d1 * k11 - d2 * k12
    b2 = b - E2 - d1 * k12 - d2 * k22
    if 0.0 < new1 < C:
        new_b = b1
    elif 0.0 < new2 < C:
        new_b = b2
    else:
        new_b = 0.5 * (b1 + b2)

    pts, sq, pos = state.view(problem)
    delta = d1 * kern.row(pts, x1, sq) + d2 * kern.row(pts, x2, sq) + (new_b - b)
    if state.active is None:
        E += delta
    else:
        E[state.active] += delta
    alphas[i] = new1
    alphas[j] = new2
    state.bias = new_b
    state.iterations += 1
    return True


class PlattLoop:
    """Platt's outer loop with two-threshold optimality bookkeeping.

    Optimality is judged with F_i = E_i - b against b_up = min F over
    I_up and b_low = max F over I_low (Keerthi et al.'s modification of
    Platt's single-threshold check, which stalls on noisy data).  The
    second choice is the extreme-F partner, i.e. the one maximizing
    |E_i - E_j|, with Platt's random-start fallbacks.  On return the bias
    is the midpoint of the two thresholds, so every active example meets
    its KKT condition within ``tol``.
    """

    def __init__(self, problem: TrainingProblem, state: SolverState, rng: np.random.Generator):
        self.problem = problem
        self.state = state
        self.rng = rng
        self.truncated = False
        self.idx = np.arange(problem.n) if state.active is None else state.active
        self._refresh(self.idx)

    def _F(self, i):
        return self.state.error_cache[i] - self.state.bias

    def _in_up(self, i) -> bool:
        a, y = self.state.alphas[i], self.problem.labels[i]
        return (y > 0 and a < self.problem.C) or (y < 0 and a > 0)

    def _in_low(self, i) -> bool:
        a, y = self.state.alphas[i], self.problem.labels[i]
        return (y > 0 and a > 0) or (y < 0 and a < self.problem.C)

    def _refresh(self, idx: np.ndarray) -> None:
        """Recompute (b_up, i_up) and (b_low, i_low) over ``idx``."""
        a, y, C = self.state.alphas[idx], self.problem.labels[idx], self.problem.C
        F = self.state.error_cache[idx] - self.state.bias
        up = ((y > 0) & (a < C)) | ((y < 0) & (a > 0))
        low = ((y > 0) & (a > 0)) | ((y < 0) & (a < C))
        if up.any():
            k = int(np.argmin(np.where(up, F, np.inf)))
            self.b_up, self.i_up = float(F[k]), int(idx[k])
        else:
            self.b_up, self.i_up = np.inf, -1
        if low.any():
            k = int(np.argmax(np.where(low, F, -np.inf)))
            self.b_low, self.i_low = float(F[k]), int(idx[k])
        else:
            self.b_low, self.i_low = -np.inf, -1

    def _non_bound(self) -> np.ndarray:
        a = self.state.alphas[self.idx]
        return self.idx[(a > 0) & (a < self.problem.C)]

    def _take(self, i: int, j: int) -> bool:
        if i < 0 or not solve_two_multipliers(self.state, self.problem, i, j):
            return False
        self._refresh(np.union1d(self._non_bound(), [i, j]))
        return True

    def examine(self, j: int) -> int:
        tol2 = 2.0 * self.problem.tol
        Fj = self._F(j)
        up, low = self._in_up(j), self._in_low(j)
        free = up and low
        if not free:
            if up and Fj < self.b_up:
                self.b_up, self.i_up = Fj, j
            elif low and Fj > self.b_low:
                self.b_low, self.i_low = Fj, j
        partner = -1
        if up and self.b_low - Fj > tol2:
            partner = self.i_low
        if low and Fj - self.b_up > tol2:
            if partner < 0 or Fj - self.b_up > self.b_low - Fj:
                partner = self.i_up
        if partner < 0:
            return 0
        if self._take(partner, j):
            return 1
        non_bound = self._non_bound()
        if len(non_bound):
            for i in np.roll(non_bound, -int(self.rng.integers(len(non_bound)))):
                if self._take(int(i), j):
                    return 1
        for i in np.roll(self.idx, -int(self.rng.integers(len(self.idx)))):
            if self._take(int(i), j):
                return 1
        return 0

    def _optimal(self) -> bool:
        return self.b_low <= self.b_up + 2.0 * self.problem.tol

    def run(self, budget: int | None = None) -> bool:
        """Iterate until a full pass finds no KKT violator.

        Returns True on convergence, False when the step budget ran out.
        """
        p, st = self.problem, self.state
        limit = st.iterations + (p.max_iter if budget is None else budget)
        changed, examine_all = 0, True
        while changed > 0 or examine_all:
            changed = 0
            if examine_all:
                for j in self.idx:
                    changed += self.examine(int(j))
                    if st.iterations >= limit:
                        return self._finish(False)
            else:
                # non-bound phase: step on the extreme pair until it is optimal
                while not self._optimal() and self._take(self.i_up, self.i_low):
                    if st.iterations >= limit:
                        return self._finish(False)
                changed = 0
            if examine_all:
                examine_all = False
            elif changed == 0:
                examine_all = True
        return self._finish(True)

    def _finish(self, converged: bool) -> bool:
        self.truncated = not converged
        self._refresh(self.idx)
        if np.isfinite(self.b_up) and np.isfinite(self.b_low):
            shift = -0.5 * (self.b_up + self.b_low) - self.state.bias
            self.state.bias += shift
            if self.state.active is None:
                self.state.error_cache += shift
            else:
                self.state.error_cache[self.state.active] += shift
        return converged


def smo_train(problem: TrainingProblem, strict: bool = False) -> SvmModel:
    """Train a binary SVM with SMO.

    A run that exhausts ``problem.max_iter`` steps returns a model flagged
    ``truncated``; with ``strict=True`` it raises IterationLimitExceeded
    carrying that model instead.
    """
    state = SolverState.initial(problem)
    loop = PlattLoop(problem, state, np.random.default_rng(problem.seed))
    t0 = time.perf_counter()
    loop.run()
    polished = False
    if not loop.truncated:
        res = polish(problem, state.alphas, state.error_cache + problem.labels - state.bias)
        if res is not None:
            state.alphas, state.bias, g = res
            state.error_cache = g + state.bias - problem.labels
            polished = True
    wall = time.perf_counter() - t0
    meta = {
        "solver": "smo",
        "iterations": state.iterations,
        "wall_seconds": wall,
        "truncated": loop.truncated,
        "polished": polished,
        "C": problem.C,
        "objective": state.objective(problem),
    }
    model = SvmModel.from_state(problem, state, meta)
    if loop.truncated:
        msg = f"SMO stopped after {state.iterations} steps without converging"
        if strict:
            raise IterationLimitExceeded(msg, model=model)
        log.warning(msg)
    return model
