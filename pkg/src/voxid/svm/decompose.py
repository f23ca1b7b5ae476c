"""Working-set decomposition trainers: chunking and fixed-size (Osuna).

Each sub-problem is solved by the SMO loop restricted to the working set,
warm-started from the multipliers of the previous step.  Contributions of
examples outside the working set enter through the error cache.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from voxid.errors import IterationLimitExceeded, SvmError
from voxid.svm.model import SvmModel
from voxid.svm.problem import SolverState, TrainingProblem, dual_objective, kkt_violations, polish
from voxid.svm.smo import PlattLoop

log = logging.getLogger(__name__)

_BLOCK = 512


@dataclass(frozen=True)
class Chunking:
    """Keep every nonzero multiplier and add the M worst KKT violators."""

    M: int = 50

    def __post_init__(self):
        if self.M < 2:
            raise SvmError("chunking needs M >= 2")


@dataclass(frozen=True)
class FixedSize:
    """Constant working set of q examples; swap ``swap`` in and out per step."""

    q: int = 50
    swap: int = 10

    def __post_init__(self):
        if self.q < 2:
            raise SvmError("fixed-size working set needs q >= 2")
        if not 1 <= self.swap <= self.q:
            raise SvmError("swap count must lie in 1..q")


def _update_g(problem: TrainingProblem, g: np.ndarray, idx: np.ndarray, weights: np.ndarray) -> None:
    """g += K(X, X[idx]) @ weights, one column block at a time."""
    X, kern = problem.points, problem.kernel
    for start in range(0, len(idx), _BLOCK):
        cols = idx[start : start + _BLOCK]
        g += kern.matrix(X, X[cols]) @ weights[start : start + _BLOCK]


def _worst(candidates: np.ndarray, gap: np.ndarray, k: int) -> np.ndarray:
    # largest gap first, ties to the lower index
    order = np.lexsort((candidates, -gap[candidates]))
    return candidates[order[:k]]


def _worst_balanced(candidates: np.ndarray, gap: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Up to k worst violators split evenly between the classes.

    A working set drawn from one class alone cannot move under the
    equality constraint, which happens at the start when all gaps tie.
    """
    pos = candidates[labels[candidates] > 0]
    neg = candidates[labels[candidates] < 0]
    take_pos = min(len(pos), max(k - len(neg), k // 2))
    take_neg = min(len(neg), k - take_pos)
    return np.sort(np.concatenate([_worst(pos, gap, take_pos), _worst(neg, gap, take_neg)]))


def _initial_working_set(labels: np.ndarray, q: int) -> np.ndarray:
    pos = np.flatnonzero(labels > 0)
    neg = np.flatnonzero(labels < 0)
    take_pos = min(len(pos), max(q - len(neg), q // 2))
    take_neg = min(len(neg), q - take_pos)
    return np.sort(np.concatenate([pos[:take_pos], neg[:take_neg]]))


def _thresholds(F: np.ndarray, alphas: np.ndarray, y: np.ndarray, C: float):
    """(b_up, i_up, b_low, i_low) over all examples, with F = f - b - y."""
    up = ((y > 0) & (alphas < C)) | ((y < 0) & (alphas > 0))
    low = ((y > 0) & (alphas > 0)) | ((y < 0) & (alphas < C))
    i_up = int(np.argmin(np.where(up, F, np.inf)))
    i_low = int(np.argmax(np.where(low, F, -np.inf)))
    return F[i_up], i_up, F[i_low], i_low


def _fixed_size_update(ws, gap, pair, labels, C, alphas, strategy: FixedSize, n):
    in_ws = np.zeros(n, dtype=bool)
    in_ws[ws] = True
    required = np.array([i for i in dict.fromkeys(pair) if not in_ws[i]], dtype=np.intp)
    in_ws[required] = True
    outside = np.flatnonzero(~in_ws & (gap > 0))
    extra = _worst_balanced(outside, gap, labels, max(strategy.swap - len(required), 0))
    incoming = np.concatenate([required, extra[np.lexsort((extra, -gap[extra]))]])

    a = alphas[ws]
    calm = gap[ws] == 0
    # drop non-violating bound examples first (zeros before those at C)
    rank = np.where(a <= 0, 0, np.where(a >= C, 1, 2))
    rank = np.where(calm, rank, 3)
    order = np.lexsort((ws, rank))
    k = len(incoming)
    if int(np.count_nonzero(calm)) < k:
        k = max(int(np.count_nonzero(calm)), len(required))
        incoming = incoming[:k]
    outgoing = ws[order[:k]]
    keep = np.setdiff1d(ws, outgoing, assume_unique=True)
    return np.sort(np.concatenate([keep, incoming]))


def decompose_train(problem: TrainingProblem, strategy=None, strict: bool = False) -> SvmModel:
    """Train a binary SVM by repeated working-set sub-problems.

    ``strategy`` is a :class:`Chunking` or :class:`FixedSize` instance
    (default ``Chunking()``).  Besides the strategy's own choice, every
    working set contains the most violating pair (the examples attaining
    b_up and b_low), so each sub-problem is guaranteed to make progress.
    """
    strategy = Chunking() if strategy is None else strategy
    if not isinstance(strategy, (Chunking, FixedSize)):
        raise SvmError(f"unknown decomposition strategy {strategy!r}")
    n, y, C, tol = problem.n, problem.labels, problem.C, problem.tol
    state = SolverState.initial(problem)
    rng = np.random.default_rng(problem.seed)
    g = np.zeros(n)  # sum_j a_j y_j K(x_i, x_j)
    ws = None if isinstance(strategy, Chunking) else _initial_working_set(y, min(strategy.q, n))
    outer = 0
    truncated = False
    t0 = time.perf_counter()

    while True:
        b_up, i_up, b_low, i_low = _thresholds(g - y, state.alphas, y, C)
        state.bias = -0.5 * (b_up + b_low)
        if b_low <= b_up + 2.0 * tol:
            break
        if state.iterations >= problem.max_iter:
            truncated = True
            break
        gap = kkt_violations(state.alphas, y * (g + state.bias), C, tol)
        if isinstance(strategy, Chunking):
            nonzero = np.flatnonzero(state.alphas > 0)
            mask = np.ones(n, dtype=bool)
            mask[nonzero] = False
            fresh = np.flatnonzero(mask & (gap > 0))
            ws = np.union1d(nonzero, _worst_balanced(fresh, gap, y, strategy.M))
            ws = np.union1d(ws, [i_up, i_low])
        elif outer > 0:
            ws = _fixed_size_update(ws, gap, (i_up, i_low), y, C, state.alphas, strategy, n)
        outer += 1

        before = state.alphas[ws].copy()
        state.restrict(problem, ws)
        state.error_cache[ws] = g[ws] + state.bias - y[ws]
        loop = PlattLoop(problem, state, rng)
        converged = loop.run(budget=problem.max_iter - state.iterations)
        delta = state.alphas[ws] - before
        moved = np.flatnonzero(delta)
        if len(moved):
            _update_g(problem, g, ws[moved], (delta * y[ws])[moved])
        if not converged or len(moved) == 0:
            # out of budget, or (numerically) no progress on a violating pair
            truncated = True
            b_up, _, b_low, _ = _thresholds(g - y, state.alphas, y, C)
            state.bias = -0.5 * (b_up + b_low)
            break

    polished = False
    if not truncated:
        res = polish(problem, state.alphas, g)
        if res is not None:
            state.alphas, state.bias, g = res
            polished = True
    wall = time.perf_counter() - t0
    state.restrict(problem, None)
    state.error_cache = g + state.bias - y
    name = "chunking" if isinstance(strategy, Chunking) else "fixed_size"
    meta = {
        "solver": name,
        "iterations": state.iterations,
        "outer_iterations": outer,
        "wall_seconds": wall,
        "truncated": truncated,
        "polished": polished,
        "C": C,
        "objective": dual_objective(state.alphas, y, g),
    }
    if isinstance(strategy, Chunking):
        meta["M"] = strategy.M
    else:
        meta["q"], meta["swap"] = strategy.q, strategy.swap
    model = SvmModel.from_state(problem, state, meta)
    if truncated:
        msg = f"{name} stopped after {state.iterations} steps without converging"
        if strict:
            raise IterationLimitExceeded(msg, model=model)
        log.warning(msg)
    return model
