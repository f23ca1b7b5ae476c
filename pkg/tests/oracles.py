"""Independent reference computations used by the tests.

Nothing here calls into voxid's numerical code paths; each oracle is the
slow, obviously-correct version of something the package does fast.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def direct_dft(x) -> np.ndarray:
    """O(N^2) DFT by explicit summation."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        acc = 0j
        for t in range(n):
            acc += x[t] * complex(math.cos(-2 * math.pi * k * t / n), math.sin(-2 * math.pi * k * t / n))
        out[k] = acc
    return out


def direct_dft_matrix(x) -> np.ndarray:
    """Same sum as direct_dft, vectorized over an explicit N x N matrix."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


def dct_double_loop(log_energies, num_coeffs: int) -> list[float]:
    K = len(log_energies)
    out = []
    for n in range(1, num_coeffs + 1):
        acc = 0.0
        for k in range(1, K + 1):
            acc += log_energies[k - 1] * math.cos(n * (k - 0.5) * math.pi / K)
        out.append(acc)
    return out


def gram(X, kind: str, gamma: float = 1.0, degree: int = 3, coef0: float = 0.0) -> np.ndarray:
    """Kernel matrix by double loop over pairs."""
    n = len(X)
    K = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if kind == "linear":
                K[i, j] = float(np.dot(X[i], X[j]))
            elif kind == "rbf":
                K[i, j] = math.exp(-gamma * float(np.sum((X[i] - X[j]) ** 2)))
            else:
                K[i, j] = (float(np.dot(X[i], X[j])) + coef0) ** degree
    return K


def dual_value(alpha, y, K) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def brute_force_dual(K, y, C, feas_tol: float = 1e-9):
    """Exact maximizer of the SVM dual by enumerating active sets.

    Every multiplier is tagged 0, C or free (3^n patterns).  For each
    pattern the free multipliers solve the stationarity system

        Q_FF a_F + y_F b = 1 - Q_FB a_B,   y_F . a_F = -y_B . a_B

    and the candidate is kept when it is feasible.  A concave quadratic
    attains its maximum at such a point for some pattern, so the best
    feasible candidate is the global optimum.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    Q = K * np.outer(y, y)
    patterns = np.array(list(itertools.product((0, 1, 2), repeat=n)))
    n_free = np.count_nonzero(patterns == 2, axis=1)
    best, best_alpha = -np.inf, None
    # patterns with the same number of free multipliers share one batched solve
    for m in range(n + 1):
        P = patterns[n_free == m]
        alpha = np.where(P == 1, C, 0.0)
        ok = np.ones(len(P), dtype=bool)
        if m:
            rows = np.arange(len(P))[:, None]
            F = np.nonzero(P == 2)[1].reshape(len(P), m)
            A = np.zeros((len(P), m + 1, m + 1))
            A[:, :m, :m] = Q[F[:, :, None], F[:, None, :]]
            A[:, :m, m] = y[F]
            A[:, m, :m] = y[F]
            rhs = np.zeros((len(P), m + 1))
            rhs[:, :m] = 1.0 - (alpha @ Q)[rows, F]  # alpha is zero on F here
            rhs[:, m] = -(alpha @ y)
            # minimum-norm least squares, as lstsq with its default cutoff
            sol = np.einsum("pij,pj->pi", np.linalg.pinv(A, rcond=np.finfo(float).eps * (m + 1)), rhs)
            resid = np.max(np.abs(np.einsum("pij,pj->pi", A, sol) - rhs), axis=1)
            ok &= resid <= 1e-8 * (1 + np.max(np.abs(rhs), axis=1))
            alpha[rows, F] = sol[:, :m]
        ok &= np.abs(alpha @ y) <= feas_tol * max(1.0, C)
        ok &= np.all((alpha >= -feas_tol) & (alpha <= C + feas_tol), axis=1)
        if not ok.any():
            continue
        cand = np.clip(alpha[ok], 0.0, C)
        ay = cand * y
        vals = cand.sum(axis=1) - 0.5 * np.einsum("pi,ij,pj->p", ay, K, ay)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_alpha = float(vals[k]), cand[k]
    return best, best_alpha


def xor_grid_optimum(C: float, gamma: float = 1.0, steps: int = 200001):
    """Grid search for the XOR problem on the symmetric slice a_i = a.

    With points (+-1, +-1) labelled by the product of signs, symmetry
    puts the optimum at equal multipliers, and the dual reduces to
    4a - 2 a^2 (1 - 2e^{-4 gamma} + e^{-8 gamma}).
    """
    a = np.linspace(0.0, C, steps)
    k_adj = math.exp(-4 * gamma)  # squared distance 4 between neighbours
    k_opp = math.exp(-8 * gamma)  # squared distance 8 across the diagonal
    vals = 4 * a - 2 * a**2 * (1 - 2 * k_adj + k_opp)
    i = int(np.argmax(vals))
    return float(vals[i]), float(a[i])
