"""Trained binary SVM and prediction."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from voxid.errors import DimensionMismatch, SvmError
from voxid.svm.kernels import KernelSpec
from voxid.svm.problem import SolverState, TrainingProblem

_BLOCK = 2048


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    coeffs: np.ndarray  # alpha_i * y_i
    bias: float
    kernel: KernelSpec
    meta: dict = field(default_factory=dict)
    support_index: np.ndarray | None = None  # training-row positions, when known

    def __post_init__(self):
        self.support_vectors = np.atleast_2d(np.asarray(self.support_vectors, dtype=float))
        self.coeffs = np.asarray(self.coeffs, dtype=float).ravel()
        self.bias = float(self.bias)
        if len(self.coeffs) != len(self.support_vectors):
            raise SvmError("coeffs and support vectors differ in length")

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]

    @property
    def n_support(self) -> int:
        return len(self.coeffs)

    @property
    def truncated(self) -> bool:
        return bool(self.meta.get("truncated", False))

    @cached_property
    def weights(self) -> np.ndarray:
        """Explicit primal weight vector (linear kernel only)."""
        if self.kernel.kind != "linear":
            raise SvmError("explicit weights exist only for the linear kernel")
        return self.coeffs @ self.support_vectors

    @classmethod
    def from_state(cls, problem: TrainingProblem, state: SolverState, meta: dict) -> "SvmModel":
        keep = state.alphas > 0
        return cls(
            support_vectors=problem.points[keep].copy(),
            coeffs=(state.alphas * problem.labels)[keep],
            bias=state.bias,
            kernel=problem.kernel,
            meta=dict(meta),
            support_index=np.flatnonzero(keep),
        )

    def alphas(self, n: int) -> np.ndarray:
        """Full multiplier vector over the n training rows (needs support_index)."""
        if self.support_index is None:
            raise SvmError("model does not record its training positions")
        out = np.zeros(n)
        out[self.support_index] = np.abs(self.coeffs)
        return out


def decision_value(model: SvmModel, x):
    """f(x) = sum coeffs * K(sv, x) + b for one vector or a batch of rows."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    if xs.shape[1] != model.dim:
        raise DimensionMismatch(f"model expects {model.dim} features, got {xs.shape[1]}")
    out = np.empty(len(xs))
    for start in range(0, len(xs), _BLOCK):
        block = xs[start : start + _BLOCK]
        out[start : start + _BLOCK] = model.kernel.matrix(block, model.support_vectors) @ model.coeffs
    out += model.bias
    return float(out[0]) if single else out


def classify(model: SvmModel, x):
    """sign(f(x)); ties (f == 0) go to +1."""
    f = decision_value(model, x)
    if np.ndim(f) == 0:
        return 1 if f >= 0 else -1
    return np.where(f >= 0, 1, -1)
