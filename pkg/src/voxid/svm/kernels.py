"""Kernel functions for the SVM dual."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from voxid.errors import DimensionMismatch, SvmError

KERNEL_KINDS = ("linear", "rbf", "polynomial")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float = 1.0
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise SvmError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise SvmError("rbf kernel needs gamma > 0")
        if self.kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1):
            raise SvmError("polynomial kernel needs an integer degree >= 1")

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(kind="linear")

    @classmethod
    def rbf(cls, gamma: float) -> "KernelSpec":
        return cls(kind="rbf", gamma=float(gamma))

    @classmethod
    def polynomial(cls, degree: int = 3, coef0: float = 1.0) -> "KernelSpec":
        return cls(kind="polynomial", degree=int(degree), coef0=float(coef0))

    def row(self, points: np.ndarray, x: np.ndarray, sq_norms: np.ndarray | None = None) -> np.ndarray:
        """K(points[i], x) for every row of ``points``.

        ``sq_norms`` (row-wise squared norms of ``points``) speeds up the rbf
        case; without it the squared distance is formed directly.
        """
        if self.kind == "linear":
            return points @ x
        if self.kind == "polynomial":
            return (points @ x + self.coef0) ** self.degree
        if sq_norms is None:
            d2 = np.einsum("ij,ij->i", points - x, points - x)
        else:
            d2 = np.maximum(sq_norms + x @ x - 2.0 * (points @ x), 0.0)
        return np.exp(-self.gamma * d2)

    def matrix(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Gram block K(a[i], b[j])."""
        a = np.atleast_2d(a)
        b = np.atleast_2d(b)
        if a.shape[1] != b.shape[1]:
            raise DimensionMismatch(f"kernel inputs have dimensions {a.shape[1]} and {b.shape[1]}")
        dot = a @ b.T
        if self.kind == "linear":
            return dot
        if self.kind == "polynomial":
            return (dot + self.coef0) ** self.degree
        d2 = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * dot
        return np.exp(-self.gamma * np.maximum(d2, 0.0))

    def diagonal(self, points: np.ndarray) -> np.ndarray:
        if self.kind == "rbf":
            return np.ones(len(points))
        sq = np.einsum("ij,ij->i", points, points)
        if self.kind == "linear":
            return sq
        return (sq + self.coef0) ** self.degree


def kernel_eval(spec: KernelSpec, x, z) -> float:
    """Evaluate the kernel on a single pair of vectors."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise DimensionMismatch(f"kernel inputs have shapes {x.shape} and {z.shape}")
    if spec.kind == "linear":
        return float(x @ z)
    if spec.kind == "polynomial":
        return float((x @ z + spec.coef0) ** spec.degree)
    diff = x - z
    return float(np.exp(-spec.gamma * (diff @ diff)))
