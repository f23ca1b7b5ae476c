"""One-vs-rest speaker models on top of the binary solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from voxid.errors import DimensionMismatch, SvmError, TooFewSpeakers
from voxid.features import LabeledDataset, Standardizer, fit_standardizer
from voxid.svm.decompose import Chunking, FixedSize, decompose_train
from voxid.svm.kernels import KernelSpec
from voxid.svm.model import SvmModel, decision_value
from voxid.svm.problem import TrainingProblem
from voxid.svm.smo import smo_train

SOLVERS = ("smo", "chunking", "fixed_size")


@dataclass(frozen=True)
class SolverSpec:
    name: str = "smo"
    chunk_M: int = 50
    q: int = 50
    swap: int = 10

    def __post_init__(self):
        name = self.name.replace("-", "_")
        if name not in SOLVERS:
            raise SvmError(f"unknown solver {self.name!r}; choose from {', '.join(SOLVERS)}")
        object.__setattr__(self, "name", name)

    def train(self, problem: TrainingProblem) -> SvmModel:
        if self.name == "smo":
            return smo_train(problem)
        if self.name == "chunking":
            return decompose_train(problem, Chunking(self.chunk_M))
        return decompose_train(problem, FixedSize(self.q, self.swap))


@dataclass
class MulticlassModel:
    speakers: list[int]
    models: dict[int, SvmModel]
    scaler: Standardizer | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.speakers) < 2:
            raise TooFewSpeakers("a multiclass model needs at least two speakers")
        if set(self.speakers) != set(self.models):
            raise SvmError("speaker list and binary models disagree")
        dims = {m.dim for m in self.models.values()}
        kernels = {m.kernel for m in self.models.values()}
        if len(dims) > 1 or len(kernels) > 1:
            raise SvmError("binary models must share feature dimension and kernel")
        if self.scaler is not None and self.scaler.dim not in dims:
            raise DimensionMismatch("scaler dimension differs from the models'")

    @property
    def dim(self) -> int:
        return self.models[self.speakers[0]].dim

    @property
    def kernel(self) -> KernelSpec:
        return self.models[self.speakers[0]].kernel

    def scores(self, features) -> np.ndarray:
        """Decision values, one column per speaker in ``speakers`` order."""
        x = np.asarray(getattr(features, "values", features), dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} features, got {x.shape[-1]}")
        if self.scaler is not None:
            x = self.scaler.transform(x)
        cols = [decision_value(self.models[s], np.atleast_2d(x)) for s in self.speakers]
        out = np.column_stack(cols)
        return out[0] if x.ndim == 1 else out

    def predict(self, features) -> np.ndarray:
        """Argmax speaker per row; np.argmax keeps the first (lowest-id) tie."""
        s = np.atleast_2d(self.scores(features))
        order = np.argsort(self.speakers, kind="stable")
        ids = np.asarray(self.speakers)[order]
        return ids[np.argmax(s[:, order], axis=1)]


def train_one_vs_rest(dataset: LabeledDataset, C: float = 10.0, kernel: KernelSpec | None = None,
                      solver: SolverSpec | str = "smo", standardize: bool = True,
                      tol: float = 1e-3, seed: int = 0) -> MulticlassModel:
    """One binary SVM per speaker (that speaker +1, everyone else -1)."""
    if isinstance(solver, str):
        solver = SolverSpec(solver)
    speakers = dataset.speakers
    if len(speakers) < 2:
        raise TooFewSpeakers(f"need at least two speakers, dataset has {len(speakers)}")
    scaler = fit_standardizer(dataset) if standardize else None
    X = scaler.transform(dataset.features) if scaler is not None else dataset.features
    if kernel is None:
        kernel = KernelSpec.rbf(1.0 / X.shape[1])
    models = {}
    for spk in speakers:
        y = np.where(dataset.labels == spk, 1.0, -1.0)
        try:
            problem = TrainingProblem(X, y, C=C, kernel=kernel, tol=tol, seed=seed)
            models[spk] = solver.train(problem)
        except SvmError as exc:
            raise type(exc)(f"speaker {spk}: {exc}") from exc
    meta = {"solver": solver.name, "C": C, "tol": tol}
    return MulticlassModel(list(speakers), models, scaler, meta)


def identify(mc_model: MulticlassModel, features) -> tuple[int, dict[int, float]]:
    """Best-scoring speaker and every speaker's decision value.

    Ties go to the lowest speaker id.
    """
    x = np.asarray(getattr(features, "values", features), dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("identify takes a single feature vector")
    s = mc_model.scores(x)
    scores = {spk: float(v) for spk, v in zip(mc_model.speakers, s)}
    best = max(scores.values())
    return min(spk for spk, v in scores.items() if v == best), scores
