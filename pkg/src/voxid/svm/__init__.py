"""Soft-margin SVMs trained by SMO or working-set decomposition."""

from voxid.svm.decompose import Chunking, FixedSize, decompose_train
from voxid.svm.kernels import KernelSpec, kernel_eval
from voxid.svm.multiclass import MulticlassModel, SolverSpec, identify, train_one_vs_rest
from voxid.svm.model import SvmModel, classify, decision_value
from voxid.svm.problem import SolverState, TrainingProblem, dual_objective, kkt_violation, kkt_violations, polish
from voxid.svm.smo import solve_two_multipliers, smo_train

__all__ = [
    "Chunking",
    "FixedSize",
    "KernelSpec",
    "MulticlassModel",
    "SolverSpec",
    "SolverState",
    "SvmModel",
    "TrainingProblem",
    "classify",
    "decision_value",
    "decompose_train",
    "dual_objective",
    "identify",
    "kernel_eval",
    "kkt_violation",
    "kkt_violations",
    "polish",
    "smo_train",
    "solve_two_multipliers",
    "train_one_vs_rest",
]
