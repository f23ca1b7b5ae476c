"""Per-speaker success-rate reports.

Percentages are always recomputed from counts (100 * correct / total,
rounded half-up to two decimals); externally supplied percentages are
never trusted.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from voxid.errors import UnknownLabel, VoxidError

_CENT = Decimal("0.01")


def success_pct(correct: int, total: int) -> Decimal:
    if total <= 0:
        raise VoxidError("success rate needs a positive total")
    if not 0 <= correct <= total:
        raise VoxidError(f"correct count {correct} outside 0..{total}")
    return (Decimal(100 * correct) / Decimal(total)).quantize(_CENT, rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class SpeakerRow:
    speaker_id: int
    total: int
    correct: int
    false_count: int
    success_pct: Decimal
    name: str = ""


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[SpeakerRow, ...]
    solver: str = ""

    @classmethod
    def from_counts(cls, counts, solver: str = "", names: dict[int, str] | None = None) -> "EvaluationReport":
        """``counts`` maps speaker id -> (correct, total)."""
        names = names or {}
        rows = []
        for sid in sorted(counts):
            correct, total = (int(v) for v in counts[sid])
            rows.append(SpeakerRow(sid, total, correct, total - correct, success_pct(correct, total), names.get(sid, "")))
        return cls(tuple(rows), solver)

    @classmethod
    def from_predictions(cls, truth, predicted, enrolled, solver: str = "",
                         names: dict[int, str] | None = None) -> "EvaluationReport":
        truth = np.asarray(truth, dtype=int)
        predicted = np.asarray(predicted, dtype=int)
        enrolled = set(int(s) for s in enrolled)
        bad = [i for i, t in enumerate(truth.tolist()) if t not in enrolled]
        if bad:
            labels = sorted({int(truth[i]) for i in bad})
            raise UnknownLabel(f"test rows {bad} carry labels {labels} that are not enrolled speakers")
        counts = {}
        for sid in sorted(set(truth.tolist())):
            mask = truth == sid
            counts[sid] = (int(np.sum(predicted[mask] == sid)), int(mask.sum()))
        return cls.from_counts(counts, solver, names)

    @property
    def correct(self) -> int:
        return sum(r.correct for r in self.rows)

    @property
    def total(self) -> int:
        return sum(r.total for r in self.rows)

    @property
    def false_count(self) -> int:
        return self.total - self.correct

    @property
    def aggregate_pct(self) -> Decimal:
        return success_pct(self.correct, self.total)

    def as_dict(self) -> dict:
        return {
            "solver": self.solver,
            "rows": [
                {
                    "speaker_id": r.speaker_id,
                    "total": r.total,
                    "correct": r.correct,
                    "false_count": r.false_count,
                    "success_pct": float(r.success_pct),
                }
                for r in self.rows
            ],
            "aggregate": {
                "correct": self.correct,
                "false_count": self.false_count,
                "success_pct": float(self.aggregate_pct),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["speaker_id", "total", "correct", "false_count", "success_pct"])
        for r in self.rows:
            w.writerow([r.speaker_id, r.total, r.correct, r.false_count, f"{r.success_pct:.2f}"])
        w.writerow(["all", self.total, self.correct, self.false_count, f"{self.aggregate_pct:.2f}"])
        return buf.getvalue()

    def to_table(self) -> str:
        head = ["Speaker", "Total", "Correct", "False", "Success %"]
        body = [[str(r.speaker_id) + (f" ({r.name})" if r.name else ""), str(r.total), str(r.correct),
                 str(r.false_count), f"{r.success_pct:.2f}"] for r in self.rows]
        body.append(["All", str(self.total), str(self.correct), str(self.false_count), f"{self.aggregate_pct:.2f}"])
        widths = [max(len(row[c]) for row in [head] + body) for c in range(len(head))]

        def line(cells):
            return "  ".join(cells[0].ljust(widths[0]) if c == 0 else cells[c].rjust(widths[c])
                             for c in range(len(cells)))

        out = []
        if self.solver:
            out.append(f"solver: {self.solver}")
        out += [line(head), "  ".join("-" * w for w in widths)]
        out += [line(r) for r in body]
        return "\n".join(out)
