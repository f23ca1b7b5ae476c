"""Model files, the speaker registry and dataset CSVs.

Model file grammar (UTF-8, one record per line, fields separated by single
spaces, reals written with ``repr`` so they reparse bit-exactly)::

    VOXID-MODEL v1
    mfcc <key>=<value> ...
    kernel kind=<kind> gamma=<g> degree=<d> coef0=<c>
    training <key>=<value> ...
    scaler none | scaler <dim>
    mean <v_1> ... <v_dim>          (only when a scaler is present)
    std <v_1> ... <v_dim>
    speakers <count>
    speaker <id> <name> <utterance_count> <enrolled_at>     (count lines)
    model <id> <bias> <n_sv> [<key>=<value> ...]
    sv <coeff> <x_1> ... <x_dim>    (n_sv lines)
    ...                              (one model block per modeled speaker)
    end

Names and timestamps are percent-encoded so they never contain spaces.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import quote, unquote

import numpy as np

from voxid.errors import (
    ConsistencyError,
    IoFailure,
    MissingStoreFile,
    MalformedCsv,
    MalformedModel,
    RaggedRows,
    UnknownVersion,
    VoxidError,
)
from voxid.features import LabeledDataset, Standardizer
from voxid.mfcc import MfccConfig
from voxid.svm.kernels import KernelSpec
from voxid.svm.model import SvmModel
from voxid.svm.multiclass import MulticlassModel

MAGIC = "VOXID-MODEL"
VERSION = 1
HEADER = f"{MAGIC} v{VERSION}"


@dataclass(frozen=True)
class SpeakerEntry:
    name: str
    utterance_count: int = 0
    enrolled_at: str = ""


@dataclass
class SpeakerRegistry:
    entries: dict[int, SpeakerEntry] = field(default_factory=dict)

    def __post_init__(self):
        for sid, entry in self.entries.items():
            self._check(sid, entry)

    @staticmethod
    def _check(sid: int, entry: SpeakerEntry) -> None:
        if int(sid) != sid or sid < 1:
            raise ConsistencyError(f"speaker id must be an integer >= 1, got {sid!r}")
        if not entry.name:
            raise ConsistencyError(f"speaker {sid} has an empty name")

    def enroll(self, speaker_id: int, name: str, utterance_count: int = 0, enrolled_at: str | None = None) -> None:
        if enrolled_at is None:
            enrolled_at = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
        entry = SpeakerEntry(name, int(utterance_count), enrolled_at)
        self._check(speaker_id, entry)
        self.entries[int(speaker_id)] = entry

    def name(self, speaker_id: int) -> str:
        entry = self.entries.get(speaker_id)
        return entry.name if entry else f"speaker-{speaker_id}"

    def __contains__(self, speaker_id) -> bool:
        return speaker_id in self.entries

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_dataset(cls, dataset: LabeledDataset, names: dict[int, str] | None = None,
                     enrolled_at: str | None = None) -> "SpeakerRegistry":
        reg = cls()
        ids, counts = np.unique(dataset.labels, return_counts=True)
        for sid, cnt in zip(ids.tolist(), counts.tolist()):
            reg.enroll(sid, (names or {}).get(sid) or f"speaker-{sid}", cnt, enrolled_at)
        return reg


# ---- model files ---------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return quote(str(x), safe="")


def _parse_scalar(text: str):
    if text in ("true", "false"):
        return text == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return unquote(text)


def _pairs(d: dict) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in d.items() if v is not None)


def _row(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _model_lines(mc: MulticlassModel, registry: SpeakerRegistry, config: MfccConfig) -> list[str]:
    k = mc.kernel
    lines = [
        HEADER,
        "mfcc " + _pairs(config.as_dict()),
        f"kernel kind={k.kind} gamma={k.gamma!r} degree={k.degree} coef0={k.coef0!r}",
        "training " + _pairs({key: v for key, v in mc.meta.items() if key != "mfcc"}),
    ]
    if mc.scaler is None:
        lines.append("scaler none")
    else:
        lines += [f"scaler {mc.scaler.dim}", "mean " + _row(mc.scaler.mean), "std " + _row(mc.scaler.std)]
    lines.append(f"speakers {len(registry)}")
    for sid in sorted(registry.entries):
        e = registry.entries[sid]
        lines.append(f"speaker {sid} {_fmt(e.name)} {e.utterance_count} {_fmt(e.enrolled_at or '-')}")
    for sid in mc.speakers:
        m = mc.models[sid]
        meta = {key: v for key, v in m.meta.items() if isinstance(v, (int, float, str, bool))}
        lines.append(f"model {sid} {float(m.bias)!r} {m.n_support} {_pairs(meta)}".rstrip())
        for c, sv in zip(m.coeffs, m.support_vectors):
            lines.append(f"sv {float(c)!r} {_row(sv)}")
    lines.append("end")
    return lines


def save_model(mc_model: MulticlassModel, registry: SpeakerRegistry, path, config: MfccConfig | None = None) -> None:
    """Write ``mc_model`` (plus registry and MFCC config) to ``path``.

    ``config`` defaults to the one stored in ``mc_model.meta['mfcc']``, or
    the default MfccConfig.
    """
    config = config or mc_model.meta.get("mfcc") or MfccConfig()
    missing = [sid for sid in mc_model.speakers if sid not in registry]
    if missing:
        raise ConsistencyError(f"modeled speakers missing from the registry: {missing}")
    text = "\n".join(_model_lines(mc_model, registry, config)) + "\n"
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoFailure(f"cannot write model {path}: {exc}") from exc


class _Lines:
    """Cursor over model-file lines that reports 1-based line numbers."""

    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0

    @property
    def lineno(self) -> int:
        return self.pos

    def next(self, keyword: str) -> list[str]:
        if self.pos >= len(self.lines):
            raise MalformedModel(f"unexpected end of file, expected {keyword!r}", line=self.pos + 1)
        fields = self.lines[self.pos].split(" ")
        self.pos += 1
        if fields[0] != keyword:
            raise MalformedModel(f"expected {keyword!r}, found {fields[0]!r}", line=self.pos)
        return fields[1:]

    def fail(self, message: str):
        raise MalformedModel(message, line=self.pos)


def _floats(cur: _Lines, fields: list[str], count: int | None = None) -> np.ndarray:
    try:
        vals = np.array([float(f) for f in fields])
    except ValueError:
        cur.fail("non-numeric value")
    if count is not None and len(vals) != count:
        cur.fail(f"expected {count} values, found {len(vals)}")
    if not np.all(np.isfinite(vals)):
        cur.fail("non-finite value")
    return vals


def _int(cur: _Lines, text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        cur.fail(f"{what} must be an integer, found {text!r}")


def _kv(cur: _Lines, fields: list[str]) -> dict:
    out = {}
    for f in fields:
        key, sep, value = f.partition("=")
        if not sep or not key:
            cur.fail(f"expected key=value, found {f!r}")
        out[key] = _parse_scalar(value)
    return out


def _parse(lines: list[str]):
    cur = _Lines(lines)
    if not lines:
        raise MalformedModel("empty model file", line=1)
    head = lines[0].split(" ")
    if head[0] != MAGIC or len(head) != 2:
        raise MalformedModel(f"not a voxid model file (header {lines[0]!r})", line=1)
    if head[1] != f"v{VERSION}":
        raise UnknownVersion(f"unsupported model format version {head[1]!r}")
    cur.pos = 1

    try:
        config = MfccConfig.from_dict(_kv(cur, cur.next("mfcc")))
    except VoxidError as exc:
        if isinstance(exc, MalformedModel):
            raise
        cur.fail(f"bad MFCC config: {exc}")

    kfields = _kv(cur, cur.next("kernel"))
    try:
        kernel = KernelSpec(str(kfields["kind"]), float(kfields["gamma"]), int(kfields["degree"]), float(kfields["coef0"]))
    except (KeyError, VoxidError, TypeError, ValueError) as exc:
        cur.fail(f"bad kernel spec: {exc}")

    training = _kv(cur, cur.next("training"))

    sfields = cur.next("scaler")
    if sfields == ["none"]:
        scaler = None
    else:
        if len(sfields) != 1:
            cur.fail("scaler line takes one field")
        dim = _int(cur, sfields[0], "scaler dimension")
        mean = _floats(cur, cur.next("mean"), dim)
        std = _floats(cur, cur.next("std"), dim)
        try:
            scaler = Standardizer(mean, std)
        except VoxidError as exc:
            cur.fail(str(exc))

    fields = cur.next("speakers")
    if len(fields) != 1:
        cur.fail("speakers line takes one field")
    registry = SpeakerRegistry()
    for _ in range(_int(cur, fields[0], "speaker count")):
        f = cur.next("speaker")
        if len(f) != 4:
            cur.fail(f"speaker line needs 4 fields, found {len(f)}")
        sid = _int(cur, f[0], "speaker id")
        if sid in registry:
            cur.fail(f"duplicate speaker id {sid}")
        when = unquote(f[3])
        try:
            registry.enroll(sid, unquote(f[1]), _int(cur, f[2], "utterance count"), "" if when == "-" else when)
        except ConsistencyError as exc:
            cur.fail(str(exc))

    models: dict[int, SvmModel] = {}
    while cur.pos < len(lines) and lines[cur.pos].startswith("model "):
        f = cur.next("model")
        if len(f) < 3:
            cur.fail("model line needs id, bias and support-vector count")
        sid = _int(cur, f[0], "speaker id")
        if sid in models:
            cur.fail(f"duplicate model for speaker {sid}")
        bias = float(_floats(cur, f[1:2])[0])
        n_sv = _int(cur, f[2], "support-vector count")
        if n_sv < 0:
            cur.fail("negative support-vector count")
        meta = _kv(cur, f[3:])
        header_line = cur.lineno
        rows = []
        for _ in range(n_sv):
            if cur.pos >= len(lines) or not lines[cur.pos].startswith("sv "):
                raise MalformedModel(
                    f"model {sid} declares {n_sv} support vectors but has {len(rows)}", line=header_line
                )
            rows.append(_floats(cur, cur.next("sv")))
        if cur.pos < len(lines) and lines[cur.pos].startswith("sv "):
            raise MalformedModel(f"model {sid} declares {n_sv} support vectors but has more", line=header_line)
        dims = {len(r) for r in rows}
        if len(dims) > 1:
            raise MalformedModel(f"model {sid} has support vectors of differing length", line=header_line)
        block = np.array(rows).reshape(n_sv, -1) if rows else np.zeros((0, (scaler.dim if scaler else 0) + 1))
        models[sid] = SvmModel(block[:, 1:], block[:, 0], bias, kernel, meta)

    cur.next("end")
    if any(line.strip() for line in lines[cur.pos:]):
        cur.pos += 1
        cur.fail("content after 'end'")

    missing = [sid for sid in models if sid not in registry]
    if missing:
        raise ConsistencyError(f"modeled speakers missing from the registry: {missing}")
    training["mfcc"] = config
    try:
        mc = MulticlassModel(list(models), models, scaler, training)
    except VoxidError as exc:
        raise MalformedModel(str(exc)) from exc
    return mc, registry


def load_model(path) -> tuple[MulticlassModel, SpeakerRegistry]:
    """Read a model file written by :func:`save_model`.

    The MFCC config comes back as ``model.meta['mfcc']``.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise MissingStoreFile(f"model file not found: {path}") from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read model {path}: {exc}") from exc
    return _parse(text.splitlines())


# ---- dataset CSV ---------------------------------------------------------

def write_dataset_csv(dataset: LabeledDataset, path) -> None:
    d = dataset.feature_dim
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["label"] + [f"f{i}" for i in range(d)])
            for vec, lab in zip(dataset.features, dataset.labels):
                writer.writerow([int(lab)] + [repr(float(v)) for v in vec])
    except OSError as exc:
        raise IoFailure(f"cannot write dataset {path}: {exc}") from exc


def read_dataset_csv(path) -> LabeledDataset:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError as exc:
        raise MissingStoreFile(f"dataset file not found: {path}") from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read dataset {path}: {exc}") from exc
    if not rows:
        raise MalformedCsv(f"{path}: empty file, expected a 'label,f0,...' header")
    header = rows[0]
    d = len(header) - 1
    if d < 1 or header != ["label"] + [f"f{i}" for i in range(d)]:
        raise MalformedCsv(f"{path}: header must read label,f0,...,f<d-1>")
    body = [(n, r) for n, r in enumerate(rows[1:], start=2) if r]
    widths = {len(r) for _, r in body}
    if len(widths) > 1:
        if d + 1 in widths:
            expected = d + 1
        else:
            expected = max(widths, key=lambda w: sum(len(r) == w for _, r in body))
        bad = [n for n, r in body if len(r) != expected]
        raise RaggedRows(f"{path}: lines {bad} do not have {expected} fields like the other rows")
    if widths and widths != {d + 1}:
        raise MalformedCsv(f"{path}: header names {d + 1} columns but rows have {widths.pop()}")
    labels, feats = [], []
    for n, r in body:
        try:
            labels.append(int(r[0]))
            vals = [float(v) for v in r[1:]]
        except ValueError:
            raise MalformedCsv(f"{path}: line {n}: non-numeric field") from None
        if not all(math.isfinite(v) for v in vals):
            raise MalformedCsv(f"{path}: line {n}: non-finite value")
        feats.append(vals)
    if not body:
        return LabeledDataset(np.zeros((0, d)), [])
    try:
        return LabeledDataset(np.array(feats), labels)
    except VoxidError as exc:
        raise MalformedCsv(f"{path}: {exc}") from exc
