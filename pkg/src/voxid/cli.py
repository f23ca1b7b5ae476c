"""voxid command line: gen-corpus, extract, train, identify, evaluate, bench."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from voxid.audio import load_wav
from voxid.bench import DEFAULT_SIZES, run_bench
from voxid.errors import BadSizeList, InvalidConfig, MalformedCsv, VoxidError
from voxid.evaluation import EvaluationReport
from voxid.features import LabeledDataset, UtteranceFeatures, summarize
from voxid.mfcc import MelFilterBank, MfccConfig, build_filterbank, mfcc_matrix
from voxid.model_store import (
    SpeakerRegistry,
    load_model,
    read_dataset_csv,
    save_model,
    write_dataset_csv,
)
from voxid.svm.kernels import KernelSpec
from voxid.svm.multiclass import SolverSpec, identify, train_one_vs_rest
from voxid.synthetic import write_corpus

log = logging.getLogger("voxid")


# ---- helpers -------------------------------------------------------------

def read_config(path) -> MfccConfig:
    """MfccConfig from a text file of ``key = value`` lines (# comments)."""
    if path is None:
        return MfccConfig()
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidConfig(f"{path}:{n}: expected key=value")
        values[key.strip()] = value.strip()
    try:
        return MfccConfig.from_dict(values)
    except ValueError as exc:
        raise InvalidConfig(f"{path}: {exc}") from exc


def utterance_features(path, config: MfccConfig, bank: MelFilterBank | None = None) -> UtteranceFeatures:
    return summarize(mfcc_matrix(load_wav(path), config, bank=bank))


def read_manifest(path, split: str | None = None) -> list[dict]:
    """Rows of a path,label[,name,split] manifest with paths made absolute."""
    base = Path(path).resolve().parent
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or not {"path", "label"} <= set(reader.fieldnames):
                raise MalformedCsv(f"{path}: manifest needs 'path' and 'label' columns")
            rows = list(reader)
    except OSError as exc:
        raise MalformedCsv(f"cannot read manifest {path}: {exc}") from exc
    out = []
    for n, row in enumerate(rows, start=2):
        if split and row.get("split", "") != split:
            continue
        try:
            label = int(row["label"])
        except (TypeError, ValueError):
            raise MalformedCsv(f"{path}: row {n}: label must be an integer") from None
        p = Path(row["path"])
        out.append({"path": p if p.is_absolute() else base / p, "label": label, "name": row.get("name") or ""})
    return out


def _names_from_manifest(path) -> dict[int, str]:
    return {r["label"]: r["name"] for r in read_manifest(path) if r["name"]}


def _is_manifest(path) -> bool:
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    return "path" in header


def _extract(items, config: MfccConfig, skip_bad: bool) -> tuple[LabeledDataset | None, list[str]]:
    bank = build_filterbank(config)
    rows, failures = [], []
    for path, label in items:
        try:
            rows.append((utterance_features(path, config, bank), label))
        except VoxidError as exc:
            msg = f"{path}: {exc}" if str(path) not in str(exc) else str(exc)
            failures.append(msg)
            print(("warning: " if skip_bad else "error: ") + msg, file=sys.stderr)
    if failures and not skip_bad:
        return None, failures
    return (LabeledDataset.from_rows(rows) if rows else None), failures


def _parse_inputs(specs: list[str]) -> list[tuple[Path, int]]:
    items = []
    for spec in specs:
        path, sep, label = spec.rpartition(":")
        if not sep:
            raise MalformedCsv(f"input {spec!r} must look like PATH:LABEL")
        try:
            items.append((Path(path), int(label)))
        except ValueError:
            raise MalformedCsv(f"input {spec!r}: label must be an integer") from None
    return items


def _write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


# ---- commands ------------------------------------------------------------

def cmd_gen_corpus(args) -> int:
    items = write_corpus(args.out, args.speakers, args.utterances, args.seed,
                         read_config(args.config).sample_rate, args.train_frac)
    n_train = sum(it.split == "train" for it in items)
    print(f"wrote {len(items)} utterances ({n_train} train, {len(items) - n_train} test) "
          f"to {args.out}; manifest {Path(args.out) / 'manifest.csv'}")
    return 0


def cmd_extract(args) -> int:
    config = read_config(args.config)
    items = []
    if args.manifest:
        items += [(r["path"], r["label"]) for r in read_manifest(args.manifest, args.split)]
    items += _parse_inputs(args.inputs)
    if not items:
        raise MalformedCsv("no inputs: give PATH:LABEL arguments or --manifest")
    dataset, failures = _extract(items, config, args.skip_bad)
    if dataset is None:
        return 1
    write_dataset_csv(dataset, args.out)
    print(f"wrote {len(dataset)} rows x {dataset.feature_dim} features to {args.out}"
          + (f" ({len(failures)} skipped)" if failures else ""))
    return 0


def _kernel(args, dim: int) -> KernelSpec:
    if args.kernel == "linear":
        return KernelSpec.linear()
    if args.kernel == "polynomial":
        return KernelSpec.polynomial(args.degree, args.coef0)
    return KernelSpec.rbf(args.gamma if args.gamma else 1.0 / dim)


def cmd_train(args) -> int:
    config = read_config(args.config)
    dataset = read_dataset_csv(args.dataset)
    solver = SolverSpec(args.solver, chunk_M=args.chunk_M, q=args.q, swap=args.swap)
    t0 = time.perf_counter()
    mc = train_one_vs_rest(dataset, C=args.C, kernel=_kernel(args, dataset.feature_dim), solver=solver,
                           tol=args.tol, seed=args.seed)
    wall = time.perf_counter() - t0
    mc.meta["mfcc"] = config
    names = _names_from_manifest(args.manifest) if args.manifest else {}
    registry = SpeakerRegistry.from_dataset(dataset, names)
    save_model(mc, registry, args.model_out, config)
    summary = {
        "solver": solver.name,
        "model": str(args.model_out),
        "wall_seconds": wall,
        "speakers": [
            {"speaker_id": s, "iterations": mc.models[s].meta["iterations"],
             "wall_seconds": mc.models[s].meta["wall_seconds"], "support_vectors": mc.models[s].n_support,
             "truncated": mc.models[s].truncated}
            for s in mc.speakers
        ],
    }
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(f"{'speaker':>7}  {'iterations':>10}  {'seconds':>8}  {'SVs':>4}")
        for r in summary["speakers"]:
            flag = "  truncated" if r["truncated"] else ""
            print(f"{r['speaker_id']:>7}  {r['iterations']:>10}  {r['wall_seconds']:>8.3f}  {r['support_vectors']:>4}{flag}")
        print(f"trained {len(mc.speakers)} speaker models with {solver.name} in {wall:.3f} s -> {args.model_out}")
    return 0


def cmd_identify(args) -> int:
    mc, registry = load_model(args.model)
    config = mc.meta["mfcc"]
    best, scores = identify(mc, utterance_features(args.wav, config))
    ordered = [s for s in registry.entries if s in scores]
    if args.json:
        print(json.dumps({
            "speaker_id": best,
            "name": registry.name(best),
            "scores": [{"speaker_id": s, "name": registry.name(s), "score": scores[s]} for s in ordered],
        }, indent=2))
    else:
        print(f"speaker {best} ({registry.name(best)})")
        width = max(len(registry.name(s)) for s in ordered)
        for s in ordered:
            print(f"  {s:>3}  {registry.name(s):<{width}}  {scores[s]: .6f}")
    return 0


def cmd_evaluate(args) -> int:
    mc, registry = load_model(args.model)
    if _is_manifest(args.test):
        items = [(r["path"], r["label"]) for r in read_manifest(args.test, args.split)]
        dataset, _ = _extract(items, mc.meta["mfcc"], skip_bad=False)
        if dataset is None:
            return 1
    else:
        dataset = read_dataset_csv(args.test)
    predicted = mc.predict(dataset.features) if len(dataset) else np.zeros(0, dtype=int)
    report = EvaluationReport.from_predictions(
        dataset.labels, predicted, mc.speakers, solver=str(mc.meta.get("solver", "")),
        names={s: registry.name(s) for s in mc.speakers},
    )
    if args.csv:
        _write_text(args.csv, report.to_csv())
    print(report.to_json() if args.json else report.to_table())
    return 0


def cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else list(DEFAULT_SIZES)
    except ValueError:
        raise BadSizeList(f"cannot parse size list {args.sizes!r}") from None
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]

    def progress(row):
        if not args.json:
            print(f"  size {row.training_set_size} {row.solver}: "
                  + (row.error or f"{row.wall_seconds:.3f} s"), file=sys.stderr)

    report = run_bench(sizes, args.kernel, solvers, args.seed, args.repeats, args.C, args.chunk_M,
                       args.q, args.swap, progress=progress)
    if args.csv:
        _write_text(args.csv, report.to_csv())
    print(report.to_json() if args.json else report.to_table())
    failed = any(r.error and r.error != "truncated" for r in report.rows)
    return 1 if failed else 0


# ---- argument parsing ----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value file of MFCC settings")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    common.add_argument("--csv", type=Path, help="also write a CSV table to this path")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="voxid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", parents=[common], help="write the seeded synthetic speaker corpus")
    p.add_argument("out", type=Path)
    p.add_argument("--speakers", type=int, default=8)
    p.add_argument("--utterances", type=int, default=20)
    p.add_argument("--train-frac", type=float, default=0.5)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("extract", parents=[common], help="WAV files -> feature CSV")
    p.add_argument("inputs", nargs="*", help="PATH:LABEL pairs")
    p.add_argument("--manifest", type=Path, help="CSV with path,label[,name,split] columns")
    p.add_argument("--split", help="only manifest rows with this split value")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--skip-bad", action="store_true", help="warn about unreadable files instead of failing")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", parents=[common], help="feature CSV -> model file")
    p.add_argument("dataset", type=Path)
    p.add_argument("--model-out", type=Path, required=True)
    p.add_argument("--solver", default="smo", choices=["smo", "chunking", "fixed-size", "fixed_size"])
    p.add_argument("--C", type=float, default=10.0)
    p.add_argument("--kernel", default="rbf", choices=["linear", "rbf", "polynomial"])
    p.add_argument("--gamma", type=float, help="rbf width (default 1/feature_dim)")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--coef0", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--chunk-M", dest="chunk_M", type=int, default=50)
    p.add_argument("--q", type=int, default=50)
    p.add_argument("--swap", type=int, default=10)
    p.add_argument("--manifest", type=Path, help="take speaker names from this manifest")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("identify", parents=[common], help="name the speaker of one WAV")
    p.add_argument("model", type=Path)
    p.add_argument("wav", type=Path)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("evaluate", parents=[common], help="per-speaker success rates")
    p.add_argument("model", type=Path)
    p.add_argument("test", type=Path, help="feature CSV or WAV manifest")
    p.add_argument("--split", default="test", help="manifest split to evaluate (default test)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", parents=[common], help="SMO vs decomposition timing sweep")
    p.add_argument("--sizes", help="comma-separated training set sizes")
    p.add_argument("--kernel", default="linear", choices=["linear", "rbf"])
    p.add_argument("--solvers", default="smo,chunking")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--chunk-M", dest="chunk_M", type=int, default=50)
    p.add_argument("--q", type=int, default=50)
    p.add_argument("--swap", type=int, default=10)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (VoxidError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
