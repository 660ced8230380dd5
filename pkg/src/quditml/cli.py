"""Command-line front end.

Subcommands map one-to-one onto the library drivers:

- ``encode-train``: train the affine feature map alone, emitting the loss,
  purity, and overlap trajectory as JSON lines.
- ``train``: repeated trials of one classifier cell (fixed or optimized
  encoding), with per-trial records and a TSV summary.
- ``sweep``: the full feature-ordering sweep of a fixed-encoding cell.
- ``hw-protocol``: the shot-budgeted SPSA + rotosolve pipeline.
- ``decompose``: angles for a 3x3 unitary in either circuit form.
- ``plot``: box-plot SVG from sweep summaries.

Flags override manifest values; the QML_SEED environment variable overrides
the manifest's seed. Exit codes: 0 success, 1 runtime failure, 2 usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .ansatz import ttn_one_qudit, ttn_two_qudit, universal_two_qubit
from .datasets import SCHEMAS, load_dataset
from .encoding_training import ShotProtocol, train_encoding
from .encodings import EncodingSpec, RescaleMap, rescale
from .experiment import (STANDARD_CELLS, ExperimentConfig, child_seed,
                         run_hardware_protocol, run_repetitions, run_sweep)
from .manifest import RunManifest, format_value
from .optimizers import SpsaConfig
from .plotting import BoxGroup, emit_boxplot_svg
from .su3 import decompose_su3
from .state import UnitaryMatrix


def _fmt(value):
    return format_value(float(value))


def _guess_schema(path, override=None):
    if override:
        return SCHEMAS[override]
    stem = os.path.basename(path).lower()
    for name, schema in SCHEMAS.items():
        if name in stem:
            return schema
    raise SystemExit(f"cannot infer the dataset schema from {path!r}; pass --schema")


def _parse_permutation(text):
    return tuple(int(p) for p in text.split(","))


def _manifest_defaults(args):
    """Fill argparse None values from the manifest file, if one was given."""
    if not getattr(args, "manifest", None):
        return
    manifest = RunManifest.from_file(args.manifest)
    for key, value in manifest.entries.items():
        attr = key.replace("-", "_").replace(".", "_")
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)
    if getattr(args, "seed", None) is None:
        args.seed = manifest.seed()


def _resolve_seed(args):
    env = os.environ.get("QML_SEED")
    if args.seed is None:
        return int(env) if env is not None else 0
    return int(args.seed)


def _config_from_args(args, shot_mode=False):
    schema = _guess_schema(args.dataset, args.schema)
    dataset = load_dataset(args.dataset, schema)
    dim, qudits, scheme, ansatz = STANDARD_CELLS[args.cell]
    protocol = None
    if shot_mode:
        protocol = ShotProtocol(pair_samples=int(args.pair_samples),
                                shots_per_pair=int(args.shots))
    spsa = SpsaConfig(max_iterations=int(args.encode_steps))
    return ExperimentConfig(
        dataset=dataset,
        qudit_dim=dim,
        num_qudits=qudits,
        scheme=scheme,
        ansatz=ansatz,
        encoding_mode=args.encoding,
        permutation=_parse_permutation(args.permutation) if args.permutation else None,
        repetitions=int(args.seeds),
        shot_protocol=protocol,
        eval_shots=int(args.eval_shots),
        spsa=spsa,
        master_seed=_resolve_seed(args),
    )


def _write_records(path, records):
    if not path:
        return
    with open(path, "w") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")


def _summary_stats(values):
    v = np.asarray(values, dtype=float)
    q = np.percentile(v, [0, 25, 50, 75, 100], method="linear")
    return {"mean": v.mean(), "std": v.std(), "min": q[0], "q1": q[1],
            "median": q[2], "q3": q[3], "max": q[4]}


def _trial_json(record, extra=None):
    out = {
        "seed": record.seed,
        "train_accuracy": record.train_accuracy,
        "test_accuracy": record.test_accuracy,
        "retries": record.retries,
        "retries_exhausted": record.retries_exhausted,
        "theta": [float(t) for t in record.theta],
    }
    if record.w is not None:
        out["w"] = np.asarray(record.w).ravel().tolist()
        out["b"] = np.asarray(record.b).tolist()
    if extra:
        out.update(extra)
    return out


# ---------------------------------------------------------------------------
# subcommands

def _cmd_encode_train(args):
    schema = _guess_schema(args.dataset, args.schema)
    dataset = load_dataset(args.dataset, schema)
    rmap = RescaleMap.fit(dataset.points)
    features = rescale(dataset.points, rmap)
    k = dataset.num_features
    spec = EncodingSpec(args.scheme, int(args.dim), k, affine=(np.eye(k), np.zeros(k)))
    protocol = None
    if args.mode == "shots":
        protocol = ShotProtocol(pair_samples=int(args.pair_samples),
                                shots_per_pair=int(args.shots),
                                rng_seed=child_seed(_resolve_seed(args), 7))
    spsa = SpsaConfig(max_iterations=int(args.encode_steps),
                      rng_seed=child_seed(_resolve_seed(args), 2))
    w, b, trajectory = train_encoding(features, dataset.labels, spec, spsa,
                                      mode=args.mode, protocol=protocol)
    records = [{
        "evaluation": i,
        "loss": report.loss,
        "purities": report.purities.tolist(),
        "overlaps": report.overlaps.tolist(),
    } for i, report in enumerate(trajectory)]
    _write_records(args.records, records)
    if args.out:
        with open(args.out, "w") as handle:
            for row in w:
                handle.write("\t".join(_fmt(v) for v in row) + "\n")
            handle.write("\t".join(_fmt(v) for v in b) + "\n")
    final = trajectory[-1]
    print(f"final loss {_fmt(final.loss)}  purities "
          + " ".join(_fmt(p) for p in final.purities))
    return 0


def _cmd_train(args):
    config = _config_from_args(args, shot_mode=args.mode == "shots")
    accuracies, records = run_repetitions(config)
    _write_records(args.records, [_trial_json(r) for r in records])
    stats = _summary_stats(accuracies)
    if args.summary:
        with open(args.summary, "w") as handle:
            handle.write("\t".join(stats) + "\n")
            handle.write("\t".join(_fmt(stats[k]) for k in stats) + "\n")
    print(f"{args.cell} {config.encoding_mode}: mean {stats['mean']:.4f} "
          f"std {stats['std']:.4f} over {config.repetitions} splits")
    return 0


def _cmd_sweep(args):
    config = _config_from_args(args)
    result = run_sweep(config)
    if args.records:
        records = []
        for perm, row in zip(result.permutations, result.accuracies):
            records.extend({"permutation": list(perm), "trial": t, "test_accuracy": float(a)}
                           for t, a in enumerate(row))
        _write_records(args.records, records)
    if args.summary:
        with open(args.summary, "w") as handle:
            handle.write("permutation\tmean_accuracy\n")
            for perm, mean in zip(result.permutations, result.cell_means):
                handle.write("-".join(str(p) for p in perm) + "\t" + _fmt(mean) + "\n")
    box = result.box
    print(f"{args.cell}: {len(result.permutations)} orderings, median {box['median']:.4f}, "
          f"range [{box['min']:.4f}, {box['max']:.4f}]")
    return 0


def _cmd_hw_protocol(args):
    args.encoding = "optimized"
    config = _config_from_args(args, shot_mode=True)
    result = run_hardware_protocol(config, num_seeds=int(args.seeds))
    if args.records:
        records = []
        for idx, rec in enumerate(result.records):
            records.extend({"seed_index": idx, "iteration": it, "test_accuracy": float(acc)}
                           for it, acc in enumerate(rec.accuracy_trajectory))
        _write_records(args.records, records)
    if args.summary:
        with open(args.summary, "w") as handle:
            handle.write("seed_index\tinitial_accuracy\tfinal_accuracy\n")
            for idx, rec in enumerate(result.records):
                handle.write(f"{idx}\t{_fmt(rec.initial_accuracy)}\t{_fmt(rec.final_accuracy)}\n")
    finals = result.final_accuracies
    print(f"final accuracy mean {finals.mean():.4f} std {finals.std():.4f} "
          f"(initial mean {result.initial_accuracies.mean():.4f})")
    return 0


def _read_matrix(path):
    """Row-major complex matrix: one row per line, entries as re,im pairs."""
    rows = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            entries = []
            for token in line.replace("\t", " ").split():
                re_part, _, im_part = token.partition(",")
                entries.append(complex(float(re_part), float(im_part or 0.0)))
            rows.append(entries)
    matrix = np.array(rows, dtype=complex)
    if matrix.shape != (3, 3):
        raise ValueError(f"{path}: expected a 3x3 matrix, got shape {matrix.shape}")
    return matrix


def _cmd_decompose(args):
    matrix = _read_matrix(args.matrix)
    decomposition = decompose_su3(UnitaryMatrix(matrix), form=args.form)
    rebuilt = decomposition.reconstruct()
    error = float(np.max(np.abs(rebuilt - matrix)))
    for i, theta in enumerate(decomposition.thetas, start=1):
        print(f"theta{i}={_fmt(theta)}")
    print(f"global_phase={_fmt(decomposition.global_phase)}")
    print(f"reconstruction_error={error:.3e}")
    return 0


def _cmd_plot(args):
    groups = []
    for item in args.input:
        parts = item.split(":")
        if len(parts) < 2:
            raise ValueError(f"--input wants summary.tsv:cell[:star], got {item!r}")
        path, cell = parts[0], parts[1]
        star = float(parts[2]) if len(parts) > 2 and parts[2] else None
        means = []
        with open(path) as handle:
            header = handle.readline().rstrip("\n").split("\t")
            col = header.index("mean_accuracy")
            for line in handle:
                means.append(float(line.rstrip("\n").split("\t")[col]))
        label = cell
        if cell in STANDARD_CELLS:
            dim, qudits, _, ansatz_kind = STANDARD_CELLS[cell]
            if ansatz_kind == "universal":
                count = universal_two_qubit().param_count
            elif qudits == 1:
                count = ttn_one_qudit(dim).param_count
            else:
                count = ttn_two_qudit(dim).param_count
            label = f"{cell} [{count}]"
        groups.append(BoxGroup(label, np.array(means), marker=star))
    emit_boxplot_svg(groups, title=args.title or "", path=args.out)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_dataset_flags(parser):
    parser.add_argument("--dataset", required=True, help="CSV path")
    parser.add_argument("--schema", choices=sorted(SCHEMAS), default=None,
                        help="override schema inference from the filename")
    parser.add_argument("--manifest", default=None, help="key=value defaults file")
    parser.add_argument("--seed", type=int, default=None, help="master seed")


def _add_shot_flags(parser):
    parser.add_argument("--shots", default=10, help="shots per pair / per point")
    parser.add_argument("--pair-samples", dest="pair_samples", default=500,
                        help="sampled pairs per overlap estimate")
    parser.add_argument("--eval-shots", dest="eval_shots", default=500,
                        help="shots per point for accuracy evaluation")
    parser.add_argument("--encode-steps", dest="encode_steps", default=100,
                        help="SPSA iterations for encoding training")


def build_parser():
    parser = argparse.ArgumentParser(prog="quditml",
                                     description="qudit classifier experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode-train", help="train the affine encoding map alone")
    _add_dataset_flags(p)
    _add_shot_flags(p)
    p.add_argument("--scheme", required=True, choices=["nae", "npe", "nce"])
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--mode", choices=["exact", "shots"], default="exact")
    p.add_argument("--records", default=None, help="JSONL trajectory output")
    p.add_argument("--out", default=None, help="TSV weight matrix output")
    p.set_defaults(func=_cmd_encode_train)

    p = sub.add_parser("train", help="repeated trials of one classifier cell")
    _add_dataset_flags(p)
    _add_shot_flags(p)
    p.add_argument("--cell", required=True, choices=sorted(STANDARD_CELLS))
    p.add_argument("--encoding", choices=["fixed", "optimized"], default="fixed")
    p.add_argument("--mode", choices=["exact", "shots"], default="exact")
    p.add_argument("--permutation", default=None, help="comma-separated feature order")
    p.add_argument("--seeds", default=50, help="number of train/test splits")
    p.add_argument("--records", default=None)
    p.add_argument("--summary", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("sweep", help="all feature orderings of a fixed-encoding cell")
    _add_dataset_flags(p)
    _add_shot_flags(p)
    p.add_argument("--cell", required=True, choices=sorted(STANDARD_CELLS))
    p.add_argument("--seeds", default=50, help="trials per ordering")
    p.add_argument("--records", default=None)
    p.add_argument("--summary", default=None)
    p.set_defaults(func=_cmd_sweep, encoding="fixed", permutation=None, mode="exact")

    p = sub.add_parser("hw-protocol", help="shot-budgeted SPSA + rotosolve pipeline")
    _add_dataset_flags(p)
    _add_shot_flags(p)
    p.add_argument("--cell", default="qutrit1-nce", choices=sorted(STANDARD_CELLS))
    p.add_argument("--seeds", default=8, help="independent experiment seeds")
    p.add_argument("--records", default=None)
    p.add_argument("--summary", default=None)
    p.set_defaults(func=_cmd_hw_protocol, permutation=None)

    p = sub.add_parser("decompose", help="angle decomposition of a 3x3 unitary")
    p.add_argument("--matrix", required=True, help="text file, rows of re,im pairs")
    p.add_argument("--form", choices=["theoretical", "hardware"], default="theoretical")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("plot", help="box-plot SVG from sweep summaries")
    p.add_argument("--input", action="append", required=True,
                   help="summary.tsv:cell[:star], repeatable")
    p.add_argument("--title", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        _manifest_defaults(args)
        return int(args.func(args))
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
