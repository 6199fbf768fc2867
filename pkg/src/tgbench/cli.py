"""Command line front end.

Subcommands mirror the pipeline stages: ``ingest`` raw CSV → bundle,
``stats`` / ``hist`` describe a bundle, ``split`` writes the chronological
partitions, ``run`` executes a benchmark configuration, and ``leaderboard``
renders stored results.  The bundle directory defaults to the ``TGBENCH_DATA``
environment variable.  All failures exit non-zero after printing a single
machine-readable ``error: {...}`` line on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .bundle import read_bundle, write_bundle
from .errors import DatasetFormatError, TGBenchError
from .graph import (DEFAULT_FEATURE_DIM, compute_stats, init_node_features,
                    load_dataset, reindex, temporal_histogram)
from .leaderboard import emit_leaderboard, read_store, record_run
from .runner import RunConfig, run
from .splits import (TRAIN_QUANTILE, UNSEEN_RATIO, VAL_QUANTILE,
                     build_link_pred_splits, build_node_class_splits,
                     chronological_boundaries, read_splits,
                     select_unseen_nodes, write_splits)

DATA_ENV_VAR = "TGBENCH_DATA"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _error_line("usage", message)
        self.exit(2)


def _error_line(code, message):
    print("error: " + json.dumps({"code": code, "message": str(message)},
                                 sort_keys=True), file=sys.stderr)


def _data_dir(args) -> str:
    return args.data or os.environ.get(DATA_ENV_VAR) or "."


def _splits_path(args) -> str:
    return args.splits or os.path.join(_data_dir(args), f"{args.name}.splits.json")


def cmd_ingest(args) -> int:
    graph = load_dataset(args.raw, bipartite=args.kind == "heterogeneous")
    graph, index_map = reindex(graph, kind=args.kind)
    features = init_node_features(graph, dim=args.node_feature_dim)
    paths = write_bundle(_data_dir(args), args.name, graph, features, index_map)
    print(f"ingested {args.raw}: {graph.n_nodes} nodes, {graph.n_edges} edges, "
          f"d_e={graph.d_e}")
    for path in sorted(paths.values()):
        print(f"wrote {path}")
    return 0


def cmd_stats(args) -> int:
    graph = read_bundle(_data_dir(args), args.name).graph
    s = compute_stats(graph)
    print(f"n_nodes {s.n_nodes}")
    print(f"n_edges {s.n_edges}")
    print(f"avg_degree {s.avg_degree:.2f}")
    print(f"edge_density {s.edge_density:.2f}")
    print(f"time_min {s.time_min}")
    print(f"time_max {s.time_max}")
    return 0


def cmd_hist(args) -> int:
    graph = read_bundle(_data_dir(args), args.name).graph
    csv_text = temporal_histogram(graph, args.bins).to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(csv_text)
    return 0


def cmd_split(args) -> int:
    graph = read_bundle(_data_dir(args), args.name).graph
    boundaries = chronological_boundaries(graph, args.q1, args.q2)
    if args.task == "lp":
        unseen = select_unseen_nodes(graph, boundaries, seed=args.mask_seed,
                                     ratio=args.ratio)
        splits = build_link_pred_splits(graph, boundaries, unseen)
        summary = {name: len(arr) for name, arr in splits.partitions().items()}
        summary["unseen_nodes"] = len(unseen)
    else:
        splits = build_node_class_splits(graph, boundaries)
        summary = {name: len(arr) for name, arr in splits.partitions().items()}
    out = _splits_path(args)
    write_splits(out, splits)
    print(f"wrote {out}")
    for key, value in summary.items():
        print(f"{key} {value}")
    return 0


def _parse_model_params(pairs):
    params = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise DatasetFormatError(f"--model-param expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        params[key.strip()] = _coerce(value.strip())
    return params


def _coerce(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def read_config_file(path) -> dict:
    """Flat ``key = value`` run configuration; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DatasetFormatError(
                    f"config line {lineno} is not key = value: {raw.rstrip()!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = _coerce(value.strip())
    return values


def _build_run_config(args) -> RunConfig:
    file_values = read_config_file(args.config) if args.config else {}
    model_params = {key[len("model."):]: value
                    for key, value in file_values.items()
                    if key.startswith("model.")}
    model_params.update(_parse_model_params(args.model_param))

    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    kwargs = {}
    for name, f in fields.items():
        if name == "model_params":
            continue
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            kwargs[name] = flag_value
        elif name in file_values:
            kwargs[name] = file_values[name]
    unknown = [k for k in file_values
               if k not in fields and not k.startswith("model.")]
    if unknown:
        raise DatasetFormatError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "background_classes" in kwargs and isinstance(kwargs["background_classes"], str):
        kwargs["background_classes"] = tuple(
            int(v) for v in kwargs["background_classes"].split(",") if v)
    kwargs["dataset"] = args.name
    kwargs["model_params"] = model_params
    return RunConfig(**kwargs)


def cmd_run(args) -> int:
    bundle = read_bundle(_data_dir(args), args.name)
    splits = read_splits(_splits_path(args))
    config = _build_run_config(args)
    result = run(bundle.graph, splits, config)
    for setting, by_metric in sorted(result.metrics.items()):
        if by_metric is None:
            print(f"{setting}: skipped (empty partition)")
            continue
        parts = [f"{m} {v['mean']:.4f} ± {v['std']:.4f}"
                 for m, v in sorted(by_metric.items())]
        print(f"{setting}: " + ", ".join(parts))
    print(f"epochs_used {result.epochs_used:.1f}")
    print(f"seconds_per_epoch {result.seconds_per_epoch:.4f}")
    print(f"peak_memory_bytes {result.peak_memory_bytes}")
    print(f"inference_seconds_per_100k {result.inference_seconds_per_100k:.4f}")
    if result.fallback_negatives:
        print(f"fallback_negatives {result.fallback_negatives}")
    if args.store:
        records = record_run(args.store, result)
        print(f"recorded {len(records)} results to {args.store}")
    return 0


def cmd_leaderboard(args) -> int:
    records = read_store(args.store)
    table = emit_leaderboard(records, args.task, args.setting, args.metric,
                             fmt=args.format,
                             hide_close_second=args.hide_close_second)
    sys.stdout.write(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tgbench",
                     description="Temporal graph learning benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--data", default=None,
                       help=f"bundle directory (default: ${DATA_ENV_VAR} or .)")
        p.add_argument("--name", required=True, help="dataset name")

    p = sub.add_parser("ingest", parents=[], help="raw CSV -> processed bundle")
    p.add_argument("raw", help="raw interaction CSV")
    add_common(p)
    p.add_argument("--kind", choices=["heterogeneous", "homogeneous"],
                   default="heterogeneous")
    p.add_argument("--node-feature-dim", type=int, default=DEFAULT_FEATURE_DIM)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="print dataset statistics")
    add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("hist", help="temporal histogram as CSV")
    add_common(p)
    p.add_argument("--bins", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("split", help="write chronological splits")
    add_common(p)
    p.add_argument("--task", choices=["lp", "nc"], default="lp")
    p.add_argument("--mask-seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=UNSEEN_RATIO)
    p.add_argument("--q1", type=float, default=TRAIN_QUANTILE)
    p.add_argument("--q2", type=float, default=VAL_QUANTILE)
    p.add_argument("--splits", default=None, help="output path override")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("run", help="run one benchmark configuration")
    add_common(p)
    p.add_argument("--task", choices=["lp", "nc"], default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--neg", dest="sampler",
                   choices=["random", "historical", "inductive"], default=None)
    p.add_argument("--setting", default=None,
                   choices=["all", "transductive", "inductive", "new_old", "new_new"])
    p.add_argument("--splits", default=None, help="splits file (default from --name)")
    p.add_argument("--store", default=None, help="JSONL result store to append to")
    p.add_argument("--config", default=None, help="flat key = value config file")
    p.add_argument("--model-param", action="append", metavar="KEY=VALUE")
    p.add_argument("--mask-seed", type=int, default=None)
    p.add_argument("--val-seed", type=int, default=None)
    p.add_argument("--test-seed", type=int, default=None)
    p.add_argument("--init-seed", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--max-epochs", type=int, default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--timeout-seconds", type=float, default=None)
    p.add_argument("--reseed-val-each-epoch", action="store_const", const=True,
                   default=None)
    p.add_argument("--background-classes", default=None, metavar="L1,L2",
                   help="labels excluded from binary node-label AUC")
    p.add_argument("--exclude-background", dest="exclude_background",
                   action="store_const", const=True, default=None)
    p.add_argument("--include-background", dest="exclude_background",
                   action="store_const", const=False)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("leaderboard", help="render stored results")
    p.add_argument("--store", required=True)
    p.add_argument("--task", choices=["lp", "nc"], default="lp")
    p.add_argument("--setting", default="transductive")
    p.add_argument("--metric", default="auc")
    p.add_argument("--format", choices=["markdown", "csv"], default="markdown")
    p.add_argument("--hide-close-second", action="store_true")
    p.set_defaults(func=cmd_leaderboard)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TGBenchError as exc:
        _error_line(exc.code, exc)
        return 1
    except OSError as exc:
        _error_line("io", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
