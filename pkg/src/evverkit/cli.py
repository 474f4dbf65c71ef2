"""Single command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error. Logs are line-delimited
JSON on stderr; data goes to stdout or the named output files only. Every
artifact records the seed that produced it, either inline (JSON outputs) or
in a ``<file>.meta.json`` sidecar (JSON-Lines outputs).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import baselines, dcs, features, filtering, ingest, network, pipeline
from .errors import DataError, EvverError, UsageError
from .types import (
    Article,
    DatasetSplit,
    EvidenceItem,
    read_articles,
    read_jsonl,
    write_jsonl,
)

DEFAULT_SEED = 42


def _log(event: str, **fields) -> None:
    print(json.dumps({"event": event, **fields}), file=sys.stderr)


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_meta(out_path, seed: int, **extra) -> None:
    _write_json(str(out_path) + ".meta.json", {"seed": seed, **extra})


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must exit 1, not argparse's 2
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="evverkit", description=__doc__)
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker count for parallel stages")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", help="normalize one upstream dataset into articles")
    p.add_argument("--source", required=True, choices=sorted(ingest.DEFAULT_ADAPTERS))
    p.add_argument("--input", required=True)
    p.add_argument("--rules", help="extraction rules JSON for body fetching")
    p.add_argument("--mapping", help="JSON file overriding the default column mapping")
    p.add_argument("--fetch-missing", action="store_true", help="fetch absent bodies over HTTP")
    p.add_argument("--cache", default="html_cache", help="HTML cache directory")
    p.add_argument("--out", required=True)

    p = sub.add_parser("build-dataset", help="merge, balance and split ingested articles")
    p.add_argument("--in", dest="input_dir", required=True, help="directory of per-source .jsonl")
    p.add_argument("--topic-map", help="topic consolidation JSON (default: shipped map)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.add_argument("--splits", required=True, help="output path for the split id lists")

    p = sub.add_parser("fetch-dcs", help="look up domain credibility ratings")
    p.add_argument("--domains", required=True, help="text file, one domain per line")
    p.add_argument("--cache", required=True, help="key-value cache file")
    p.add_argument("--out", required=True, help="JSON-Lines snapshot of records")
    p.add_argument("--offline", action="store_true", help="never fetch; cache only")

    p = sub.add_parser("featurize", help="fit a vocabulary and vectorize titles")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", choices=("count", "tfidf"), default="tfidf")
    p.add_argument("--field", choices=("title", "body"), default="title")
    p.add_argument("--max-features", type=int, default=50_000)
    p.add_argument("--out", required=True, help="sparse matrix output (.npz)")

    p = sub.add_parser("train", help="train the evidence classifier")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True, help="corpus JSON-Lines with labels")
    p.add_argument("--dcs", help="credibility score snapshot (enables the score input)")
    p.add_argument("--config", required=True, help="classifier config JSON")
    p.add_argument("--splits", help="splits.json; train/validation subsets are honored")
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--metrics", help="metrics JSON output path")

    p = sub.add_parser("gridsearch", help="cross-validated hyperparameter search")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--dcs")
    p.add_argument("--grid", required=True, help="grid JSON")
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--max-epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, help="ranked results JSON")

    p = sub.add_parser("baseline", help="train and evaluate a reference classifier")
    p.add_argument("--kind", required=True, choices=("logreg", "nb", "tree", "mlp"))
    p.add_argument("--features", required=True, choices=("count", "tfidf", "dcs"))
    p.add_argument("--corpus", required=True)
    p.add_argument("--dcs-file", help="credibility snapshot for the dcs feature mode")
    p.add_argument("--max-features", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, help="metrics JSON")

    p = sub.add_parser("filter", help="classify evidence and keep only credible items")
    p.add_argument("--model", required=True)
    p.add_argument("--evidence", required=True, help="JSON-Lines of evidence items")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--dcs", help="credibility snapshot for domain scores")
    p.add_argument("--clean", action="store_true", help="drop junk entries before scoring")
    p.add_argument("--name", default="evidence", help="corpus name for the audit row")
    p.add_argument("--out", required=True, help="kept items JSON-Lines")
    p.add_argument("--audit", required=True, help="audit report JSON")

    p = sub.add_parser("report", help="render audit JSON as an aligned table")
    p.add_argument("--audit", required=True, nargs="+", help="audit report JSON file(s)")
    p.add_argument("--out", help="write the table here instead of stdout")

    p = sub.add_parser("stats", help="corpus summary: classes, years, lengths, coverage")
    p.add_argument("--corpus", required=True)
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")

    return parser


# --- handlers -------------------------------------------------------------

def cmd_ingest(args) -> int:
    overrides = {}
    if args.mapping:
        raw = json.loads(Path(args.mapping).read_text(encoding="utf-8"))
        overrides["field_mapping"] = raw
    config = ingest.default_adapter_config(args.source, args.input, **overrides)
    skips: list[dict] = []
    articles = list(ingest.ingest_source(config, skip_sink=skips))

    if args.fetch_missing:
        rules = ingest.load_extraction_rules(args.rules) if args.rules else ()
        cache = None
        from .web import HtmlCache

        cache = HtmlCache(args.cache)
        articles, fetch_errors = ingest.fetch_missing_bodies(
            articles, rules, cache=cache, workers=args.workers,
        )
        for err in fetch_errors:
            skips.append({"row": err["url"], "reason": f"fetch_failed: {err['reason']}"})

    write_jsonl(args.out, (a.to_dict() for a in articles))
    skip_path = str(args.out) + ".skips.jsonl"
    write_jsonl(skip_path, skips)
    _write_meta(args.out, seed=DEFAULT_SEED, source=args.source,
                articles=len(articles), skipped=len(skips))
    _log("ingest_done", source=args.source, articles=len(articles), skipped=len(skips))
    return 0


def cmd_build_dataset(args) -> int:
    input_dir = Path(args.input_dir)
    files = sorted(input_dir.glob("*.jsonl"))
    if not files:
        raise DataError(f"no .jsonl files in {input_dir}")
    articles: list[Article] = []
    for f in files:
        if f.name.endswith(".skips.jsonl"):
            continue
        articles.extend(read_articles(f))

    topic_map = pipeline.load_topic_map(args.topic_map)
    corpus, report, splits = pipeline.build_corpus(articles, topic_map, seed=args.seed)

    write_jsonl(args.out, (a.to_dict() for a in corpus))
    _write_meta(args.out, seed=args.seed, articles=len(corpus),
                balance=report.to_dict(), unknown_topics=topic_map.unknown_count)
    _write_json(args.splits, {
        "seed": args.seed,
        "id_hash": pipeline.split_id_hash(splits),
        "splits": {k: v.to_dict() for k, v in splits.items()},
    })
    _log("build_dataset_done", articles=len(corpus),
         shortfall=report.total_missing(), splits={k: len(v.article_ids) for k, v in splits.items()})
    return 0


def cmd_fetch_dcs(args) -> int:
    domains = [
        line.strip().lower() for line in Path(args.domains).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    cache = dcs.DcsCache(args.cache)
    client = dcs.MbfcClient(cache)
    looked_up = 0
    failures = 0
    for domain in domains:
        if args.offline:
            if cache.get(domain) is None:
                failures += 1
            continue
        try:
            client.lookup_domain(domain)
            looked_up += 1
        except EvverError as exc:
            failures += 1
            _log("dcs_lookup_failed", domain=domain, error=str(exc))
    cache.save()
    count = cache.export_snapshot(args.out)
    _write_meta(args.out, seed=DEFAULT_SEED, domains=len(domains),
                records=count, failures=failures)
    _log("fetch_dcs_done", domains=len(domains), records=count, failures=failures)
    return 0


def cmd_featurize(args) -> int:
    from scipy import sparse

    corpus = read_articles(args.corpus)
    if not corpus:
        raise DataError(f"corpus {args.corpus} is empty")
    texts = [(a.body or "") if args.field == "body" else a.title for a in corpus]
    vocab = features.fit_vocabulary(texts, max_features=args.max_features)
    if args.mode == "count":
        matrix = features.count_matrix(texts, vocab)
    else:
        matrix = features.tfidf_matrix(texts, vocab)
    sparse.save_npz(args.out, matrix)
    _write_json(str(args.out) + ".vocab.json", vocab.to_dict())
    _write_json(str(args.out) + ".ids.json", {"ids": [a.id for a in corpus]})
    _write_meta(args.out, seed=DEFAULT_SEED, mode=args.mode,
                vocabulary=len(vocab), documents=len(texts))
    _log("featurize_done", mode=args.mode, vocabulary=len(vocab), documents=len(texts))
    return 0


def _load_training_arrays(emb_path, labels_path, dcs_path):
    emb = features.load_embeddings(emb_path)
    articles = {a.id: a for a in read_articles(labels_path)}
    ids = [i for i in emb.ids if i in articles]
    if not ids:
        raise DataError("no embedding ids match the label corpus")
    dropped = len(emb.ids) - len(ids)
    if dropped:
        _log("train_ids_dropped", missing_labels=dropped)

    X = np.stack([emb.row(i) for i in ids])
    y = np.array([int(articles[i].label) for i in ids], dtype=np.int64)
    scores = None
    if dcs_path:
        table = dcs.load_dcs_table(dcs_path)
        scores = np.array(
            [dcs.score_for_domain(table, articles[i].domain) for i in ids], dtype=np.float64
        )
    return emb, ids, X, y, scores


def _subset(ids, id_list, *arrays):
    index = {i: k for k, i in enumerate(ids)}
    rows = [index[i] for i in id_list if i in index]
    return [np.asarray(a)[rows] if a is not None else None for a in arrays]


def cmd_train(args) -> int:
    emb, ids, X, y, scores = _load_training_arrays(args.embeddings, args.labels, args.dcs)
    cfg_raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    cfg_raw.setdefault("input_dim", emb.dim)
    cfg_raw.setdefault("use_dcs", scores is not None)
    config = network.EvverConfig.from_dict(cfg_raw)
    if config.input_dim != emb.dim:
        raise DataError(
            f"config input_dim {config.input_dim} does not match embedding dim {emb.dim}"
        )
    if config.use_dcs and scores is None:
        raise DataError("config enables the credibility score but --dcs was not given")

    validation = None
    if args.splits:
        split_doc = json.loads(Path(args.splits).read_text(encoding="utf-8"))
        train_ids = split_doc["splits"]["train"]["article_ids"]
        val_ids = split_doc["splits"]["validation"]["article_ids"]
        Xt, yt, st = _subset(ids, train_ids, X, y, scores)
        Xv, yv, sv = _subset(ids, val_ids, X, y, scores)
        model = network.train(Xt, yt, config, dcs=st, validation=(Xv, yv, sv))
    else:
        model = network.train(X, y, config, dcs=scores)

    network.save_model(model, args.out)
    metrics = {
        "seed": config.seed,
        "epochs": len(model.training_metrics),
        "final": model.training_metrics[-1] if model.training_metrics else {},
    }
    if args.metrics:
        _write_json(args.metrics, metrics)
    _log("train_done", **metrics["final"], model=str(args.out))
    return 0


def cmd_gridsearch(args) -> int:
    emb, ids, X, y, scores = _load_training_arrays(args.embeddings, args.labels, args.dcs)
    grid = network.GridSpec.from_dict(json.loads(Path(args.grid).read_text(encoding="utf-8")))
    results = network.grid_search(
        X, y, grid, seed=args.seed, dcs=scores, folds=args.folds,
        max_epochs=args.max_epochs, workers=args.workers,
    )
    payload = {
        "seed": args.seed,
        "results": [
            {**{k: r[k] for k in ("mean_accuracy", "std_accuracy", "fold_accuracies",
                                  "parameter_count")},
             "config": r["config"].to_dict()}
            for r in results
        ],
    }
    _write_json(args.out, payload)
    best = results[0]
    _log("gridsearch_done", combinations=len(results),
         best_accuracy=best["mean_accuracy"], best_config=best["config"].to_dict())
    return 0


def cmd_baseline(args) -> int:
    corpus = read_articles(args.corpus)
    if not corpus:
        raise DataError(f"corpus {args.corpus} is empty")
    y = np.array([int(a.label) for a in corpus], dtype=np.int64)

    if args.features == "dcs":
        table = dcs.load_dcs_table(args.dcs_file) if args.dcs_file else {}
        scores, present = [], []
        for a in corpus:
            rec = table.get(a.domain)
            scores.append(rec.normalized if rec else dcs.ABSENT_NORMALIZED)
            present.append(1.0 if rec else 0.0)
        X = baselines.dcs_only_features(scores, present)
        feature_mode = "dcs_only"
    else:
        titles = [a.title for a in corpus]
        vocab = features.fit_vocabulary(titles, max_features=args.max_features)
        X = (features.count_matrix(titles, vocab) if args.features == "count"
             else features.tfidf_matrix(titles, vocab))
        feature_mode = args.features

    splits = pipeline.split(corpus, seed=args.seed)
    index = {a.id: k for k, a in enumerate(corpus)}
    train_rows = [index[i] for i in splits["train"].article_ids]
    test_rows = [index[i] for i in splits["test"].article_ids]
    X_dense = baselines._densify(X)
    Xtr, ytr = X_dense[train_rows], y[train_rows]
    Xte, yte = X_dense[test_rows], y[test_rows]

    if args.kind == "logreg":
        model = baselines.fit_logreg(Xtr, ytr, seed=args.seed)
    elif args.kind == "nb":
        model = baselines.fit_naive_bayes(Xtr, ytr)
    elif args.kind == "tree":
        model = baselines.fit_decision_tree(Xtr, ytr)
    else:
        model = baselines.fit_mlp_baseline(Xtr, ytr, seed=args.seed)
    model.feature_mode = feature_mode

    report = baselines.evaluate_baseline(model, Xte, yte)
    _write_json(args.out, {"seed": args.seed, "kind": args.kind,
                           "feature_mode": feature_mode, **report})
    _log("baseline_done", kind=args.kind, features=feature_mode,
         accuracy=report["accuracy"])
    return 0


def cmd_filter(args) -> int:
    model = network.load_model(args.model)
    emb = features.load_embeddings(args.embeddings)
    items = [EvidenceItem.from_dict(d) for d in read_jsonl(args.evidence)]
    clean_report = None
    if args.clean:
        items, clean_report = filtering.clean_evidence(items)
    table = dcs.load_dcs_table(args.dcs) if args.dcs else None

    predictions, errors = filtering.classify_evidence(items, model, emb, dcs_table=table)
    scored_items = [i for i in items if all(e["item_id"] != i.id for e in errors)]
    kept = filtering.filter_credible(scored_items, predictions)
    report = filtering.audit(args.name, predictions)

    write_jsonl(args.out, (i.to_dict() for i in kept))
    audit_payload = {"seed": model.config.seed, **report.to_dict(), "errors": errors}
    if clean_report is not None:
        audit_payload["cleaning"] = clean_report.to_dict()
    _write_json(args.audit, audit_payload)
    _write_meta(args.out, seed=model.config.seed, kept=len(kept),
                scored=len(predictions), errors=len(errors))
    _log("filter_done", scored=len(predictions), kept=len(kept), errors=len(errors))
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.audit:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        reports.append(filtering.AuditReport(
            corpus_name=doc["corpus_name"],
            sample_count=doc["sample_count"],
            percent_fact_checked=doc["percent_fact_checked"],
            percent_credible=doc["percent_credible"],
            percent_unreliable=doc["percent_unreliable"],
        ))
    table = filtering.render_audit_table(reports)
    if args.out:
        Path(args.out).write_text(table + "\n", encoding="utf-8")
    else:
        print(table)
    return 0


def cmd_stats(args) -> int:
    corpus = read_articles(args.corpus)
    stats = pipeline.corpus_stats(corpus)
    stats["title_length_balance_gap"] = round(pipeline.title_length_balance_gap(corpus), 4)
    if args.json:
        print(json.dumps(stats, indent=2, sort_keys=True))
        return 0
    print(f"articles: {stats['total']}")
    print("class totals:")
    for name, count in stats["per_class"].items():
        print(f"  {name:>13}: {count:,}")
    print("per year:")
    for year, counts in stats["per_year"].items():
        row = "  ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        print(f"  {year}: {row}")
    print("title token length (mean ± stddev):")
    for name, m in stats["title_token_length"].items():
        print(f"  {name:>13}: {m['mean']:.1f} ± {m['stddev']:.1f}")
    print(f"full-text coverage: {stats['full_text_coverage']}%")
    print(f"title-length balance gap: {stats['title_length_balance_gap']}")
    return 0


_HANDLERS = {
    "ingest": cmd_ingest,
    "build-dataset": cmd_build_dataset,
    "fetch-dcs": cmd_fetch_dcs,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "gridsearch": cmd_gridsearch,
    "baseline": cmd_baseline,
    "filter": cmd_filter,
    "report": cmd_report,
    "stats": cmd_stats,
}


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _log("usage_error", error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    if not args.command:
        parser.print_help()
        return 1
    try:
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        _log("usage_error", error=str(exc))
        return 1
    except (DataError, EvverError) as exc:
        _log("data_error", error=str(exc), command=args.command)
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
