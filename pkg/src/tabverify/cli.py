"""Command-line entry point wiring the pipeline together.

Subcommands: parse, stats, augment, snapshot, baseline, ensemble-train,
predict, evidence, score.  Every run writes a manifest
(<output>.manifest.json) recording the subcommand, resolved options, paths,
tool version and timestamp; reruns with identical inputs and flags produce
identical outputs (manifest timestamp aside).

Log level comes from the TABFACT_KIT_LOG environment variable.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import json
import logging
import os
import sys
from importlib import metadata
from pathlib import Path

from . import augment as augment_mod
from . import classify, corpus, ensemble, evidence, scoring, snapshot, textnorm

log = logging.getLogger("tabverify")


def _tool_version():
    try:
        return metadata.version("tabverify")
    except metadata.PackageNotFoundError:
        return "unknown"


def _write_manifest(out_path, subcommand, options):
    manifest = {
        "subcommand": subcommand,
        "options": options,
        "output": str(out_path),
        "tool_version": _tool_version(),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")


def _load_abbrevs(path):
    return textnorm.load_abbrev_file(path) if path else textnorm.default_abbrevs()


def _parse_ngrams(spec):
    return tuple(sorted({int(n) for n in spec.split(",") if n.strip()}))


def _write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def _read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield json.loads(line)


def _map_tables(fn, docs, jobs):
    """Apply fn to each table, in order, optionally across processes."""
    if jobs <= 1:
        return [fn(doc) for doc in docs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, docs))


def cmd_parse(args):
    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        raise SystemExit(f"not a directory: {in_dir}")
    files = sorted(in_dir.glob("*.xml"))
    if not files:
        log.warning("no XML files in %s", in_dir)
    failures = []
    n_written = 0
    with open(args.out, "wb") as fh:
        for path in files:
            try:
                doc = corpus.parse_xml(path.read_bytes())
            except corpus.CorpusError as exc:
                failures.append((path, exc))
                log.error("%s: %s", path, exc)
                continue
            fh.write(corpus.to_interchange(doc))
            n_written += 1
    _write_manifest(args.out, "parse", {"in_dir": str(in_dir)})
    log.info("wrote %d tables to %s", n_written, args.out)
    if failures:
        print(f"{len(failures)} file(s) failed to parse", file=sys.stderr)
        return 1
    return 0


def cmd_stats(args):
    docs = corpus.read_corpus(args.corpus)
    stats = corpus.corpus_stats(docs)
    lines = [
        f"{'tables':<22}{stats.table_count}",
        f"{'entailed':<22}{stats.entailed}",
        f"{'refuted':<22}{stats.refuted}",
        f"{'unknown':<22}{stats.unknown}",
        f"{'stmt tokens max/min/mean':<28}{stats.stmt_tokens_max}/{stats.stmt_tokens_min}/{stats.stmt_tokens_mean:.2f}",
        f"{'row tokens max/min/mean':<28}{stats.row_tokens_max}/{stats.row_tokens_min}/{stats.row_tokens_mean:.2f}",
        f"{'row count max/min/mean':<28}{stats.row_count_max}/{stats.row_count_min}/{stats.row_count_mean:.2f}",
    ]
    print("\n".join(lines))
    if args.out:
        Path(args.out).write_text(
            json.dumps(stats.to_json(), indent=2, sort_keys=True) + "\n", "utf-8")
        _write_manifest(args.out, "stats", {"corpus": args.corpus})
    return 0


def cmd_augment(args):
    docs = corpus.read_corpus(args.corpus)
    if args.external:
        docs = augment_mod.merge_corpora(docs, corpus.read_corpus(args.external))
    config = augment_mod.AugmentConfig(
        rng_seed=args.seed, unknown_ratio=args.ratio,
        guard_threshold=args.guard_threshold)
    augmented, warnings = augment_mod.generate_unknown(
        docs, config, _load_abbrevs(args.abbrev_file))
    corpus.write_corpus(augmented, args.out)
    for w in warnings:
        log.warning("table %s: appended %d of %d requested unknown statements",
                    w["table_id"], w["appended"], w["requested"])
    _write_manifest(args.out, "augment", {
        "corpus": args.corpus, "external": args.external, "seed": args.seed,
        "ratio": args.ratio, "guard_threshold": args.guard_threshold,
        "warnings": warnings})
    return 0


def _snapshot_table(task):
    doc, r_rows, n_values, abbrevs = task
    records = []
    for st in doc.statements:
        snap = snapshot.select_snapshot(doc, st, r_rows, n_values, abbrevs)
        records.append({"table_id": snap.table_id, "stmt_id": snap.stmt_id,
                        "rows": list(snap.row_indices), "k": snap.k})
    return records


def cmd_snapshot(args):
    docs = corpus.read_corpus(args.corpus)
    r_rows = args.rows_r if args.rows_r else snapshot.median_row_count(docs)
    r_rows = max(1, r_rows)
    n_values = _parse_ngrams(args.ngrams)
    abbrevs = _load_abbrevs(args.abbrev_file)
    tasks = [(doc, r_rows, n_values, abbrevs) for doc in docs]
    per_table = _map_tables(_snapshot_table, tasks, args.jobs)
    _write_jsonl((rec for records in per_table for rec in records), args.out)
    _write_manifest(args.out, "snapshot", {
        "corpus": args.corpus, "rows_r": r_rows, "ngrams": list(n_values)})
    return 0


def _read_snapshots(path):
    snaps = {}
    for obj in _read_jsonl(path):
        snaps[(obj["table_id"], obj["stmt_id"])] = snapshot.Snapshot(
            obj["table_id"], obj["stmt_id"], tuple(obj["rows"]), obj["k"])
    return snaps


def _baseline_table(task):
    doc, snaps, n_values, abbrevs, model_name = task
    out = []
    for st in doc.statements:
        snap = snaps[(doc.table_id, st.stmt_id)]
        out.append(classify.lexical_baseline(st, doc, snap, abbrevs,
                                             n_values, model_name))
    return out


def cmd_baseline(args):
    docs = corpus.read_corpus(args.corpus)
    snaps = _read_snapshots(args.snapshots)
    n_values = _parse_ngrams(args.ngrams)
    abbrevs = _load_abbrevs(args.abbrev_file)
    tasks = [(doc, snaps, n_values, abbrevs, args.model_name) for doc in docs]
    per_table = _map_tables(_baseline_table, tasks, args.jobs)
    classify.write_scores((sv for svs in per_table for sv in svs), args.out)
    _write_manifest(args.out, "baseline", {
        "corpus": args.corpus, "snapshots": args.snapshots,
        "ngrams": list(n_values), "model_name": args.model_name})
    return 0


def _group_scores(score_files):
    """All score vectors, grouped by (table_id, stmt_id); model order = first
    appearance across the files."""
    grouped = {}
    model_names = []
    for path in score_files:
        for sv in classify.read_scores(path):
            grouped.setdefault((sv.table_id, sv.stmt_id), []).append(sv)
            if sv.model_name not in model_names:
                model_names.append(sv.model_name)
    return grouped, tuple(model_names)


def cmd_ensemble_train(args):
    docs = corpus.read_corpus(args.corpus)
    grouped, model_names = _group_scores(args.scores)
    gold = {(doc.table_id, st.stmt_id): st.gold_label
            for doc in docs for st in doc.statements if st.gold_label}
    examples = []
    for key in sorted(grouped):
        if key not in gold:
            continue
        examples.append((ensemble.assemble_features(grouped[key], model_names),
                         gold[key]))
    config = ensemble.TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                                  rng_seed=args.seed, l2=args.l2)
    layer, trace = ensemble.train(examples, config, model_names)
    layer.save(args.out, config)
    log.info("trained on %d examples; final loss %.6f", len(examples), trace[-1])
    _write_manifest(args.out, "ensemble-train", {
        "corpus": args.corpus, "scores": list(args.scores), "lr": args.lr,
        "epochs": args.epochs, "l2": args.l2, "seed": args.seed,
        "final_loss": trace[-1]})
    return 0


def cmd_predict(args):
    grouped, _ = _group_scores(args.scores)
    layer = ensemble.VoteLayer.load(args.layer)
    records = []
    for (table_id, stmt_id) in sorted(grouped):
        svs = grouped[(table_id, stmt_id)]
        if args.majority:
            label = ensemble.majority_vote(svs, layer)
        else:
            label = ensemble.predict(
                layer, ensemble.assemble_features(svs, layer.model_names))
        records.append({"table_id": table_id, "stmt_id": stmt_id,
                        "label": label.value})
    _write_jsonl(records, args.out)
    _write_manifest(args.out, "predict", {
        "scores": list(args.scores), "layer": args.layer,
        "majority": args.majority})
    return 0


def _read_predictions(path):
    return {(obj["table_id"], obj["stmt_id"]): corpus.Label.parse(obj["label"])
            for obj in _read_jsonl(path)}


def _evidence_table(task):
    doc, labels, abbrevs, use_gold, with_trace = task
    records = []
    for st in doc.statements:
        label = st.gold_label if use_gold else labels.get((doc.table_id, st.stmt_id))
        if label is None or label == corpus.Label.UNKNOWN:
            # Unknown statements are outside the rule engine; emit an
            # all-irrelevant map so downstream scoring has full coverage.
            verdicts = tuple(tuple(False for _ in range(doc.n_cols))
                             for _ in range(doc.n_rows))
            trace = None
        else:
            emap, rtrace = evidence.find_evidence(st, doc, label, abbrevs)
            verdicts = emap.verdicts
            trace = rtrace.cells if with_trace else None
        rec = {"table_id": doc.table_id, "stmt_id": st.stmt_id,
               "n_rows": doc.n_rows, "n_cols": doc.n_cols,
               "relevant_rle": evidence.rle_encode(verdicts)}
        if with_trace and trace is not None:
            rec["trace"] = [[list(cell) for cell in row] for row in trace]
        records.append(rec)
    return records


def cmd_evidence(args):
    docs = corpus.read_corpus(args.corpus)
    labels = {} if args.use_gold_taska else _read_predictions(args.predictions)
    abbrevs = _load_abbrevs(args.abbrev_file)
    tasks = [(doc, labels, abbrevs, args.use_gold_taska, args.trace) for doc in docs]
    per_table = _map_tables(_evidence_table, tasks, args.jobs)
    _write_jsonl((rec for recs in per_table for rec in recs), args.out)
    _write_manifest(args.out, "evidence", {
        "corpus": args.corpus, "predictions": args.predictions,
        "use_gold_taska": args.use_gold_taska})
    return 0


def _read_evidence(path):
    maps = {}
    for obj in _read_jsonl(path):
        maps[(obj["table_id"], obj["stmt_id"])] = evidence.rle_decode(
            obj["relevant_rle"], obj["n_rows"], obj["n_cols"])
    return maps


def cmd_score(args):
    docs = corpus.read_corpus(args.corpus)
    average = "micro" if args.micro else "macro"
    report = {}
    if args.preds:
        task_a = scoring.score_task_a(_read_predictions(args.preds), docs, average)
        report["task_a"] = task_a.to_json()
        print(f"task A 2-way F1: {task_a.overall_2way:.4f}")
        print(f"task A 3-way F1: {task_a.overall_3way:.4f}")
    if args.evidence:
        task_b = scoring.score_task_b(_read_evidence(args.evidence), docs)
        report["task_b"] = task_b.to_json()
        print(f"task B cell F1: {task_b.overall:.4f}")
    Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                              "utf-8")
    _write_manifest(args.out, "score", {
        "corpus": args.corpus, "preds": args.preds, "evidence": args.evidence,
        "average": average})
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tabverify",
        description="Table-based statement verification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a directory of XML tables")
    p.add_argument("in_dir")
    p.add_argument("out")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("corpus")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("augment", help="merge external data and add unknown statements")
    p.add_argument("corpus")
    p.add_argument("out")
    p.add_argument("--external", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--guard-threshold", type=float, default=0.5)
    p.add_argument("--abbrev-file", default=None)
    p.set_defaults(fn=cmd_augment)

    p = sub.add_parser("snapshot", help="select content-snapshot rows")
    p.add_argument("corpus")
    p.add_argument("out")
    p.add_argument("--rows-R", dest="rows_r", type=int, default=None)
    p.add_argument("--ngrams", default="1,2")
    p.add_argument("--abbrev-file", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_snapshot)

    p = sub.add_parser("baseline", help="run the lexical baseline classifier")
    p.add_argument("corpus")
    p.add_argument("snapshots")
    p.add_argument("out")
    p.add_argument("--ngrams", default="1,2")
    p.add_argument("--abbrev-file", default=None)
    p.add_argument("--model-name", default="lexical")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_baseline)

    p = sub.add_parser("ensemble-train", help="train the vote layer on score files")
    p.add_argument("scores", nargs="+")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_ensemble_train)

    p = sub.add_parser("predict", help="predict labels from score files")
    p.add_argument("scores", nargs="+")
    p.add_argument("--layer", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--majority", action="store_true",
                   help="per-model argmax plurality vote instead of the vote layer")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("evidence", help="rule-based evidence cell selection")
    p.add_argument("corpus")
    p.add_argument("predictions", nargs="?", default=None)
    p.add_argument("out")
    p.add_argument("--use-gold-taskA", dest="use_gold_taska", action="store_true")
    p.add_argument("--abbrev-file", default=None)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_evidence)

    p = sub.add_parser("score", help="task A / task B reports")
    p.add_argument("--corpus", required=True)
    p.add_argument("--preds", default=None)
    p.add_argument("--evidence", default=None)
    p.add_argument("--out", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--macro", action="store_true", default=True)
    group.add_argument("--micro", action="store_true", default=False)
    p.set_defaults(fn=cmd_score)

    return parser


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("TABFACT_KIT_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "evidence" and not args.use_gold_taska and not args.predictions:
        raise SystemExit("evidence requires a predictions file or --use-gold-taskA")
    try:
        return args.fn(args)
    except (corpus.CorpusError, classify.ScoreFileError, ensemble.EnsembleError,
            scoring.ScoringError, augment_mod.AugmentError, ValueError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
