"""Command-line surface: one subcommand per pipeline stage.

Exit status 0 on success, 1 with a JSON error object on stderr when a stage
fails, 2 on usage errors.
"""

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from experiments.experiment_runner import ExperimentRunner, data_period
from experiments.synthgen import GroundTruth, SynthConfig, evaluate_recovery, generate
from ingestion.corpus_builder import Corpus, Period, assign_users, build_corpus, token_balance
from ingestion.fetcher import fetch_comments
from ingestion.records import RecordParser, read_records, write_records
from models.alignment import AlignmentMap, Translator, build_seed_lexicon, fit
from models.embedding import EmbeddingSpace, train
from models.vocabulary import Vocabulary, build_vocab, stopwords
from reporting import artifact_writer as artifacts
from reporting.engagement_report import DisagreementSeries, EngagementReport, monthly_comment_volume
from reporting.paired_t_test import paired_t_test
from reporting.svg_charts import disagreement_chart, sweep_chart
from utils.config_loader import PipelineConfig
from utils.exceptions import ConfigurationError, EmptyCorpusError, ToolkitError
from utils.log_control import configure_logging
from validation.divergence import DivergenceReport, misaligned_pairs, similarity, similarity_neighborhood
from validation.stability import multirun_stats, vocab_sweep

logger = logging.getLogger(__name__)

FETCH_TOKEN_ENV = "DIVERGENCE_FETCH_TOKEN"


# -----------------------------
# helpers
# -----------------------------
def _config(args):
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        config = config.with_seed(args.seed)
    return config


def _header(config, **extra):
    return artifacts.provenance(config.fingerprint(), config.random_seed, **extra)


def _out_dir(args, config):
    return Path(args.out or config.output_dir)


def _load_corpus(path):
    corpus = Corpus.load(path)
    if corpus.token_count == 0:
        raise EmptyCorpusError(f"corpus file {path} contains no tokens")
    return corpus


def _corpora(paths, config, minimum=2):
    paths = paths or config.data.corpus_paths
    if len(paths) < minimum:
        raise ConfigurationError(f"at least {minimum} corpus files are needed (--corpus or data.corpus_paths)")
    return [_load_corpus(path) for path in paths]


def _csv_list(value):
    return [item.strip() for item in value.split(",") if item.strip()]


def _period(args, config):
    start = args.start or config.data.period_start
    end = args.end or config.data.period_end
    settings = dataclasses.replace(config.data, period_start=start, period_end=end)
    return data_period(settings)


def _print_json(payload):
    print(json.dumps(payload, indent=2, sort_keys=True))


def _write_report(out, report, header):
    stem = f"{report.source_language}_{report.target_language}"
    artifacts.write_json(out / f"similarity_{stem}.json", report.to_dict(), header)
    artifacts.write_misaligned(out / f"misaligned_{stem}.csv", report.misaligned_pairs, header)


def _write_matrix(out, matrix, header):
    artifacts.write_matrix(out / "matrix.csv", matrix.similarity, header)
    if matrix.neighborhood is not None:
        artifacts.write_matrix(out / "matrix_neighborhood.csv", matrix.neighborhood, header)
    for report in matrix.reports.values():
        _write_report(out, report, header)


# -----------------------------
# ingestion commands
# -----------------------------
def cmd_ingest(args, config):
    out = _out_dir(args, config)
    channels = _csv_list(args.channels) if args.channels else config.data.channels
    if not channels:
        raise ConfigurationError("no channels given (--channels or data.channels)")
    period = _period(args, config)
    include_replies = args.include_replies or config.data.include_replies
    user_filter = config.data.user_filter and not args.no_user_filter

    parser = RecordParser()
    with open(args.comments, "rb") as stream:
        comments = parser.parse(stream, "comments")
    assignment = assign_users(comments, channels, period) if user_filter else None

    with artifacts.OutputLock(out):
        summary = {"malformed_lines": [line for line, _ in parser.errors], "corpora": {}}
        if assignment is not None:
            summary["user_assignment"] = assignment.summary()
        for channel in channels:
            corpus = build_corpus(comments, channel, period, assignment, include_replies)
            corpus.save(out / f"{channel}.corpus")
            summary["corpora"][channel] = {"documents": len(corpus), "tokens": corpus.token_count}
        if args.videos:
            videos = read_records(args.videos, "videos")
            write_records(videos, out / "videos.jsonl")
            summary["videos"] = len(videos)
        artifacts.write_json(out / "ingest.json", summary, _header(config))
    return 0


def cmd_fetch(args, config):
    out = Path(args.out)
    credentials = os.environ.get(FETCH_TOKEN_ENV)
    records = fetch_comments(args.endpoint, args.channel, args.pages, credentials, args.timeout)
    with artifacts.OutputLock(out.parent):
        write_records(records, out)
    logger.info("Wrote %d comments to %s", len(records), out)
    return 0


def cmd_balance(args, config):
    out = _out_dir(args, config)
    corpora = _corpora(args.corpus, config)
    balanced = token_balance(corpora, config.balance_seed, config.balance.tolerance)
    with artifacts.OutputLock(out):
        for corpus in balanced:
            corpus.save(out / f"{corpus.language_id}.corpus")
        summary = {
            "balance_seed": config.balance_seed,
            "tokens": {c.language_id: c.token_count for c in balanced},
            "documents": {c.language_id: len(c) for c in balanced},
        }
        artifacts.write_json(out / "balance.json", summary, _header(config))
    return 0


# -----------------------------
# model commands
# -----------------------------
def _training_config(args, config):
    overrides = {"seed": config.random_seed}
    for name in ("dimension", "epochs", "workers", "min_count"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.no_subword:
        overrides["subword"] = False
    if args.fast:
        overrides["deterministic"] = False
    return dataclasses.replace(config.training, **overrides)


def cmd_train(args, config):
    corpus = _load_corpus(args.corpus)
    space = train(corpus, _training_config(args, config))
    out = Path(args.out)
    with artifacts.OutputLock(out.parent):
        space.save(out)
    if args.neighbors:
        words = _csv_list(args.neighbors)
        dump = {}
        for word in words:
            dump[word] = [[token, score] for token, score in space.neighbors(word, args.k)] if space.resolvable(word) else None
        _print_json(dump)
    return 0


def cmd_align(args, config):
    src = EmbeddingSpace.load(args.src)
    tgt = EmbeddingSpace.load(args.tgt)
    lexicon = build_seed_lexicon(src, tgt, stopwords())
    alignment = fit(src, tgt, lexicon)
    out = Path(args.out)
    with artifacts.OutputLock(out.parent):
        alignment.save(out)
        summary = {
            "source": src.language_id,
            "target": tgt.language_id,
            "seed_pairs": len(lexicon),
            "dropped_stopwords": list(lexicon.dropped),
            "orthogonality_error": alignment.orthogonality_error(),
            "warnings": alignment.warnings,
        }
        artifacts.write_json(out.with_name(out.name + ".json"), summary, _header(config))
    return 0


def cmd_translate(args, config):
    alignment = AlignmentMap.load(args.map)
    src = EmbeddingSpace.load(args.src)
    tgt = EmbeddingSpace.load(args.tgt)
    candidates = Vocabulary.load(args.target_vocab).tokens() if args.target_vocab else tgt.tokens
    mode = args.mode or config.alignment.mode
    translator = Translator(alignment, src, tgt, candidates, mode, config.alignment.csls_k, args.k)
    result = translator.translate(args.word)
    _print_json({
        "source": result.source,
        "target": result.target,
        "score": result.score,
        "mode": result.mode,
        "alternatives": [[token, score] for token, score in result.alternatives],
    })
    return 0


# -----------------------------
# divergence commands
# -----------------------------
def cmd_similarity(args, config):
    out = _out_dir(args, config)
    if bool(args.src_corpus) != bool(args.tgt_corpus):
        raise ConfigurationError("--src-corpus and --tgt-corpus must be given together")
    paths = [args.src_corpus, args.tgt_corpus] if args.src_corpus else None
    src_corpus, tgt_corpus = _corpora(paths, config)[:2]

    if not (args.src and args.tgt):
        runner = ExperimentRunner(config)
        outcome = runner.run_once([src_corpus, tgt_corpus], config.random_seed, config.balance_seed)
        with artifacts.OutputLock(out):
            for report in outcome.reports.values():
                _write_report(out, report, _header(config))
        return 0

    src = EmbeddingSpace.load(args.src)
    tgt = EmbeddingSpace.load(args.tgt)
    stopword_set = stopwords()
    source_vocab, target_vocab = build_vocab(
        [src_corpus, tgt_corpus], config.vocab.source_size, config.vocab.target_size, stopword_set
    )
    alignment = AlignmentMap.load(args.map) if args.map else fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set))
    settings = config.alignment
    translator = Translator(alignment, src, tgt, target_vocab, settings.mode, settings.csls_k, settings.alternatives)
    results, _ = translator.translate_all(source_vocab)

    echo = {"config_hash": config.fingerprint(), "seed": config.random_seed, "mode": settings.mode,
            "source_size": len(source_vocab), "target_size": len(target_vocab)}
    report = similarity(results, source_vocab, src.language_id, tgt.language_id, echo)
    if config.evaluation.neighborhood:
        report.neighborhood_similarity = similarity_neighborhood(
            src, tgt, alignment, source_vocab, config.evaluation.neighborhood_k, results=results
        )
    report.misaligned_pairs = misaligned_pairs(results, (src_corpus, tgt_corpus), config.evaluation.max_snippets)
    with artifacts.OutputLock(out):
        _write_report(out, report, _header(config))
    return 0


def cmd_matrix(args, config):
    out = _out_dir(args, config)
    corpora = _corpora(args.corpus, config)
    outcome = ExperimentRunner(config).run_once(corpora, config.random_seed, config.balance_seed)
    with artifacts.OutputLock(out):
        _write_matrix(out, outcome.matrix, _header(config))
    print(outcome.matrix.similarity.round(2).to_string())
    return 0


def _load_report(path):
    document = artifacts.read_json(path)
    document.pop("provenance", None)
    return DivergenceReport.from_dict(document)


def cmd_misaligned(args, config):
    report = _load_report(args.report)
    for pair in report.misaligned_pairs[:args.top]:
        margin = "absent" if pair.margin is None else f"{pair.margin:+.4f}"
        print(f"{pair.source}\t{pair.target}\t{pair.score:.4f}\t{margin}")
    if not args.truth:
        return 0

    truth = GroundTruth.load(args.truth)
    scores = evaluate_recovery(report, truth)
    out = _out_dir(args, config)
    with artifacts.OutputLock(out):
        stem = f"{report.source_language}_{report.target_language}"
        artifacts.write_json(out / f"recovery_{stem}.json", dataclasses.asdict(scores), _header(config))
    _print_json(dataclasses.asdict(scores))
    return 0


def cmd_sweep(args, config):
    out = _out_dir(args, config)
    sizes = [int(size) for size in _csv_list(args.sizes)] if args.sizes else config.evaluation.sweep_sizes
    runs = args.runs or config.evaluation.runs
    curve = vocab_sweep(config, sizes, runs, _corpora(args.corpus, config))
    with artifacts.OutputLock(out):
        artifacts.write_csv(out / "sweep.csv", curve, _header(config, runs=runs))
    return 0


def cmd_multirun(args, config):
    out = _out_dir(args, config)
    stats = multirun_stats(config, args.runs, _corpora(args.corpus, config))
    header = _header(config, runs=args.runs, seeds=stats.seeds)
    with artifacts.OutputLock(out):
        artifacts.write_matrix(out / "multirun_mean.csv", stats.mean, header)
        artifacts.write_matrix(out / "multirun_std.csv", stats.std, header)
        artifacts.write_json(out / "multirun.json", {"cells": stats.cell_frame().to_dict("records")}, header)
    return 0


# -----------------------------
# engagement + synthetic data
# -----------------------------
def cmd_engagement(args, config):
    out = _out_dir(args, config)
    videos_path = args.videos or config.data.videos_path
    if not videos_path:
        raise ConfigurationError("no video records given (--videos or data.videos_path)")
    channels = _csv_list(args.channels) if args.channels else config.data.channels
    period = _period(args, config) if (args.start or args.end) else Period.unbounded()
    min_videos = args.min_videos or config.engagement.min_videos

    videos = read_records(videos_path, "videos")
    comments_path = args.comments or config.data.comments_path
    comments = read_records(comments_path, "comments") if comments_path else []
    header = _header(config)

    report = EngagementReport(videos, comments, min_videos)
    summary = {"channels": {}, "overview": report.summary(channels, period)}
    with artifacts.OutputLock(out):
        series = {}
        for channel in channels:
            series[channel] = report.series(channel, period)
            artifacts.write_csv(out / f"disagreement_{channel}.csv", series[channel].to_frame(), header)
            summary["channels"][channel] = series[channel].to_dict()
            if comments:
                volume = monthly_comment_volume(comments, channel, period)
                artifacts.write_csv(out / f"comment_volume_{channel}.csv", volume, header)

        if args.t_test:
            first, second = channels[:2]
            a = dict((m, v) for m, v, _ in series[first].entries)
            b = dict((m, v) for m, v, _ in series[second].entries)
            months = sorted(set(a) & set(b))
            result = paired_t_test([a[m] for m in months], [b[m] for m in months])
            summary["t_test"] = {"channels": [first, second], "months": months, **dataclasses.asdict(result)}

        if args.year is not None:
            if not comments:
                raise ConfigurationError("comment share needs comment records (--comments or data.comments_path)")
            breakdown = report.share(tuple(channels[:2]), args.year)
            artifacts.write_csv(out / f"comment_share_{args.year}.csv", breakdown.to_frame(), header)
            summary["comment_share"] = breakdown.to_dict()

        artifacts.write_json(out / "engagement.json", summary, header)
    return 0


def cmd_synth(args, config):
    out = _out_dir(args, config)
    pairs = [(f"aleph{i}", f"beth{i}") for i in range(args.pairs)]
    for entry in args.pair or []:
        members = _csv_list(entry)
        if len(members) != 2:
            raise ConfigurationError(f"--pair expects 'token_a,token_b', got '{entry}'")
        pairs.append(tuple(members))

    synth = SynthConfig(
        vocabulary_size=args.vocab_size,
        topic_count=args.topics,
        documents=args.documents,
        planted_pairs=pairs,
        independent_target=args.independent,
        seed=config.random_seed,
    )
    source, target, truth = generate(synth)

    with artifacts.OutputLock(out):
        paths = [out / f"{corpus.language_id}.corpus" for corpus in (source, target)]
        source.save(paths[0])
        target.save(paths[1])
        truth.save(out / "ground_truth.json")
        artifacts.write_json(out / "synth_config.json", synth.to_dict(), _header(config))

        pipeline = PipelineConfig.from_dict(config.to_dict())
        pipeline.data.corpus_paths = [str(path) for path in paths]
        pipeline.data.channels = [synth.source_id, synth.target_id]
        pipeline.vocab.source_size = min(pipeline.vocab.source_size, synth.vocabulary_size // 2)
        pipeline.vocab.target_size = min(pipeline.vocab.target_size, synth.vocabulary_size)
        pipeline.output_dir = str(out)
        pipeline.save(out / "config.json")
    return 0


# -----------------------------
# report
# -----------------------------
def _markdown_table(frame):
    columns = [str(c) for c in frame.columns]
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    for row in frame.itertuples(index=False):
        cells = []
        for value in row:
            if isinstance(value, float):
                cells.append("" if np.isnan(value) else f"{value:.2f}")
            else:
                cells.append(str(value))
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines)


def cmd_report(args, config):
    out = Path(args.out or config.output_dir)
    if not out.is_dir():
        raise ConfigurationError(f"output directory {out} does not exist")
    with artifacts.OutputLock(out):
        sections = _render_report(out, args.top)
        with open(out / "report.md", "w", encoding="utf-8") as sink:
            sink.write("\n".join(sections).rstrip() + "\n")
    return 0


def _render_report(out, top_pairs):
    sections = ["# Corpus divergence report", ""]

    matrix_path = out / "matrix.csv"
    if matrix_path.exists():
        _, matrix = artifacts.read_csv(matrix_path)
        sections += ["## Similarity matrix (%)", "", _markdown_table(matrix), ""]

    for path in sorted(out.glob("similarity_*.json")):
        report = _load_report(path)
        sections += [f"## {report.source_language} -> {report.target_language}", ""]
        sections.append(
            f"Similarity {report.similarity:.2f}% ({report.self_translated}/{report.evaluated} self-translated, "
            f"{report.skipped} skipped)"
        )
        if report.neighborhood_similarity is not None:
            sections.append(f"Neighborhood similarity {report.neighborhood_similarity:.2f}")
        top = report.misaligned_frame().head(top_pairs)
        if not top.empty:
            sections += ["", _markdown_table(top)]
        sections.append("")

    for path in sorted(out.glob("recovery_*.json")):
        scores = artifacts.read_json(path)
        sections += [f"## Planted-pair recovery ({path.stem[len('recovery_'):]})", ""]
        sections += [f"- {name}: {scores[name]:.4f}" for name in ("recall", "partner_precision", "false_misalignment_rate")]
        sections.append("")

    multirun_path = out / "multirun.json"
    if multirun_path.exists():
        cells = pd.DataFrame(artifacts.read_json(multirun_path)["cells"])
        sections += ["## Multi-run stability", "", _markdown_table(cells), ""]

    sweep_path = out / "sweep.csv"
    if sweep_path.exists():
        _, curve = artifacts.read_csv(sweep_path)
        sweep_chart(curve, out / "sweep.svg")
        sections += ["## Vocabulary sweep", "", "![sweep](sweep.svg)", "", _markdown_table(curve), ""]

    disagreement_paths = sorted(out.glob("disagreement_*.csv"))
    if disagreement_paths:
        engagement = artifacts.read_json(out / "engagement.json") if (out / "engagement.json").exists() else {}
        series = []
        for path in disagreement_paths:
            _, frame = artifacts.read_csv(path, dtype={"month": str})
            channel = path.stem[len("disagreement_"):]
            series.append(_series_from_frame(channel, frame))
        disagreement_chart(series, out / "disagreement.svg")
        sections += ["## Viewership disagreement", "", "![disagreement](disagreement.svg)", ""]
        for channel, stats in sorted(engagement.get("overview", {}).items()):
            mean = "n/a" if stats["mean_disagreement"] is None else f"{stats['mean_disagreement']:.4f}"
            sections.append(
                f"- {channel}: {stats['months']} months, mean disagreement {mean}, "
                f"{stats['undefined_videos']} videos without votes"
            )
        if "overview" in engagement:
            sections.append("")
        if "t_test" in engagement:
            test = engagement["t_test"]
            sections.append(
                f"Paired t-test {test['channels'][0]} vs {test['channels'][1]}: "
                f"t = {test['t']:.4f}, df = {test['df']}, p = {test['p_value']:.4g}"
            )
            sections.append("")

    return sections


def _series_from_frame(channel, frame):
    rows = frame[["month", "value", "count"]].itertuples(index=False, name=None)
    entries = [(month, float(value), int(count)) for month, value, count in rows]
    return DisagreementSeries(channel, entries)


# -----------------------------
# parser
# -----------------------------
def build_parser():
    parser = argparse.ArgumentParser(prog="divergence", description="Corpus divergence toolkit")
    parser.add_argument("--config", help="pipeline config (YAML or JSON)")
    parser.add_argument("--seed", type=int, help="master seed for every random choice")
    parser.add_argument("--log-level", default="INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse comment records into per-channel corpora")
    p.add_argument("--comments", required=True)
    p.add_argument("--videos")
    p.add_argument("--channels", help="comma-separated channel ids")
    p.add_argument("--start", help="period start date YYYY-MM-DD")
    p.add_argument("--end", help="period end date YYYY-MM-DD (exclusive)")
    p.add_argument("--include-replies", action="store_true")
    p.add_argument("--no-user-filter", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("fetch", help=f"download comments from an HTTP endpoint (credential: ${FETCH_TOKEN_ENV})")
    p.add_argument("--endpoint", required=True)
    p.add_argument("--channel", required=True)
    p.add_argument("--pages", type=int, default=1)
    p.add_argument("--timeout", type=float, default=30)
    p.add_argument("--out", required=True, help="output JSONL file")
    p.set_defaults(handler=cmd_fetch)

    p = sub.add_parser("balance", help="downsample corpora to equal token counts")
    p.add_argument("--corpus", nargs="+")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_balance)

    p = sub.add_parser("train", help="train an embedding space on one corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="output embedding file")
    p.add_argument("--dimension", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--min-count", type=int)
    p.add_argument("--no-subword", action="store_true")
    p.add_argument("--fast", action="store_true", help="multi-worker training, not bit-reproducible")
    p.add_argument("--neighbors", help="comma-separated words whose neighbor lists are printed")
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("align", help="fit the stopword-anchored orthogonal map")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--out", required=True, help="output map file")
    p.set_defaults(handler=cmd_align)

    p = sub.add_parser("translate", help="translate one word across spaces")
    p.add_argument("--map", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--k", type=int, default=10, help="alternatives to print")
    p.add_argument("--mode", choices=("nn", "csls"))
    p.add_argument("--target-vocab")
    p.set_defaults(handler=cmd_translate)

    p = sub.add_parser("misaligned", help="list misaligned pairs of a similarity report")
    p.add_argument("--report", required=True)
    p.add_argument("--truth", help="synthetic ground truth to score recovery against")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_misaligned)

    p = sub.add_parser("similarity", help="self-translation similarity of one corpus pair")
    p.add_argument("--src-corpus")
    p.add_argument("--tgt-corpus")
    p.add_argument("--src", help="trained source embedding (trains from config when omitted)")
    p.add_argument("--tgt", help="trained target embedding")
    p.add_argument("--map")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_similarity)

    p = sub.add_parser("matrix", help="pairwise similarity matrix over all corpora")
    p.add_argument("--corpus", nargs="+")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_matrix)

    p = sub.add_parser("sweep", help="similarity as a function of source vocabulary size")
    p.add_argument("--corpus", nargs="+")
    p.add_argument("--sizes", help="comma-separated ascending sizes")
    p.add_argument("--runs", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("multirun", help="per-cell mean and standard deviation over seeds")
    p.add_argument("--corpus", nargs="+")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_multirun)

    p = sub.add_parser("engagement", help="disagreement series, t-test and comment share")
    p.add_argument("--videos")
    p.add_argument("--comments")
    p.add_argument("--channels")
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--min-videos", type=int)
    p.add_argument("--year", type=int, help="comment-share year")
    p.add_argument("--t-test", action="store_true", help="paired t-test of the first two channels")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_engagement)

    p = sub.add_parser("synth", help="generate a synthetic corpus pair with planted swaps")
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--pair", action="append", help="explicit planted pair 'a,b' (phrases allowed)")
    p.add_argument("--vocab-size", type=int, default=2000)
    p.add_argument("--topics", type=int, default=20)
    p.add_argument("--documents", type=int, default=10000)
    p.add_argument("--independent", action="store_true", help="draw corpus B independently of A")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("report", help="render report.md and charts from an output directory")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_report)
    return parser


def _report_failure(exc):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return 1


def run_command(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    configure_logging(args.log_level)
    try:
        return args.handler(args, _config(args))
    except ToolkitError as exc:
        return _report_failure(exc)
    # unreadable or undecodable input files
    except (OSError, UnicodeDecodeError) as exc:
        return _report_failure(exc)


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
