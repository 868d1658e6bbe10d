import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

import pandas as pd

from ingestion.corpus_builder import Corpus, Period, assign_users, build_corpus, token_balance
from ingestion.records import read_records
from models.embedding import train
from models.vocabulary import build_trigram_vocab, build_vocab, merge_trigrams, stopwords
from utils.config_loader import DEFAULT_CONFIG_PATH, PipelineConfig
from utils.exceptions import ConfigurationError
from utils.seed_control import set_global_seed
from validation.language_matrix import pairwise_matrix

logger = logging.getLogger(__name__)

EXPERIMENT_LOG = "experiment_logs.csv"


@dataclass
class PipelineRun:
    seed: int
    corpora: List[Corpus]
    source_vocab: object
    target_vocab: object
    spaces: Dict[str, object]
    matrix: object
    warnings: List[str] = field(default_factory=list)

    @property
    def reports(self):
        return self.matrix.reports

    def summary(self):
        row = {"seed": self.seed, "source_size": len(self.source_vocab), "target_size": len(self.target_vocab)}
        for (source, target), report in sorted(self.reports.items()):
            row[f"{source}->{target}"] = report.similarity
        return row


def data_period(settings):
    if settings.period_start is None and settings.period_end is None:
        return Period.unbounded()
    if settings.period_start is None or settings.period_end is None:
        raise ConfigurationError("data.period_start and data.period_end must be given together")
    return Period.from_dates(settings.period_start, settings.period_end)


def synth_fingerprint(corpora):
    fingerprints = {corpus.provenance.extra.get("synth_fingerprint") for corpus in corpora}
    return fingerprints.pop() if len(fingerprints) == 1 else None


class ExperimentRunner:

    def __init__(self, config=None, config_path=DEFAULT_CONFIG_PATH):
        self.config = config if config is not None else PipelineConfig.from_file(config_path)
        self.stopword_set = stopwords()
        set_global_seed(self.config.random_seed)

    # -----------------------------
    # 1. CORPORA
    # -----------------------------
    def load_corpora(self):
        data = self.config.data
        if data.corpus_paths:
            return [Corpus.load(path) for path in data.corpus_paths]
        if not data.comments_path or not data.channels:
            raise ConfigurationError("set data.corpus_paths, or data.comments_path together with data.channels")

        comments = read_records(data.comments_path, "comments")
        period = data_period(data)
        assignment = assign_users(comments, data.channels, period) if data.user_filter else None
        return [
            build_corpus(comments, channel, period, assignment, data.include_replies)
            for channel in data.channels
        ]

    # -----------------------------
    # 2. BALANCE + VOCABULARY
    # -----------------------------
    def prepare(self, corpora, balance_seed, source_size=None):
        """Balanced training corpora and the shared vocabularies built on their union."""
        vocab = self.config.vocab
        source_size = source_size or vocab.source_size
        balanced = token_balance(corpora, balance_seed, self.config.balance.tolerance)
        if not vocab.trigram:
            source_vocab, target_vocab = build_vocab(balanced, source_size, vocab.target_size, self.stopword_set)
            return balanced, source_vocab, target_vocab

        source_vocab, target_vocab = build_trigram_vocab(balanced, source_size, vocab.target_size, self.stopword_set)
        merged = [merge_trigrams(corpus, target_vocab) for corpus in balanced]
        return merged, source_vocab, target_vocab

    # -----------------------------
    # 3. TRAINING
    # -----------------------------
    def train_spaces(self, corpora, seed):
        training = dataclasses.replace(self.config.training, seed=seed)
        return {corpus.language_id: train(corpus, training) for corpus in corpora}

    # -----------------------------
    # 4. FULL RUN
    # -----------------------------
    def config_echo(self, seed, corpora, source_vocab, target_vocab):
        echo = {
            "config_hash": self.config.fingerprint(),
            "seed": seed,
            "source_size": len(source_vocab),
            "target_size": len(target_vocab),
            "mode": self.config.alignment.mode,
            "trigram": self.config.vocab.trigram,
        }
        fingerprint = synth_fingerprint(corpora)
        if fingerprint is not None:
            echo["synth_fingerprint"] = fingerprint
        return echo

    def run_once(self, corpora, seed, balance_seed=None):
        balance_seed = seed if balance_seed is None else balance_seed
        training_corpora, source_vocab, target_vocab = self.prepare(corpora, balance_seed)
        spaces = self.train_spaces(training_corpora, seed)

        evaluation = self.config.evaluation
        alignment = self.config.alignment
        matrix = pairwise_matrix(
            [(corpus, spaces[corpus.language_id]) for corpus in training_corpora],
            source_vocab,
            target_vocab,
            mode=alignment.mode,
            csls_k=alignment.csls_k,
            alternatives=alignment.alternatives,
            neighborhood_k=evaluation.neighborhood_k if evaluation.neighborhood else None,
            max_snippets=evaluation.max_snippets,
            stopword_set=self.stopword_set,
            config=self.config_echo(seed, training_corpora, source_vocab, target_vocab),
        )
        return PipelineRun(
            seed=seed,
            corpora=training_corpora,
            source_vocab=source_vocab,
            target_vocab=target_vocab,
            spaces=spaces,
            matrix=matrix,
            warnings=list(target_vocab.warnings),
        )

    def run(self, corpora=None, log_path=None):
        corpora = corpora if corpora is not None else self.load_corpora()
        outcome = self.run_once(corpora, self.config.random_seed, self.config.balance_seed)
        self.log_results(outcome.summary(), log_path)
        return outcome

    def log_results(self, results, log_path=None):
        log_path = Path(log_path or Path(self.config.output_dir) / EXPERIMENT_LOG)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        df = pd.DataFrame([results])

        try:
            existing = pd.read_csv(log_path)
            df = pd.concat([existing, df], ignore_index=True)
        except FileNotFoundError:
            pass

        df.to_csv(log_path, index=False)
        return log_path
