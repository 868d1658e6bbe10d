"""Run-to-run stability and vocabulary-size sensitivity of the similarity matrix."""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd
from tqdm import tqdm

from experiments.experiment_runner import ExperimentRunner
from models.alignment import Translator, build_seed_lexicon, fit
from utils.exceptions import ConfigurationError, RunFailureError, ToolkitError
from utils.log_control import progress_disabled
from validation.divergence import similarity

logger = logging.getLogger(__name__)


@dataclass
class MultiRunStats:
    mean: pd.DataFrame
    std: pd.DataFrame
    runs: List[pd.DataFrame] = field(default_factory=list)
    seeds: List[int] = field(default_factory=list)

    def cell_frame(self):
        """Long form: one row per ordered pair with mean and standard deviation."""
        rows = []
        for source in self.mean.index:
            for target in self.mean.columns:
                if source == target:
                    continue
                rows.append((source, target, self.mean.loc[source, target], self.std.loc[source, target]))
        return pd.DataFrame(rows, columns=["source", "target", "mean", "std"])


def _run_seeds(config, runs, vary_seed):
    if vary_seed:
        return [config.random_seed + offset for offset in range(runs)]
    return [config.random_seed] * runs


# -----------------------------
# 1. MULTI-RUN STATISTICS
# -----------------------------
def multirun_stats(config, runs=5, corpora=None, vary_seed=True):
    """Re-run balance -> train -> align -> similarity with seeds seed+0 .. seed+runs-1."""
    if runs < 2:
        raise ConfigurationError("multirun_stats needs at least two runs")
    runner = ExperimentRunner(config)
    corpora = corpora if corpora is not None else runner.load_corpora()
    seeds = _run_seeds(config, runs, vary_seed)

    matrices = []
    for run_index, seed in enumerate(tqdm(seeds, desc="runs", disable=progress_disabled(logger))):
        try:
            outcome = runner.run_once(corpora, seed)
        except ToolkitError as exc:
            raise RunFailureError(f"{type(exc).__name__}: {exc}", run_index) from exc
        matrices.append(outcome.matrix.similarity)

    stacked = np.stack([m.to_numpy() for m in matrices])
    template = matrices[0]
    mean = pd.DataFrame(stacked.mean(axis=0), index=template.index, columns=template.columns)
    std = pd.DataFrame(stacked.std(axis=0, ddof=1), index=template.index, columns=template.columns)
    logger.info("Multi-run statistics over %d runs: mean std %.3f", runs, float(np.nanmean(std.to_numpy())))
    return MultiRunStats(mean, std, matrices, seeds)


# -----------------------------
# 2. VOCABULARY SWEEP
# -----------------------------
def vocab_sweep(config, sizes, runs=1, corpora=None):
    """Similarity over top-``size`` prefixes of the source vocabulary.

    Both directions of every language pair are averaged, over ``runs`` seeds.
    Returns one row per (pair, size) with the mean and standard deviation.
    """
    sizes = [int(size) for size in sizes]
    if not sizes:
        raise ConfigurationError("vocab_sweep needs at least one size")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigurationError(f"sweep sizes must be strictly ascending: {sizes}")
    if sizes[0] < 1:
        raise ConfigurationError("sweep sizes must be positive")
    if sizes[-1] > config.vocab.target_size:
        raise ConfigurationError(
            f"sweep size {sizes[-1]} exceeds vocab.target_size {config.vocab.target_size}"
        )
    if runs < 1:
        raise ConfigurationError("vocab_sweep needs at least one run")

    runner = ExperimentRunner(config)
    corpora = corpora if corpora is not None else runner.load_corpora()
    alignment_settings = config.alignment

    rows = []
    for seed in _run_seeds(config, runs, vary_seed=True):
        training_corpora, source_vocab, target_vocab = runner.prepare(corpora, seed, source_size=sizes[-1])
        too_large = [size for size in sizes if size > len(target_vocab)]
        if too_large:
            raise ConfigurationError(
                f"sweep sizes {too_large} exceed the target vocabulary size {len(target_vocab)}"
            )
        spaces = runner.train_spaces(training_corpora, seed)
        ids = [corpus.language_id for corpus in training_corpora]

        for source_id in ids:
            for target_id in ids:
                if source_id == target_id:
                    continue
                src, tgt = spaces[source_id], spaces[target_id]
                alignment = fit(src, tgt, build_seed_lexicon(src, tgt, runner.stopword_set))
                translator = Translator(
                    alignment, src, tgt, target_vocab,
                    alignment_settings.mode, alignment_settings.csls_k, alignment_settings.alternatives,
                )
                results, _ = translator.translate_all(source_vocab)
                for size in sizes:
                    prefix = source_vocab.prefix(size)
                    kept = [result for result in results if result.source in prefix]
                    report = similarity(kept, prefix, source_id, target_id)
                    pair = "|".join(sorted((source_id, target_id)))
                    rows.append((seed, pair, source_id, target_id, size, report.similarity))

    frame = pd.DataFrame(rows, columns=["seed", "pair", "source", "target", "size", "similarity"])
    curve = (
        frame.groupby(["pair", "size"], sort=True)["similarity"]
        .agg(["mean", "std"])
        .reset_index()
        .rename(columns={"mean": "similarity"})
    )
    logger.info("Vocabulary sweep over sizes %s: %d curve points", sizes, len(curve))
    return curve
