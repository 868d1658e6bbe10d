"""End-to-end runs on desk-scale synthetic corpora.

Deselected by default; run with ``pytest -m slow``.
"""

import numpy as np
import pytest

from experiments.experiment_runner import ExperimentRunner
from experiments.synthgen import SynthConfig, evaluate_recovery, generate
from ingestion.corpus_builder import Corpus
from utils.config_loader import PipelineConfig
from utils.seed_control import derive_rng
from validation.stability import multirun_stats, vocab_sweep

pytestmark = pytest.mark.slow

SEEDS = [0, 1, 2, 3, 4]


def _config(source_size=1000, target_size=5000, trigram=False, seed=0):
    return PipelineConfig.from_dict({
        "vocab": {"source_size": source_size, "target_size": target_size, "trigram": trigram},
        "evaluation": {"max_snippets": 0},
        "random_seed": seed,
    })


@pytest.fixture(scope="module")
def split_halves():
    """One synthetic corpus of about 4M tokens split into two random halves."""
    source, _, _ = generate(SynthConfig(vocabulary_size=6000, documents=175_000, seed=11))
    order = derive_rng(11, 99).permutation(len(source))
    half = len(order) // 2
    first = Corpus("left", [source.documents[i] for i in sorted(order[:half])])
    second = Corpus("right", [source.documents[i] for i in sorted(order[half:])])
    return [first, second]


@pytest.fixture(scope="module")
def planted_runs():
    outcomes = []
    for seed in SEEDS:
        pairs = [(f"aleph{i}", f"beth{i}") for i in range(20)]
        source, target, truth = generate(SynthConfig(vocabulary_size=2000, documents=87_000, planted_pairs=pairs, seed=seed))
        outcome = ExperimentRunner(_config(target_size=2000, seed=seed)).run_once([source, target], seed)
        outcomes.append((outcome, truth))
    return outcomes


def test_halves_of_one_corpus_translate_to_themselves(split_halves):
    runner = ExperimentRunner(_config())
    for seed in (0, 1, 2):
        report = runner.run_once(split_halves, seed).reports[("left", "right")]
        assert report.similarity >= 95.0
        assert report.neighborhood_similarity >= 40.0


def test_planted_pairs_are_recovered(planted_runs):
    passing = 0
    for outcome, truth in planted_runs:
        scores = evaluate_recovery(outcome.reports[("a", "b")], truth)
        passing += scores.recall >= 0.90 and scores.false_misalignment_rate <= 0.05
    assert passing >= 4


def test_directions_are_roughly_symmetric(planted_runs):
    for outcome, _ in planted_runs:
        forward = outcome.reports[("a", "b")].similarity
        backward = outcome.reports[("b", "a")].similarity
        assert abs(forward - backward) <= 5.0


def test_similarity_is_stable_across_seeds(split_halves):
    stats = multirun_stats(_config(), runs=5, corpora=split_halves)
    assert stats.std.loc["left", "right"] <= 2.0
    assert stats.std.loc["right", "left"] <= 2.0


def test_similarity_is_flat_in_vocabulary_size(split_halves):
    curve = vocab_sweep(_config(), [1000, 2000, 4000], corpora=split_halves)
    assert np.ptp(curve["similarity"].to_numpy()) <= 5.0


def test_trigram_mode_finds_a_planted_phrase_swap():
    found = 0
    for seed in SEEDS:
        config = SynthConfig(
            vocabulary_size=2000, documents=40_000,
            planted_pairs=[("black lives matter", "all lives matter")], seed=seed,
        )
        source, target, _ = generate(config)
        outcome = ExperimentRunner(_config(500, 1000, trigram=True, seed=seed)).run_once([source, target], seed)
        translations = {p.source: p.target for p in outcome.reports[("a", "b")].misaligned_pairs}
        found += translations.get("black_lives_matter") == "all_lives_matter"
    assert found >= 4
