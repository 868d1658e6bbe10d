import dataclasses

import numpy as np
import pytest

from validation.stability import multirun_stats, vocab_sweep
from utils.exceptions import ConfigurationError, RunFailureError


@pytest.fixture
def pair(synthetic_pair):
    return list(synthetic_pair[:2])


def test_multirun_needs_two_runs(pipeline_config, pair):
    with pytest.raises(ConfigurationError):
        multirun_stats(pipeline_config, runs=1, corpora=pair)


def test_repeated_seed_has_no_spread(pipeline_config, pair):
    stats = multirun_stats(pipeline_config, runs=2, corpora=pair, vary_seed=False)
    assert stats.seeds == [0, 0]
    assert stats.std.loc["a", "b"] == pytest.approx(0.0, abs=1e-9)
    assert stats.mean.loc["a", "b"] == pytest.approx(stats.runs[0].loc["a", "b"])
    assert np.isnan(stats.mean.loc["a", "a"])

    cells = stats.cell_frame()
    assert list(cells.columns) == ["source", "target", "mean", "std"]
    assert sorted(zip(cells.source, cells.target)) == [("a", "b"), ("b", "a")]


def test_seeds_advance_by_one(pipeline_config, pair):
    stats = multirun_stats(pipeline_config.with_seed(7), runs=2, corpora=pair)
    assert stats.seeds == [7, 8]
    assert ((stats.mean >= 0) & (stats.mean <= 100)).sum().sum() == 2


def test_mean_lies_within_the_runs(pipeline_config, pair):
    stats = multirun_stats(pipeline_config, runs=3, corpora=pair)
    stacked = np.stack([run.to_numpy(dtype=float) for run in stats.runs])
    mean = stats.mean.to_numpy(dtype=float)
    off_diagonal = ~np.eye(len(stats.mean), dtype=bool)
    assert np.all(mean[off_diagonal] >= stacked.min(axis=0)[off_diagonal] - 1e-9)
    assert np.all(mean[off_diagonal] <= stacked.max(axis=0)[off_diagonal] + 1e-9)
    assert np.all(stats.std.to_numpy(dtype=float)[off_diagonal] >= 0)


def test_failing_run_is_named(pipeline_config, pair):
    config = dataclasses.replace(
        pipeline_config, training=dataclasses.replace(pipeline_config.training, min_count=100_000)
    )
    with pytest.raises(RunFailureError) as excinfo:
        multirun_stats(config, runs=2, corpora=pair)
    assert excinfo.value.run_index == 0
    assert "EmptyVocabularyError" in str(excinfo.value)


@pytest.mark.parametrize("sizes", [[20, 10], [10, 10], []])
def test_sweep_sizes_must_ascend(pipeline_config, pair, sizes):
    with pytest.raises(ConfigurationError):
        vocab_sweep(pipeline_config, sizes, corpora=pair)


def test_sweep_size_cannot_exceed_target_vocabulary(pipeline_config, pair):
    with pytest.raises(ConfigurationError):
        vocab_sweep(pipeline_config, [10, 100], corpora=pair)


def test_sweep_curve(pipeline_config, pair):
    curve = vocab_sweep(pipeline_config, [10, 20], corpora=pair)
    assert list(curve.columns) == ["pair", "size", "similarity", "std"]
    assert list(curve["pair"]) == ["a|b", "a|b"]
    assert list(curve["size"]) == [10, 20]
    assert curve["similarity"].between(0, 100).all()
