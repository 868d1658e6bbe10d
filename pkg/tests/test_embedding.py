import dataclasses

import numpy as np
import pytest

from ingestion.corpus_builder import Corpus
from models.embedding import EmbeddingSpace, SkipGramTrainer, TrainConfig, sgns_gradient, train
from models.subword import compute_ngrams, ft_hash, ngram_buckets
from utils.exceptions import (
    ConfigurationError,
    EmbeddingFormatError,
    EmptyCorpusError,
    EmptyVocabularyError,
    UnknownTokenError,
)


# -----------------------------
# subword hashing
# -----------------------------
def test_fnv1a_reference_values():
    assert ft_hash("") == 2166136261
    assert ft_hash("a") == 0xE40C292C


def test_ngrams_are_padded():
    assert compute_ngrams("ab", 3, 3) == ["<ab", "ab>"]
    assert compute_ngrams("ab", 3, 4) == ["<ab", "ab>", "<ab>"]


def test_buckets_fall_in_range():
    buckets = ngram_buckets("democrats", 3, 6, 1000)
    assert buckets and all(0 <= b < 1000 for b in buckets)


# -----------------------------
# gradient
# -----------------------------
def _loss(center, context, negatives):
    return sgns_gradient(center, context, negatives)[0]


def _numeric(f, x, h=1e-5):
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        up, down = x.copy(), x.copy()
        up[index] += h
        down[index] -= h
        grad[index] = (f(up) - f(down)) / (2 * h)
    return grad


def _relative_error(analytic, numeric):
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)
    return np.linalg.norm(analytic - numeric) / scale


def test_sgns_gradient_matches_central_differences():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        center = rng.normal(scale=0.5, size=10)
        context = rng.normal(scale=0.5, size=10)
        negatives = rng.normal(scale=0.5, size=(5, 10))
        _, grads = sgns_gradient(center, context, negatives)

        numeric_center = _numeric(lambda v: _loss(v, context, negatives), center)
        numeric_context = _numeric(lambda v: _loss(center, v, negatives), context)
        numeric_negatives = _numeric(lambda v: _loss(center, context, v), negatives)

        worst = max(
            worst,
            _relative_error(grads.center, numeric_center),
            _relative_error(grads.context, numeric_context),
            _relative_error(grads.negatives, numeric_negatives),
        )
    assert worst <= 1e-4


def test_sgns_loss_at_zero_vectors():
    loss, _ = sgns_gradient(np.zeros(4), np.zeros(4), np.zeros((3, 4)))
    assert loss == pytest.approx(4 * np.log(2))


# -----------------------------
# training
# -----------------------------
def _cluster_corpus(seed=0, documents=600, length=8):
    rng = np.random.default_rng(seed)
    clusters = [[f"a{i}" for i in range(4)], [f"b{i}" for i in range(4)]]
    docs = []
    for d in range(documents):
        words = clusters[d % 2]
        docs.append([words[i] for i in rng.integers(0, 4, size=length)])
    return Corpus("toy", docs)


def test_training_is_deterministic(small_train_config):
    corpus = _cluster_corpus()
    first = train(corpus, small_train_config)
    second = train(corpus, small_train_config)
    assert first.tokens == second.tokens
    assert np.array_equal(first.vectors, second.vectors)


def test_different_seeds_give_different_spaces(small_train_config):
    corpus = _cluster_corpus()
    first = train(corpus, small_train_config)
    second = train(corpus, dataclasses.replace(small_train_config, seed=1))
    assert not np.array_equal(first.vectors, second.vectors)


def test_cooccurring_words_become_neighbors(small_train_config):
    config = dataclasses.replace(small_train_config, epochs=5)
    space = train(_cluster_corpus(), config)
    for token in ("a0", "b0"):
        neighbors = [t for t, _ in space.neighbors(token, 3)]
        assert all(t[0] == token[0] for t in neighbors)


def _royal_corpus():
    return Corpus("toy", [["king", "queen", "royal"]] * 200 + [["cat", "dog", "pet"]] * 200)


# subsampling must be off here: with six equally frequent words nearly every
# pair is discarded and the toy corpus learns nothing
TOY_CONFIG = TrainConfig(sample=0.0)


def _learns_royalty(space):
    return space.cosine("king", "queen") > space.cosine("king", "dog")


def test_toy_corpus_separates_the_two_topics():
    passing = 0
    for seed in range(5):
        space = train(_royal_corpus(), dataclasses.replace(TOY_CONFIG, seed=seed))
        passing += _learns_royalty(space)
        assert space.neighbors("king", 1)[0][0] in ("queen", "royal")
    assert passing == 5


def test_epoch_losses_never_rise():
    space = train(_royal_corpus(), TOY_CONFIG)
    losses = space.provenance["epoch_losses"]
    assert len(losses) == TOY_CONFIG.epochs
    for previous, current in zip(losses, losses[1:]):
        assert current <= previous * 1.01
    assert losses[-1] < losses[0]


def test_epoch_losses_are_recorded(small_train_config, synthetic_pair):
    config = dataclasses.replace(small_train_config, epochs=4)
    space = train(synthetic_pair[0], config)
    assert len(space.provenance["epoch_losses"]) == 4
    assert space.provenance["corpus_token_count"] == synthetic_pair[0].token_count


def test_vocabulary_is_frequency_ordered(small_train_config, toy_corpus):
    corpus = toy_corpus(["b b b a a c"])
    trainer = SkipGramTrainer(dataclasses.replace(small_train_config, min_count=2))
    trainer.build_vocab(corpus)
    assert trainer.tokens == ["b", "a"]


def test_min_count_can_empty_the_vocabulary(small_train_config, toy_corpus):
    with pytest.raises(EmptyVocabularyError):
        train(toy_corpus(["one two three"]), dataclasses.replace(small_train_config, min_count=2))


def test_empty_corpus_is_rejected(small_train_config):
    with pytest.raises(EmptyCorpusError):
        train(Corpus("empty", []), small_train_config)


def test_fast_mode_still_learns_the_toy_corpus():
    passing = 0
    for seed in range(5):
        config = dataclasses.replace(TOY_CONFIG, deterministic=False, workers=2, seed=seed)
        space = train(_royal_corpus(), config)
        assert np.all(np.isfinite(space.vectors))
        passing += _learns_royalty(space)
    assert passing >= 4


@pytest.mark.parametrize("overrides", [{"dimension": 0}, {"window": 0}, {"min_n": 7}, {"initial_learning_rate": 0}])
def test_invalid_train_config(overrides):
    with pytest.raises(ConfigurationError):
        TrainConfig(**overrides)


# -----------------------------
# lookup + neighbors
# -----------------------------
def test_subword_space_resolves_unseen_tokens(small_train_config):
    config = dataclasses.replace(small_train_config, subword=True, bucket_count=500)
    space = train(_cluster_corpus(), config)
    assert "a9" not in space
    assert space.resolvable("a9")
    assert space.vector("a9").shape == (config.dimension,)


def test_unseen_token_without_subwords(random_space):
    space = random_space(["x", "y"])
    assert space.vector("zzz") is None
    with pytest.raises(UnknownTokenError):
        space.require_vector("zzz")
    with pytest.raises(KeyError):
        space.neighbors("zzz", 1)


def test_cosine_is_bounded_and_symmetric(random_space):
    tokens = [f"w{i}" for i in range(30)]
    space = random_space(tokens, dimension=6, seed=3)
    for first in tokens[:10]:
        for second in tokens:
            value = space.cosine(first, second)
            assert -1.0 <= value <= 1.0
            assert value == pytest.approx(space.cosine(second, first))
    assert space.cosine("w0", "w0") == pytest.approx(1.0)
    with pytest.raises(UnknownTokenError):
        space.cosine("w0", "absent")


def test_neighbors_exclude_query_and_break_ties_by_vocabulary_order():
    vectors = np.array([[1.0, 0.0], [0.8, 0.6], [0.8, 0.6], [0.0, 1.0]])
    space = EmbeddingSpace("a", ["x", "y", "z", "w"], vectors)
    result = space.neighbors("x", 3)
    assert [t for t, _ in result] == ["y", "z", "w"]
    assert result[0][1] == pytest.approx(0.8)
    assert [s for _, s in result] == sorted((s for _, s in result), reverse=True)


def test_batched_neighbors_match_single_queries(random_space):
    tokens = [f"t{i}" for i in range(40)]
    space = random_space(tokens, seed=3)
    assert space.neighbors_many(tokens[:10], 5) == [space.neighbors(t, 5) for t in tokens[:10]]


# -----------------------------
# persistence
# -----------------------------
def test_save_load_round_trip_with_buckets(tmp_path, small_train_config):
    config = dataclasses.replace(small_train_config, subword=True, bucket_count=300)
    space = train(_cluster_corpus(), config)
    path = tmp_path / "toy.emb"
    space.save(path)

    loaded = EmbeddingSpace.load(path)
    assert loaded.tokens == space.tokens
    assert loaded.language_id == "toy"
    assert np.abs(loaded.vectors - space.vectors).max() <= 1e-6
    assert np.abs(loaded.vector("a9") - space.vector("a9")).max() <= 1e-6
    assert loaded.provenance["epoch_losses"] == space.provenance["epoch_losses"]


def test_plain_text_file_loads_without_sidecar(tmp_path):
    path = tmp_path / "plain.emb"
    path.write_text("2 3\nx 1 0 0\ny 0 1 0\n")
    space = EmbeddingSpace.load(path)
    assert space.tokens == ["x", "y"]
    assert space.language_id == "plain"
    assert not space.subword


@pytest.mark.parametrize("content, line", [
    ("two 3\nx 1 0 0\n", 1),
    ("2 3\nx 1 0 0\ny 0 1\n", 3),
    ("2 3\nx 1 0 0\ny 0 one 0\n", 3),
])
def test_format_errors_name_the_line(tmp_path, content, line):
    path = tmp_path / "bad.emb"
    path.write_text(content)
    with pytest.raises(EmbeddingFormatError) as excinfo:
        EmbeddingSpace.load(path)
    assert excinfo.value.line_number == line


def test_token_count_must_match_header(tmp_path):
    path = tmp_path / "short.emb"
    path.write_text("3 2\nx 1 0\ny 0 1\n")
    with pytest.raises(EmbeddingFormatError):
        EmbeddingSpace.load(path)
