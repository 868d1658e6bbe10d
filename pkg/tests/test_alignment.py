import numpy as np
import pytest
from sklearn.preprocessing import normalize

from models.alignment import (
    ORTHOGONALITY_TOLERANCE,
    AlignmentMap,
    SeedLexicon,
    Translator,
    build_seed_lexicon,
    fit,
    procrustes,
    translate_all,
)
from models.embedding import EmbeddingSpace
from utils.exceptions import (
    ConfigurationError,
    EmbeddingFormatError,
    InsufficientAnchorsError,
    UnknownTokenError,
)

DIMENSION = 32


def _random_rotation(seed, dimension=DIMENSION):
    q, r = np.linalg.qr(np.random.default_rng(seed).normal(size=(dimension, dimension)))
    return q * np.sign(np.diag(r))


@pytest.fixture
def spaces(stopword_set):
    """Source space over 60 stopwords and 20 content words, and a rotated copy."""
    tokens = list(stopword_set)[:60] + [f"topic{i}" for i in range(20)]
    vectors = np.random.default_rng(11).normal(size=(len(tokens), DIMENSION))
    rotation = _random_rotation(5)
    src = EmbeddingSpace("a", tokens, vectors)
    tgt = EmbeddingSpace("b", tokens, vectors @ rotation)
    return src, tgt, rotation


# -----------------------------
# seed lexicon + fit
# -----------------------------
def test_seed_lexicon_uses_shared_stopwords(spaces, stopword_set):
    src, tgt, _ = spaces
    lexicon = build_seed_lexicon(src, tgt, stopword_set)
    assert len(lexicon) == 60
    assert all(s == t for s, t in lexicon.pairs)
    assert len(lexicon.dropped) == len(stopword_set) - 60


def test_identity_map_is_recovered(spaces, stopword_set):
    src, _, _ = spaces
    alignment = fit(src, src, build_seed_lexicon(src, src, stopword_set))
    assert np.abs(alignment.matrix - np.eye(DIMENSION)).max() <= 1e-6
    assert not alignment.warnings


def test_rotation_is_recovered(spaces, stopword_set):
    src, tgt, rotation = spaces
    alignment = fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set))
    assert np.abs(alignment.matrix - rotation).max() <= 1e-6
    assert alignment.orthogonality_error() <= ORTHOGONALITY_TOLERANCE
    assert alignment.seed_pair_count == 60


def test_fitted_map_beats_random_orthogonal_maps():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(50, DIMENSION))
    Y = X @ _random_rotation(9) + 0.3 * rng.normal(size=(50, DIMENSION))
    W, _ = procrustes(X, Y)
    assert np.abs(W.T @ W - np.eye(DIMENSION)).max() <= ORTHOGONALITY_TOLERANCE

    Xn, Yn = normalize(X), normalize(Y)
    best = np.linalg.norm(Xn @ W - Yn)
    for seed in range(1000):
        assert best <= np.linalg.norm(Xn @ _random_rotation(100 + seed) - Yn) + 1e-9


def test_random_fits_stay_orthogonal():
    rng = np.random.default_rng(3)
    for _ in range(100):
        W, _ = procrustes(rng.normal(size=(40, DIMENSION)), rng.normal(size=(40, DIMENSION)))
        assert np.abs(W.T @ W - np.eye(DIMENSION)).max() <= ORTHOGONALITY_TOLERANCE


def test_too_few_shared_stopwords(stopword_set):
    tokens = list(stopword_set)[:2] + ["alpha", "beta"]
    space = EmbeddingSpace("a", tokens, np.eye(4))
    with pytest.raises(InsufficientAnchorsError):
        build_seed_lexicon(space, space, stopword_set)
    with pytest.raises(InsufficientAnchorsError):
        fit(space, space, SeedLexicon((("alpha", "alpha"), ("beta", "beta"))))


def test_dimension_mismatch_is_rejected(random_space, stopword_set):
    tokens = list(stopword_set)[:10]
    with pytest.raises(ConfigurationError):
        build_seed_lexicon(random_space(tokens, 8), random_space(tokens, 6), stopword_set)


def test_rank_deficient_seeds_warn(stopword_set):
    tokens = list(stopword_set)[:10]
    vectors = np.zeros((10, DIMENSION))
    vectors[:, :2] = np.random.default_rng(0).normal(size=(10, 2))
    space = EmbeddingSpace("a", tokens, vectors)
    alignment = fit(space, space, build_seed_lexicon(space, space, stopword_set))
    assert alignment.warnings and "rank deficient" in alignment.warnings[0]
    assert alignment.orthogonality_error() <= ORTHOGONALITY_TOLERANCE


# -----------------------------
# translation
# -----------------------------
@pytest.mark.parametrize("mode", ["nn", "csls"])
def test_identical_spaces_translate_every_word_to_itself(spaces, stopword_set, mode):
    src, _, _ = spaces
    alignment = fit(src, src, build_seed_lexicon(src, src, stopword_set))
    results, skipped = translate_all(alignment, src, src, src.tokens, src.tokens, mode=mode)
    assert not skipped
    assert all(result.is_self for result in results)
    assert all(result.self_score == result.score for result in results)


def test_rotated_space_translates_back(spaces, stopword_set):
    src, tgt, _ = spaces
    translator = Translator(fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set)), src, tgt, tgt.tokens)
    result = translator.translate("topic3")
    assert result.target == "topic3"
    assert result.score == pytest.approx(1.0)


def test_alternatives_are_ranked(spaces, stopword_set):
    src, tgt, _ = spaces
    alignment = fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set))
    result = Translator(alignment, src, tgt, tgt.tokens, alternatives=5).translate("topic0")
    scores = [score for _, score in result.alternatives]
    assert len(scores) == 5
    assert scores == sorted(scores, reverse=True)
    assert result.alternatives[0] == (result.target, result.score)


def test_self_score_is_absent_when_target_lacks_the_word(spaces, stopword_set):
    src, tgt, _ = spaces
    alignment = fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set))
    candidates = [t for t in tgt.tokens if t != "topic1"]
    result = Translator(alignment, src, tgt, candidates).translate("topic1")
    assert result.self_score is None
    assert not result.is_self


def test_unknown_source_token(spaces, stopword_set):
    src, tgt, _ = spaces
    translator = Translator(fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set)), src, tgt, tgt.tokens)
    with pytest.raises(UnknownTokenError):
        translator.translate("nowhere")


def test_unresolvable_tokens_are_skipped(spaces, stopword_set):
    src, tgt, _ = spaces
    alignment = fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set))
    results, skipped = translate_all(alignment, src, tgt, ["topic0", "nowhere", "topic1"], tgt.tokens)
    assert [r.source for r in results] == ["topic0", "topic1"]
    assert [token for token, _ in skipped] == ["nowhere"]


def test_unknown_retrieval_mode(spaces, stopword_set):
    src, tgt, _ = spaces
    alignment = fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set))
    with pytest.raises(ConfigurationError):
        Translator(alignment, src, tgt, tgt.tokens, mode="cosine")


# -----------------------------
# persistence
# -----------------------------
def test_map_file_round_trip(tmp_path, spaces, stopword_set):
    src, tgt, _ = spaces
    alignment = fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set))
    path = tmp_path / "a_b.map"
    alignment.save(path)

    loaded = AlignmentMap.load(path)
    assert (loaded.source_language_id, loaded.target_language_id) == ("a", "b")
    assert loaded.normalized is True
    assert np.abs(loaded.matrix - alignment.matrix).max() <= 1e-6


def test_map_header_is_validated(tmp_path):
    path = tmp_path / "bad.map"
    path.write_text("2 a b yes\n1 0\n0 1\n")
    with pytest.raises(EmbeddingFormatError) as excinfo:
        AlignmentMap.load(path)
    assert excinfo.value.line_number == 1


# -----------------------------
# geometric invariants
# -----------------------------
@pytest.fixture
def noisy_spaces(stopword_set):
    """Target is a rotated source plus noise, so translations are not all trivial."""
    tokens = list(stopword_set)[:60] + [f"topic{i}" for i in range(40)]
    rng = np.random.default_rng(21)
    vectors = rng.normal(size=(len(tokens), DIMENSION))
    noisy = vectors @ _random_rotation(8) + 0.8 * rng.normal(size=vectors.shape)
    return EmbeddingSpace("a", tokens, vectors), EmbeddingSpace("b", tokens, noisy)


def _cosine(u, v):
    return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))


def test_fitted_map_preserves_cosines(noisy_spaces, stopword_set):
    src, tgt = noisy_spaces
    alignment = fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set))
    rng = np.random.default_rng(4)
    for _ in range(200):
        a, b = rng.normal(size=(2, DIMENSION))
        assert _cosine(alignment.apply(a), alignment.apply(b)) == pytest.approx(_cosine(a, b), abs=1e-9)


@pytest.mark.parametrize("mode", ["nn", "csls"])
def test_scaling_the_target_space_keeps_translations(noisy_spaces, stopword_set, mode):
    src, tgt = noisy_spaces
    alignment = fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set))
    scaled = EmbeddingSpace("b", tgt.tokens, 3.7 * tgt.vectors)

    plain, _ = translate_all(alignment, src, tgt, src.tokens, tgt.tokens, mode=mode)
    rescaled, _ = translate_all(alignment, src, scaled, src.tokens, scaled.tokens, mode=mode)
    assert [r.target for r in rescaled] == [r.target for r in plain]


def test_nearest_neighbour_matches_brute_force_scan(noisy_spaces, stopword_set):
    src, tgt = noisy_spaces
    alignment = fit(src, tgt, build_seed_lexicon(src, tgt, stopword_set))
    results, _ = translate_all(alignment, src, tgt, src.tokens, tgt.tokens, mode="nn")

    for result in results:
        query = alignment.apply(src.vector(result.source))
        best_token, best_score = None, -np.inf
        for token in tgt.tokens:
            score = _cosine(query, tgt.vector(token))
            if score > best_score + 1e-12:
                best_token, best_score = token, score
        assert result.target == best_token
        assert result.score == pytest.approx(best_score, abs=1e-9)
