"""Orthogonal alignment between two embedding spaces and cross-space translation.

The map W is the orthogonal Procrustes solution fitted on identity pairs of
stopwords, the only words assumed to mean the same thing in every community.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from sklearn.preprocessing import normalize
from tqdm import tqdm

from utils.exceptions import (
    ConfigurationError,
    EmbeddingFormatError,
    InsufficientAnchorsError,
    NumericError,
    UnknownTokenError,
)
from utils.log_control import progress_disabled

logger = logging.getLogger(__name__)

MIN_SEED_PAIRS = 3
ORTHOGONALITY_TOLERANCE = 1e-6
RANK_TOLERANCE = 1e-10
RETRIEVAL_MODES = ("nn", "csls")


@dataclass(frozen=True)
class SeedLexicon:
    pairs: Tuple[Tuple[str, str], ...]
    dropped: Tuple[str, ...] = ()

    def __len__(self):
        return len(self.pairs)


@dataclass
class AlignmentMap:
    matrix: np.ndarray
    source_language_id: str
    target_language_id: str
    seed_pair_count: int
    normalized: bool = True
    warnings: List[str] = field(default_factory=list)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def orthogonality_error(self):
        gram = self.matrix.T @ self.matrix
        return float(np.abs(gram - np.eye(self.dimension)).max())

    def apply(self, vectors):
        return np.asarray(vectors, dtype=np.float64) @ self.matrix

    def save(self, path):
        with open(path, "w", encoding="utf-8") as sink:
            sink.write(
                f"{self.dimension} {self.source_language_id} {self.target_language_id} "
                f"{int(self.normalized)}\n"
            )
            for row in self.matrix:
                sink.write(" ".join(f"{value:.6f}" for value in row) + "\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as source:
            header = source.readline().split()
            if len(header) != 4 or not header[0].isdigit() or header[3] not in ("0", "1"):
                raise EmbeddingFormatError(
                    "alignment header must be '<dimension> <source_id> <target_id> <normalized:0|1>'", 1
                )
            dimension = int(header[0])
            rows = []
            for line_number, line in enumerate(source, start=2):
                values = line.split()
                if not values:
                    continue
                if len(values) != dimension:
                    raise EmbeddingFormatError(
                        f"expected {dimension} values, found {len(values)}", line_number
                    )
                rows.append([float(value) for value in values])
        if len(rows) != dimension:
            raise EmbeddingFormatError(f"expected {dimension} matrix rows, found {len(rows)}")
        return cls(np.array(rows), header[1], header[2], seed_pair_count=0, normalized=header[3] == "1")


@dataclass
class TranslationResult:
    source: str
    target: str
    score: float
    mode: str
    alternatives: List[Tuple[str, float]]
    self_score: Optional[float] = None

    @property
    def is_self(self):
        return self.source == self.target


# -----------------------------
# 1. SEED LEXICON
# -----------------------------
def build_seed_lexicon(src, tgt, stopword_set, min_pairs=MIN_SEED_PAIRS):
    if src.dimension != tgt.dimension:
        raise ConfigurationError(f"dimension mismatch: {src.dimension} vs {tgt.dimension}")
    pairs, dropped = [], []
    for word in stopword_set:
        if src.resolvable(word) and tgt.resolvable(word):
            pairs.append((word, word))
        else:
            dropped.append(word)
    logger.info(
        "Seed lexicon %s -> %s: %d stopword pairs (%d dropped)",
        src.language_id, tgt.language_id, len(pairs), len(dropped),
    )
    if len(pairs) < min_pairs:
        raise InsufficientAnchorsError(
            f"only {len(pairs)} stopwords resolvable in both '{src.language_id}' and "
            f"'{tgt.language_id}'; at least {min_pairs} are needed"
        )
    return SeedLexicon(tuple(pairs), tuple(dropped))


# -----------------------------
# 2. PROCRUSTES FIT
# -----------------------------
def procrustes(source_matrix, target_matrix, normalize_vectors=True):
    """Orthogonal W minimising ||XW - Y||_F, plus the singular values of X^T Y."""
    X = np.asarray(source_matrix, dtype=np.float64)
    Y = np.asarray(target_matrix, dtype=np.float64)
    if normalize_vectors:
        X = normalize(X)
        Y = normalize(Y)
    try:
        U, singular_values, Vt = np.linalg.svd(X.T @ Y)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD of the seed cross-covariance did not converge: {exc}") from exc
    return U @ Vt, singular_values


def fit(src, tgt, lexicon, normalize_vectors=True):
    if src.dimension != tgt.dimension:
        raise ConfigurationError(f"dimension mismatch: {src.dimension} vs {tgt.dimension}")
    if len(lexicon) < MIN_SEED_PAIRS:
        raise InsufficientAnchorsError(f"lexicon has {len(lexicon)} pairs; {MIN_SEED_PAIRS} needed")

    X = np.vstack([src.require_vector(s) for s, _ in lexicon.pairs])
    Y = np.vstack([tgt.require_vector(t) for _, t in lexicon.pairs])
    W, singular_values = procrustes(X, Y, normalize_vectors)

    warnings = []
    threshold = RANK_TOLERANCE * max(singular_values.max(), 1.0)
    zero_count = int((singular_values <= threshold).sum())
    if zero_count:
        message = (
            f"seed cross-covariance {src.language_id}->{tgt.language_id} is rank deficient "
            f"({zero_count} zero singular values); "
            "the orthogonal map is not unique"
        )
        warnings.append(message)
        logger.warning(message)

    alignment = AlignmentMap(W, src.language_id, tgt.language_id, len(lexicon), normalize_vectors, warnings)
    logger.info(
        "Fitted %s -> %s on %d anchors (orthogonality error %.2e)",
        src.language_id, tgt.language_id, len(lexicon), alignment.orthogonality_error(),
    )
    return alignment


# -----------------------------
# 3. TRANSLATION
# -----------------------------
class Translator:

    def __init__(self, alignment, src, tgt, target_vocab, mode="nn", csls_k=10, alternatives=10):
        if mode not in RETRIEVAL_MODES:
            raise ConfigurationError(f"unknown retrieval mode '{mode}'")
        self.alignment = alignment
        self.src = src
        self.tgt = tgt
        self.mode = mode
        self.csls_k = csls_k
        self.alternatives = alternatives

        self.candidates = []
        rows = []
        for token in target_vocab:
            vec = tgt.vector(token)
            if vec is None:
                logger.warning("Target candidate '%s' unresolvable in '%s'; skipped", token, tgt.language_id)
                continue
            self.candidates.append(token)
            rows.append(vec)
        if not self.candidates:
            raise ConfigurationError("target vocabulary has no token resolvable in the target space")
        self.candidate_index = {token: column for column, token in enumerate(self.candidates)}
        self.target_matrix = normalize(np.vstack(rows).astype(np.float64))
        self._source_penalty = None

    def _aligned(self, vectors):
        return normalize(self.alignment.apply(np.atleast_2d(vectors)))

    def _mean_topk(self, queries, pool, chunk_size=1024):
        k = min(self.csls_k, pool.shape[0])
        means = np.empty(queries.shape[0])
        for start in range(0, queries.shape[0], chunk_size):
            sims = queries[start:start + chunk_size] @ pool.T
            top = np.partition(sims, sims.shape[1] - k, axis=1)[:, -k:]
            means[start:start + chunk_size] = top.mean(axis=1)
        return means

    def source_penalty(self):
        # r_S(w): mean similarity of each target candidate to its k nearest aligned source words
        if self._source_penalty is None:
            aligned_source = self._aligned(self.src.vectors)
            self._source_penalty = self._mean_topk(self.target_matrix, aligned_source)
        return self._source_penalty

    def _scores(self, queries):
        cosines = queries @ self.target_matrix.T
        if self.mode == "nn":
            return cosines
        target_penalty = self._mean_topk(queries, self.target_matrix)
        return 2 * cosines - target_penalty[:, None] - self.source_penalty()[None, :]

    def _results(self, tokens, queries):
        scores = self._scores(queries)
        results = []
        for token, row in zip(tokens, scores):
            # stable sort: ties resolved by target vocabulary order
            order = np.argsort(-row, kind="stable")[:self.alternatives]
            best = int(order[0])
            self_column = self.candidate_index.get(token)
            results.append(TranslationResult(
                source=token,
                target=self.candidates[best],
                score=float(row[best]),
                mode=self.mode,
                alternatives=[(self.candidates[c], float(row[c])) for c in order],
                self_score=None if self_column is None else float(row[self_column]),
            ))
        return results

    def translate(self, token):
        vec = self.src.vector(token)
        if vec is None:
            raise UnknownTokenError(token, self.src.language_id)
        return self._results([token], self._aligned(vec))[0]

    def translate_all(self, source_vocab, chunk_size=256):
        resolved, vectors, skipped = [], [], []
        for token in source_vocab:
            vec = self.src.vector(token)
            if vec is None:
                skipped.append((token, f"unresolvable in source space '{self.src.language_id}'"))
                continue
            resolved.append(token)
            vectors.append(vec)
        if skipped:
            logger.warning("Skipped %d unresolvable source tokens", len(skipped))

        results = []
        if resolved:
            queries = self._aligned(np.vstack(vectors))
            chunks = range(0, len(resolved), chunk_size)
            for start in tqdm(chunks, desc="translate", disable=progress_disabled(logger)):
                stop = start + chunk_size
                results.extend(self._results(resolved[start:stop], queries[start:stop]))
        return results, skipped


def translate(alignment, src, tgt, token, target_vocab, mode="nn", k=10, alternatives=10):
    return Translator(alignment, src, tgt, target_vocab, mode, k, alternatives).translate(token)


def translate_all(alignment, src, tgt, source_vocab, target_vocab, mode="nn", k=10, alternatives=10):
    return Translator(alignment, src, tgt, target_vocab, mode, k, alternatives).translate_all(source_vocab)
