import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from models.alignment import Translator
from utils.exceptions import EmptyEvaluationError

logger = logging.getLogger(__name__)

MAX_SNIPPETS = 5


@dataclass
class MisalignedPair:
    source: str
    target: str
    score: float
    margin: Optional[float]
    source_absent: bool = False
    source_snippets: List[str] = field(default_factory=list)
    target_snippets: List[str] = field(default_factory=list)


@dataclass
class DivergenceReport:
    source_language: str
    target_language: str
    similarity: float
    evaluated: int
    self_translated: int
    misaligned: int
    skipped: int
    neighborhood_similarity: Optional[float] = None
    misaligned_pairs: List[MisalignedPair] = field(default_factory=list)
    evaluated_tokens: List[str] = field(default_factory=list)
    skipped_tokens: List[str] = field(default_factory=list)
    config: Dict[str, object] = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        raw["misaligned_pairs"] = [MisalignedPair(**pair) for pair in raw.get("misaligned_pairs", [])]
        return cls(**raw)

    def misaligned_frame(self):
        return pd.DataFrame(
            [(p.source, p.target, p.score, p.margin) for p in self.misaligned_pairs],
            columns=["source", "target", "score", "margin"],
        )


def _pair_from_result(result):
    if result.self_score is None:
        return MisalignedPair(result.source, result.target, result.score, margin=None, source_absent=True)
    return MisalignedPair(result.source, result.target, result.score, margin=result.score - result.self_score)


# -----------------------------
# 1. SELF-TRANSLATION RATE
# -----------------------------
def similarity(results, source_vocab, source_language=None, target_language=None, config=None):
    translated = {result.source for result in results}
    skipped = [token for token in source_vocab if token not in translated]
    if not results:
        raise EmptyEvaluationError("no source token could be evaluated")

    self_translated = sum(1 for result in results if result.is_self)
    misaligned = sorted(
        (_pair_from_result(result) for result in results if not result.is_self),
        key=lambda pair: (-pair.score, pair.source),
    )
    percent = 100.0 * self_translated / len(results)

    report = DivergenceReport(
        source_language=source_language or "source",
        target_language=target_language or "target",
        similarity=percent,
        evaluated=len(results),
        self_translated=self_translated,
        misaligned=len(results) - self_translated,
        skipped=len(skipped),
        misaligned_pairs=misaligned,
        evaluated_tokens=[result.source for result in results],
        skipped_tokens=skipped,
        config=dict(config or {}),
    )
    logger.info(
        "Similarity %s -> %s: %.2f%% (%d/%d self, %d skipped)",
        report.source_language, report.target_language, percent, self_translated, len(results), len(skipped),
    )
    return report


# -----------------------------
# 2. NEIGHBORHOOD OVERLAP
# -----------------------------
def jaccard(a, b):
    a, b = set(a), set(b)
    union = a | b
    return len(a & b) / len(union) if union else 1.0


def similarity_neighborhood(src, tgt, alignment, source_vocab, k=10, target_vocab=None, results=None):
    """Mean Jaccard overlap (x100) of each word's k nearest neighbours in its own
    space and those of its translation in the target space."""
    if results is None:
        candidates = target_vocab if target_vocab is not None else tgt.tokens
        results, _ = Translator(alignment, src, tgt, candidates).translate_all(source_vocab)
    if not results:
        raise EmptyEvaluationError("no source token could be evaluated")

    source_neighbors = src.neighbors_many([r.source for r in results], k)
    target_neighbors = tgt.neighbors_many([r.target for r in results], k)
    scores = [
        jaccard((t for t, _ in s_list), (t for t, _ in t_list))
        for s_list, t_list in zip(source_neighbors, target_neighbors)
    ]
    percent = 100.0 * float(np.mean(scores))
    logger.info("Neighborhood similarity %s -> %s (k=%d): %.2f", src.language_id, tgt.language_id, k, percent)
    return percent


# -----------------------------
# 3. MISALIGNED PAIRS
# -----------------------------
def _snippet_index(corpus, tokens, limit):
    # first `limit` documents containing each token, in corpus order
    wanted = set(tokens)
    found = {token: [] for token in wanted}
    for document in corpus.documents:
        for token in wanted.intersection(document):
            if len(found[token]) < limit:
                found[token].append(" ".join(document))
    return found


def misaligned_pairs(results, corpora, max_snippets=MAX_SNIPPETS):
    source_corpus, target_corpus = corpora
    misaligned = [result for result in results if not result.is_self]
    source_snippets = _snippet_index(source_corpus, [r.source for r in misaligned], max_snippets)
    target_snippets = _snippet_index(target_corpus, [r.target for r in misaligned], max_snippets)

    pairs = []
    for result in misaligned:
        pair = _pair_from_result(result)
        pair.source_snippets = source_snippets[result.source]
        pair.target_snippets = target_snippets[result.target]
        pairs.append(pair)
    pairs.sort(key=lambda pair: (-pair.score, pair.source))
    return pairs
