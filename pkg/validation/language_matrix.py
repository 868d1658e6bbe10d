import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from models.alignment import Translator, build_seed_lexicon, fit
from models.vocabulary import stopwords
from utils.exceptions import ConfigurationError
from utils.log_control import progress_disabled
from validation.divergence import misaligned_pairs, similarity, similarity_neighborhood

logger = logging.getLogger(__name__)


@dataclass
class LanguageMatrix:
    similarity: pd.DataFrame
    neighborhood: pd.DataFrame = None
    reports: Dict[Tuple[str, str], object] = field(default_factory=dict)
    alignments: Dict[Tuple[str, str], object] = field(default_factory=dict)

    @property
    def languages(self):
        return list(self.similarity.index)


def _empty_matrix(ids):
    return pd.DataFrame(np.nan, index=pd.Index(ids, name="source"), columns=pd.Index(ids, name="target"))


def pairwise_matrix(languages, source_vocab, target_vocab, mode="nn", csls_k=10, alternatives=10,
                    neighborhood_k=None, max_snippets=0, stopword_set=None, config=None):
    """Similarity of every ordered pair of (corpus, space) languages.

    Entry [i, j] is the self-translation rate translating language i into
    language j; the diagonal is left empty.
    """
    ids = [corpus.language_id for corpus, _ in languages]
    if len(set(ids)) != len(ids):
        raise ConfigurationError(f"language ids must be unique: {ids}")
    if len(ids) < 2:
        raise ConfigurationError("a language matrix needs at least two languages")
    stopword_set = stopword_set or stopwords()

    matrix = _empty_matrix(ids)
    neighborhood = _empty_matrix(ids) if neighborhood_k else None
    out = LanguageMatrix(matrix, neighborhood)

    ordered = [(i, j) for i in range(len(ids)) for j in range(len(ids)) if i != j]
    for i, j in tqdm(ordered, desc="language pairs", disable=progress_disabled(logger)):
        (src_corpus, src), (tgt_corpus, tgt) = languages[i], languages[j]
        lexicon = build_seed_lexicon(src, tgt, stopword_set)
        alignment = fit(src, tgt, lexicon)
        translator = Translator(alignment, src, tgt, target_vocab, mode, csls_k, alternatives)
        results, _ = translator.translate_all(source_vocab)

        report = similarity(results, source_vocab, src.language_id, tgt.language_id, config)
        if max_snippets:
            report.misaligned_pairs = misaligned_pairs(results, (src_corpus, tgt_corpus), max_snippets)
        if neighborhood_k:
            report.neighborhood_similarity = similarity_neighborhood(
                src, tgt, alignment, source_vocab, neighborhood_k, results=results
            )
            neighborhood.iloc[i, j] = report.neighborhood_similarity

        matrix.iloc[i, j] = report.similarity
        out.reports[(ids[i], ids[j])] = report
        out.alignments[(ids[i], ids[j])] = alignment
    return out
