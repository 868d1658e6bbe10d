"""Frequency vocabularies, trigram vocabularies and the pinned stopword asset."""

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import FrozenSet, List, Tuple

from ingestion.corpus_builder import Corpus
from utils.exceptions import ConfigurationError, VocabularyUnderflowError

logger = logging.getLogger(__name__)

STOPWORD_ASSET = Path(__file__).resolve().parent.parent / "config" / "stopwords_english.txt"
SOURCE_SIZE = 5000
TARGET_SIZE = 10000
PHRASE_JOINER = "_"


@dataclass(frozen=True)
class StopwordSet:
    tokens: FrozenSet[str]
    version: str

    def __contains__(self, token):
        return token in self.tokens

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(sorted(self.tokens))


@lru_cache(maxsize=None)
def stopwords(path=STOPWORD_ASSET):
    version = "unversioned"
    tokens = set()
    with open(path, "r", encoding="ascii") as source:
        for line in source:
            line = line.strip()
            if line.startswith("#"):
                version = " ".join(line.lstrip("# ").split()[:2])
                continue
            if line:
                tokens.add(line.lower())
    return StopwordSet(frozenset(tokens), version)


@dataclass
class Vocabulary:
    entries: List[Tuple[str, int]]
    role: str
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        self._index = {token: rank for rank, (token, _) in enumerate(self.entries)}

    def __len__(self):
        return len(self.entries)

    def __contains__(self, token):
        return token in self._index

    def __iter__(self):
        return iter(self.tokens())

    def tokens(self):
        return [token for token, _ in self.entries]

    def rank(self, token):
        return self._index[token]

    def frequency(self, token):
        return self.entries[self._index[token]][1]

    def prefix(self, size, role=None):
        return Vocabulary(self.entries[:size], role or self.role)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as sink:
            for token, frequency in self.entries:
                sink.write(f"{token}\t{frequency}\n")

    @classmethod
    def load(cls, path, role="target"):
        entries = []
        with open(path, "r", encoding="utf-8") as source:
            for line in source:
                line = line.rstrip("\n")
                if not line:
                    continue
                token, frequency = line.split("\t")
                entries.append((token, int(frequency)))
        return cls(entries, role)


def _ranked(counts):
    # frequency descending, ties lexicographic
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


def _split_vocab(counts, source_size, target_size, unit):
    if source_size > target_size:
        raise ConfigurationError("source_size must not exceed target_size")
    ranked = _ranked(counts)
    if len(ranked) < source_size:
        raise VocabularyUnderflowError(
            f"only {len(ranked)} eligible {unit}s, source vocabulary needs {source_size}"
        )
    warnings = []
    if len(ranked) < target_size:
        message = f"target vocabulary truncated to {len(ranked)} {unit}s (requested {target_size})"
        warnings.append(message)
        logger.warning(message)
    source = Vocabulary(ranked[:source_size], "source")
    target = Vocabulary(ranked[:target_size], "target", warnings)
    logger.info("Built %s vocabularies: source %d, target %d", unit, len(source), len(target))
    return source, target


def build_vocab(corpora, source_size=SOURCE_SIZE, target_size=TARGET_SIZE, stopword_set=None):
    stopword_set = stopword_set or stopwords()
    counts = Counter()
    for corpus in corpora:
        counts.update(corpus.token_counts())
    for token in list(counts):
        if token in stopword_set:
            del counts[token]
    return _split_vocab(counts, source_size, target_size, "token")


def trigram_counts(corpus, stopword_set):
    counts = Counter()
    for document in corpus.documents:
        for start in range(len(document) - 2):
            window = document[start:start + 3]
            if all(token in stopword_set for token in window):
                continue
            counts[PHRASE_JOINER.join(window)] += 1
    return counts


def build_trigram_vocab(corpora, source_size=SOURCE_SIZE, target_size=TARGET_SIZE, stopword_set=None):
    """Trigram vocabularies in merged form (``black_lives_matter``)."""
    stopword_set = stopword_set or stopwords()
    counts = Counter()
    for corpus in corpora:
        counts.update(trigram_counts(corpus, stopword_set))
    return _split_vocab(counts, source_size, target_size, "trigram")


def _as_triple(trigram):
    if isinstance(trigram, str):
        parts = trigram.replace(PHRASE_JOINER, " ").split()
    else:
        parts = list(trigram)
    if len(parts) != 3:
        raise ConfigurationError(f"'{trigram}' is not a trigram")
    return tuple(parts)


def merge_trigrams(corpus, trigram_vocab):
    """Replace vocabulary trigrams in place, leftmost first, without overlap."""
    triples = {_as_triple(trigram) for trigram in trigram_vocab}
    merged_documents = []
    for document in corpus.documents:
        merged = []
        position = 0
        while position < len(document):
            window = tuple(document[position:position + 3])
            if len(window) == 3 and window in triples:
                merged.append(PHRASE_JOINER.join(window))
                position += 3
            else:
                merged.append(document[position])
                position += 1
        merged_documents.append(merged)
    return Corpus(corpus.language_id, merged_documents, corpus.provenance)
