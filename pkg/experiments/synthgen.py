"""Synthetic corpus pairs with planted swapped-context word pairs.

Both corpora come from one topic-mixture generator, so every token that is not
planted has matching contexts on both sides. Corpus B mirrors corpus A with
the members of each planted pair exchanged: the word `aleph` of A lives in the
contexts `beth` occupies in B, which is exactly what a misaligned pair is.
"""

import hashlib
import json
import logging
import re
from dataclasses import asdict, dataclass, field
from typing import List, Tuple

import numpy as np

from ingestion.corpus_builder import Corpus, CorpusProvenance
from models.vocabulary import PHRASE_JOINER, stopwords
from utils.exceptions import ConfigurationError, ConsistencyError
from utils.seed_control import derive_rng

logger = logging.getLogger(__name__)

_WORD = re.compile(r"[a-z0-9]+")
FALSE_RATE_SLICE = 500


@dataclass
class SynthConfig:
    vocabulary_size: int = 2000
    topic_count: int = 20
    documents: int = 10000
    min_length: int = 5
    max_length: int = 30
    planted_pairs: List[Tuple[str, str]] = field(default_factory=list)
    stopword_rate: float = 0.3
    collocation_rate: float = 0.5
    collocates: int = 3
    topic_focus: float = 0.9
    zipf_exponent: float = 1.0
    independent_target: bool = False
    source_id: str = "a"
    target_id: str = "b"
    seed: int = 0

    def __post_init__(self):
        self.planted_pairs = [tuple(pair) for pair in self.planted_pairs]

    def to_dict(self):
        data = asdict(self)
        data["planted_pairs"] = [list(pair) for pair in self.planted_pairs]
        return data

    def fingerprint(self):
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def validate(self, stopword_set):
        if self.vocabulary_size < 10 * max(len(self.planted_pairs), 1):
            raise ConfigurationError("vocabulary_size must be at least 10x the planted pair count")
        if not 1 <= self.min_length <= self.max_length:
            raise ConfigurationError("document lengths must satisfy 1 <= min_length <= max_length")
        if self.topic_count < 1 or self.documents < 1:
            raise ConfigurationError("topic_count and documents must be positive")
        if self.source_id == self.target_id:
            raise ConfigurationError("source_id and target_id must differ")
        seen = set()
        for pair in self.planted_pairs:
            if len(pair) != 2:
                raise ConfigurationError(f"planted pair {pair} must have two members")
            for member in pair:
                parts = member.split()
                if not parts or not all(_WORD.fullmatch(part) for part in parts):
                    raise ConfigurationError(f"planted token '{member}' must consist of [a-z0-9]+ words")
                if len(parts) == 1 and member in stopword_set:
                    raise ConfigurationError(f"planted token '{member}' collides with a stopword")
                if all(part in stopword_set for part in parts):
                    raise ConfigurationError(f"planted phrase '{member}' consists only of stopwords")
                if member in seen:
                    raise ConfigurationError(f"planted token '{member}' appears more than once")
                seen.add(member)


@dataclass
class GroundTruth:
    planted_pairs: List[Tuple[str, str]]
    expected_self: List[str]
    source_id: str
    target_id: str
    config_fingerprint: str

    @property
    def planted_tokens(self):
        return {token for pair in self.planted_pairs for token in pair}

    def oriented_pairs(self, source_language):
        if source_language == self.source_id:
            return list(self.planted_pairs)
        return [(b, a) for a, b in self.planted_pairs]

    def to_dict(self):
        data = asdict(self)
        data["planted_pairs"] = [list(pair) for pair in self.planted_pairs]
        return data

    def save(self, path):
        with open(path, "w", encoding="utf-8") as sink:
            json.dump(self.to_dict(), sink, indent=2, sort_keys=True)
            sink.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as source:
            raw = json.load(source)
        raw["planted_pairs"] = [tuple(pair) for pair in raw["planted_pairs"]]
        return cls(**raw)


@dataclass
class RecoveryScores:
    recall: float
    partner_precision: float
    false_misalignment_rate: float


def unit_name(member):
    return PHRASE_JOINER.join(member.split())


class TopicMixtureGenerator:

    def __init__(self, config, stopword_set):
        self.config = config
        rng = derive_rng(config.seed, 0)
        size = config.vocabulary_size

        self.units = [f"w{rank}" for rank in range(size)]
        planted_units = [unit_name(m) for pair in config.planted_pairs for m in pair]
        collisions = set(planted_units) & set(self.units)
        if collisions:
            raise ConfigurationError(f"planted tokens collide with generated filler: {sorted(collisions)}")
        # planted members sit at adjacent mid-frequency ranks
        if planted_units:
            ranks = np.unique(np.linspace(size // 20, size // 4, len(planted_units)).astype(int))
            if len(ranks) != len(planted_units):
                raise ConfigurationError("vocabulary too small to place every planted token at a distinct rank")
            for rank, unit in zip(ranks, planted_units):
                self.units[rank] = unit

        weights = 1.0 / np.arange(1, size + 1) ** config.zipf_exponent
        topic_of = rng.permutation(size) % config.topic_count
        self.topic_cumsum = []
        for topic in range(config.topic_count):
            boost = np.where(topic_of == topic, config.topic_focus, 1.0 - config.topic_focus)
            self.topic_cumsum.append(np.cumsum(weights * boost))

        self.collocates = np.empty((size, config.collocates), dtype=np.int64)
        for unit in range(size):
            cumsum = self.topic_cumsum[topic_of[unit]]
            self.collocates[unit] = self._draw(rng, cumsum, config.collocates)

        self.function_words = sorted(w for w in stopword_set if _WORD.fullmatch(w))
        function_weights = 1.0 / np.arange(1, len(self.function_words) + 1)
        function_cumsum = np.cumsum(function_weights)
        self.preferred_function = self._draw(rng, function_cumsum, size * 2).reshape(size, 2)

    @staticmethod
    def _draw(rng, cumsum, count):
        draws = rng.random(count) * cumsum[-1]
        return np.minimum(np.searchsorted(cumsum, draws, side="right"), len(cumsum) - 1)

    def document(self, rng):
        cfg = self.config
        length = int(rng.integers(cfg.min_length, cfg.max_length + 1))
        cumsum = self.topic_cumsum[int(rng.integers(cfg.topic_count))]
        topical = self._draw(rng, cumsum, length)
        follow = rng.random(length) < cfg.collocation_rate
        pick = rng.integers(cfg.collocates, size=length)
        function = rng.random(length) < cfg.stopword_rate
        function_pick = rng.integers(2, size=length)

        units = []
        previous = None
        for position in range(length):
            unit = self.collocates[previous, pick[position]] if previous is not None and follow[position] else topical[position]
            units.append(self.units[unit])
            if function[position]:
                units.append(self.function_words[self.preferred_function[unit, function_pick[position]]])
            previous = unit
        return units

    def documents(self, rng, count):
        return [self.document(rng) for _ in range(count)]


def _expand(units):
    tokens = []
    for unit in units:
        tokens.extend(unit.split(PHRASE_JOINER))
    return tokens


def generate(config, stopword_set=None):
    stopword_set = stopword_set or stopwords()
    config.validate(stopword_set)
    generator = TopicMixtureGenerator(config, stopword_set)

    source_units = generator.documents(derive_rng(config.seed, 1), config.documents)
    if config.independent_target:
        target_units = generator.documents(derive_rng(config.seed, 2), config.documents)
    else:
        order = derive_rng(config.seed, 3).permutation(config.documents)
        target_units = [source_units[index] for index in order]

    swap = {}
    for a, b in config.planted_pairs:
        swap[unit_name(a)] = unit_name(b)
        swap[unit_name(b)] = unit_name(a)
    target_units = [[swap.get(unit, unit) for unit in document] for document in target_units]

    fingerprint = config.fingerprint()

    def corpus(language_id, documents):
        provenance = CorpusProvenance(
            channels=(language_id,),
            extra={"synthetic": True, "synth_fingerprint": fingerprint, "seed": config.seed},
        )
        return Corpus(language_id, [_expand(document) for document in documents], provenance)

    source = corpus(config.source_id, source_units)
    target = corpus(config.target_id, target_units)

    planted = [(unit_name(a), unit_name(b)) for a, b in config.planted_pairs]
    planted_set = {token for pair in planted for token in pair}
    content_units = set(generator.units)
    present = sorted({unit for document in source_units for unit in document if unit in content_units})
    truth = GroundTruth(
        planted_pairs=planted,
        expected_self=[unit for unit in present if unit not in planted_set],
        source_id=config.source_id,
        target_id=config.target_id,
        config_fingerprint=fingerprint,
    )
    logger.info(
        "Generated synthetic pair %s/%s: %d tokens each, %d planted pairs",
        config.source_id, config.target_id, source.token_count, len(planted),
    )
    return source, target, truth


def evaluate_recovery(report, truth, false_rate_slice=FALSE_RATE_SLICE):
    fingerprint = report.config.get("synth_fingerprint")
    if fingerprint is not None and fingerprint != truth.config_fingerprint:
        raise ConsistencyError(
            f"report was produced on synthetic config {fingerprint}, ground truth is {truth.config_fingerprint}"
        )
    languages = {report.source_language, report.target_language}
    if languages != {truth.source_id, truth.target_id}:
        raise ConsistencyError(
            f"report languages {sorted(languages)} do not match ground truth "
            f"{sorted([truth.source_id, truth.target_id])}"
        )

    translations = {pair.source: pair.target for pair in report.misaligned_pairs}
    planted = truth.oriented_pairs(report.source_language)

    correct = sum(1 for a, b in planted if translations.get(a) == b)
    recovered = sum(1 for a, _ in planted if a in translations)
    recall = correct / len(planted) if planted else 1.0
    partner_precision = correct / recovered if recovered else 1.0

    planted_tokens = truth.planted_tokens
    head = [token for token in report.evaluated_tokens if token not in planted_tokens][:false_rate_slice]
    false_rate = sum(1 for token in head if token in translations) / len(head) if head else 0.0

    return RecoveryScores(recall, partner_precision, false_rate)
