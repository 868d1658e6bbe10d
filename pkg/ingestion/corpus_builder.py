"""Channel corpora: user assignment, corpus construction and token balancing."""

import json
import logging
import re
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ingestion.preprocess import preprocess_text
from utils.exceptions import BalanceFailureError, ConfigurationError, EmptyCorpusError

logger = logging.getLogger(__name__)

UNASSIGNED = None
BALANCE_TOLERANCE = 0.005
TOKEN_PATTERN = re.compile(r"[a-z0-9]+(_[a-z0-9]+)*")


@dataclass(frozen=True)
class Period:
    """Half-open UTC range [start, end) in epoch seconds."""

    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ConfigurationError(f"period start {self.start} is after end {self.end}")

    def __contains__(self, timestamp):
        return self.start <= timestamp < self.end

    @classmethod
    def from_dates(cls, start, end):
        def to_seconds(day):
            parsed = datetime.strptime(day, "%Y-%m-%d").replace(tzinfo=timezone.utc)
            return int(parsed.timestamp())
        return cls(to_seconds(start), to_seconds(end))

    @classmethod
    def for_year(cls, year):
        return cls.from_dates(f"{year}-01-01", f"{year + 1}-01-01")

    @classmethod
    def unbounded(cls):
        return cls(0, 2 ** 63 - 1)

    def describe(self):
        return {"start": self.start, "end": self.end}


@dataclass
class CorpusProvenance:
    period: Optional[dict] = None
    channels: Tuple[str, ...] = ()
    user_filter: bool = False
    include_replies: bool = False
    balance_seed: Optional[int] = None
    extra: Dict[str, object] = field(default_factory=dict)

    def to_dict(self):
        data = asdict(self)
        data["channels"] = list(self.channels)
        return data

    @classmethod
    def from_dict(cls, raw):
        raw = dict(raw)
        raw["channels"] = tuple(raw.get("channels", ()))
        return cls(**raw)


@dataclass
class Corpus:
    language_id: str
    documents: List[List[str]]
    provenance: CorpusProvenance = field(default_factory=CorpusProvenance)

    @property
    def token_count(self):
        return sum(len(document) for document in self.documents)

    def __len__(self):
        return len(self.documents)

    def validate(self):
        for number, document in enumerate(self.documents):
            for token in document:
                if not TOKEN_PATTERN.fullmatch(token):
                    raise ConfigurationError(
                        f"corpus '{self.language_id}' document {number} has invalid token '{token}'"
                    )

    def token_counts(self):
        counts = Counter()
        for document in self.documents:
            counts.update(document)
        return counts

    def save(self, path):
        with open(path, "w", encoding="utf-8") as sink:
            header = {"language_id": self.language_id, "provenance": self.provenance.to_dict()}
            sink.write("# " + json.dumps(header, sort_keys=True) + "\n")
            for document in self.documents:
                sink.write(" ".join(document) + "\n")

    @classmethod
    def load(cls, path, language_id=None):
        documents = []
        header = {}
        with open(path, "r", encoding="utf-8") as source:
            for line_number, line in enumerate(source):
                if line_number == 0 and line.startswith("#"):
                    header = json.loads(line[1:])
                    continue
                tokens = line.split()
                if tokens:
                    documents.append(tokens)
        provenance = CorpusProvenance.from_dict(header.get("provenance", {}))
        language_id = language_id or header.get("language_id") or Path(path).stem
        corpus = cls(language_id, documents, provenance)
        corpus.validate()
        return corpus


@dataclass
class UserAssignment:
    assignments: Dict[str, Optional[str]]
    counts: Dict[str, Dict[str, int]]

    def channel_of(self, user_id):
        return self.assignments.get(user_id, UNASSIGNED)

    def summary(self):
        tally = Counter(self.assignments.values())
        return {("unassigned" if key is None else key): value for key, value in tally.items()}


def assign_users(comments, channels, period):
    channels = tuple(channels)
    if not channels:
        raise ConfigurationError("assign_users needs at least one channel")
    channel_set = set(channels)

    counts = defaultdict(lambda: {channel: 0 for channel in channels})
    for comment in comments:
        if comment.channel_id in channel_set and comment.posted_at in period:
            counts[comment.user_id][comment.channel_id] += 1

    assignments = {}
    for user_id, per_channel in counts.items():
        ranked = sorted(per_channel.values(), reverse=True)
        best = max(per_channel, key=per_channel.get)
        # strict majority over every other channel; ties stay unassigned
        if ranked[0] > 0 and (len(ranked) == 1 or ranked[0] > ranked[1]):
            assignments[user_id] = best
        else:
            assignments[user_id] = UNASSIGNED

    logger.info("Assigned users over %s: %s", ",".join(channels), dict(Counter(assignments.values())))
    return UserAssignment(assignments=assignments, counts={u: dict(c) for u, c in counts.items()})


def build_corpus(comments, channel, period, assignment=None, include_replies=False):
    documents = []
    for comment in comments:
        if comment.channel_id != channel or comment.posted_at not in period:
            continue
        if not include_replies and comment.is_reply:
            continue
        if assignment is not None and assignment.channel_of(comment.user_id) != channel:
            continue
        tokens = preprocess_text(comment.text)
        if tokens:
            documents.append(tokens)

    if not documents:
        raise EmptyCorpusError(f"no documents for channel '{channel}' in the requested period")

    provenance = CorpusProvenance(
        period=period.describe(),
        channels=tuple(sorted(assignment_channels(assignment) or {channel})),
        user_filter=assignment is not None,
        include_replies=include_replies,
    )
    corpus = Corpus(channel, documents, provenance)
    logger.info("Built corpus '%s': %d documents, %d tokens", channel, len(documents), corpus.token_count)
    return corpus


def assignment_channels(assignment):
    if assignment is None:
        return None
    channels = set()
    for per_channel in assignment.counts.values():
        channels.update(per_channel)
    return channels


def _greedy_fill(lengths, lower, upper, rng):
    kept = []
    total = 0
    for index in rng.permutation(len(lengths)):
        if total + lengths[index] <= upper:
            kept.append(index)
            total += lengths[index]
            if total >= lower:
                break
    return kept, total


def _exact_fill(lengths, lower, upper, rng):
    """Bounded subset sum over document lengths, or None when no subset lands in [lower, upper].

    Documents of equal length are grouped in binary-split bundles; parent[s]
    holds the bundle that first made total s reachable.
    """
    lower, upper = int(np.ceil(lower)), int(np.floor(upper))
    by_length = defaultdict(list)
    for index in rng.permutation(len(lengths)):
        if lengths[index] <= upper:
            by_length[int(lengths[index])].append(int(index))

    bundles = []
    for length, indices in by_length.items():
        start, size = 0, 1
        while start < len(indices):
            members = indices[start:start + size]
            if length * len(members) <= upper:
                bundles.append((length * len(members), members))
            start += size
            size *= 2

    reachable = np.zeros(upper + 1, dtype=bool)
    reachable[0] = True
    parent = np.full(upper + 1, -1, dtype=np.int64)
    for bundle in rng.permutation(len(bundles)):
        weight = bundles[bundle][0]
        fresh = np.zeros_like(reachable)
        fresh[weight:] = reachable[:upper + 1 - weight]
        fresh &= ~reachable
        hits = np.flatnonzero(fresh)
        if hits.size == 0:
            continue
        parent[hits] = bundle
        reachable[hits] = True

        window = np.flatnonzero(reachable[lower:])
        if window.size:
            total = lower + int(window[0])
            kept = []
            while total > 0:
                weight, members = bundles[parent[total]]
                kept.extend(members)
                total -= weight
            return kept
    return None


def _downsample(corpus, target, tolerance, rng):
    lengths = np.array([len(document) for document in corpus.documents])
    upper = target * (1 + tolerance)
    lower = target * (1 - tolerance)

    kept, total = _greedy_fill(lengths, lower, upper, rng)
    if total < lower:
        logger.info("Random fill of '%s' stopped at %d tokens; searching exact subsets", corpus.language_id, total)
        kept = _exact_fill(lengths, lower, upper, rng)
    if kept is None:
        raise BalanceFailureError(
            f"corpus '{corpus.language_id}' cannot reach {target} tokens (±{tolerance:.1%}) "
            f"by whole-document removal; closest random fill is {total}",
            corpus.language_id,
        )
    # original document order is kept
    documents = [corpus.documents[index] for index in sorted(kept)]
    return documents


def token_balance(corpora, seed, tolerance=BALANCE_TOLERANCE):
    corpora = list(corpora)
    if len(corpora) < 2:
        raise ConfigurationError("token_balance needs at least two corpora")
    for corpus in corpora:
        if corpus.token_count == 0:
            raise EmptyCorpusError(f"corpus '{corpus.language_id}' is empty")

    target = min(corpus.token_count for corpus in corpora)
    rng = np.random.default_rng(seed)

    balanced = []
    for corpus in corpora:
        provenance = replace(corpus.provenance, balance_seed=seed)
        if corpus.token_count <= target * (1 + tolerance):
            balanced.append(Corpus(corpus.language_id, corpus.documents, provenance))
            continue
        documents = _downsample(corpus, target, tolerance, rng)
        balanced.append(Corpus(corpus.language_id, documents, provenance))

    logger.info(
        "Balanced %d corpora to ~%d tokens: %s",
        len(balanced), target, {c.language_id: c.token_count for c in balanced},
    )
    return balanced
