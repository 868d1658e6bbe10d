"""Monolingual skip-gram embeddings trained with negative sampling.

Each corpus ("language") gets its own space. With subword features on, a word's
input representation is the mean of its own row and the rows of its hashed
character n-grams, so tokens never seen in training still get a vector.
"""

import json
import logging
import struct
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import expit
from sklearn.preprocessing import normalize
from tqdm import tqdm

from models.subword import ngram_buckets
from utils.exceptions import (
    ConfigurationError,
    EmbeddingFormatError,
    EmptyCorpusError,
    EmptyVocabularyError,
    UnknownTokenError,
)
from utils.log_control import progress_disabled
from utils.seed_control import derive_rng

logger = logging.getLogger(__name__)

SIDECAR_MAGIC = b"SGNSBKT1"
SIDECAR_SUFFIX = ".bin"
MIN_LR_FRACTION = 1e-4
BLOCK_TOKENS = 20_000


@dataclass
class TrainConfig:
    dimension: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_learning_rate: float = 0.05
    min_count: int = 5
    subword: bool = True
    min_n: int = 3
    max_n: int = 6
    bucket_count: int = 200_000
    sample: float = 1e-3
    batch_pairs: int = 128
    workers: int = 1
    deterministic: bool = True
    seed: int = 0

    def __post_init__(self):
        for name in ("dimension", "window", "negatives", "epochs", "min_count", "batch_pairs", "workers"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"training.{name} must be at least 1")
        if self.initial_learning_rate <= 0:
            raise ConfigurationError("training.initial_learning_rate must be positive")
        if self.subword:
            if self.min_n > self.max_n:
                raise ConfigurationError("training.min_n must not exceed training.max_n")
            if self.bucket_count < 1:
                raise ConfigurationError("training.bucket_count must be positive with subword on")

    @property
    def effective_workers(self):
        return 1 if self.deterministic else self.workers

    def to_dict(self):
        return asdict(self)


class SGNSGradients(NamedTuple):
    center: np.ndarray
    context: np.ndarray
    negatives: np.ndarray


def sgns_gradient(center_vec, context_vec, negative_vecs):
    """Loss and gradients of one SGNS event.

    loss = -log s(u_o . v_c) - sum_i log s(-u_ni . v_c)
    """
    center = np.asarray(center_vec, dtype=np.float64)
    context = np.asarray(context_vec, dtype=np.float64)
    negatives = np.atleast_2d(np.asarray(negative_vecs, dtype=np.float64))

    positive_score = center @ context
    negative_scores = negatives @ center
    loss = np.logaddexp(0.0, -positive_score) + np.logaddexp(0.0, negative_scores).sum()

    positive_coef = expit(positive_score) - 1.0
    negative_coef = expit(negative_scores)

    return float(loss), SGNSGradients(
        center=positive_coef * context + negative_coef @ negatives,
        context=positive_coef * center,
        negatives=negative_coef[:, None] * center[None, :],
    )


class EmbeddingSpace:

    def __init__(self, language_id, tokens, vectors, buckets=None, min_n=3, max_n=6, provenance=None):
        self.language_id = language_id
        self.tokens = list(tokens)
        self.vectors = np.asarray(vectors)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.tokens):
            raise EmbeddingFormatError(
                f"expected {len(self.tokens)} vectors, got array of shape {self.vectors.shape}"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise EmbeddingFormatError(f"space '{language_id}' has non-finite vector entries")
        self.buckets = None if buckets is None else np.asarray(buckets)
        if self.buckets is not None and self.buckets.shape[1] != self.vectors.shape[1]:
            raise EmbeddingFormatError("bucket table dimension differs from word vectors")
        self.min_n = min_n
        self.max_n = max_n
        self.provenance = dict(provenance or {})
        self.index = {token: row for row, token in enumerate(self.tokens)}
        self._unit = None

    @property
    def dimension(self):
        return self.vectors.shape[1]

    @property
    def subword(self):
        return self.buckets is not None

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    # -----------------------------
    # 1. VECTOR LOOKUP
    # -----------------------------
    def vector(self, token):
        row = self.index.get(token)
        if row is not None:
            return self.vectors[row]
        if self.buckets is None:
            return None
        buckets = ngram_buckets(token, self.min_n, self.max_n, len(self.buckets))
        if not buckets:
            return None
        return self.buckets[list(buckets)].mean(axis=0)

    def resolvable(self, token):
        return self.vector(token) is not None

    def require_vector(self, token):
        vec = self.vector(token)
        if vec is None:
            raise UnknownTokenError(token, self.language_id)
        return vec

    def unit_vectors(self):
        if self._unit is None:
            self._unit = normalize(self.vectors.astype(np.float64))
        return self._unit

    def cosine(self, first, second):
        a, b = self.require_vector(first), self.require_vector(second)
        norm = np.linalg.norm(a) * np.linalg.norm(b)
        if norm == 0:
            return 0.0
        return float(np.clip(a @ b / norm, -1.0, 1.0))

    # -----------------------------
    # 2. NEAREST NEIGHBORS
    # -----------------------------
    def neighbors(self, token, k):
        return self.neighbors_many([token], k)[0]

    def neighbors_many(self, tokens, k, chunk_size=512):
        if k < 1:
            raise ConfigurationError("k must be at least 1")
        queries = normalize(np.vstack([self.require_vector(token) for token in tokens]).astype(np.float64))
        unit = self.unit_vectors()

        ranked = []
        for start in range(0, len(tokens), chunk_size):
            sims = np.clip(queries[start:start + chunk_size] @ unit.T, -1.0, 1.0)
            for offset, row in enumerate(sims):
                query_token = tokens[start + offset]
                # stable sort: ties keep vocabulary order
                order = np.argsort(-row, kind="stable")
                neighbors = []
                for candidate in order:
                    if self.tokens[candidate] == query_token:
                        continue
                    neighbors.append((self.tokens[candidate], float(row[candidate])))
                    if len(neighbors) == k:
                        break
                ranked.append(neighbors)
        return ranked

    # -----------------------------
    # 3. PERSISTENCE
    # -----------------------------
    def save(self, path):
        path = Path(path)
        with open(path, "w", encoding="utf-8") as sink:
            sink.write(f"{len(self.tokens)} {self.dimension}\n")
            for token, row in zip(self.tokens, self.vectors):
                sink.write(token + " " + " ".join(f"{value:.6f}" for value in row) + "\n")

        header = {
            "language_id": self.language_id,
            "min_n": self.min_n,
            "max_n": self.max_n,
            "bucket_count": 0 if self.buckets is None else int(len(self.buckets)),
            "provenance": self.provenance,
        }
        encoded = json.dumps(header, sort_keys=True).encode("utf-8")
        with open(sidecar_path(path), "wb") as sink:
            sink.write(SIDECAR_MAGIC)
            sink.write(struct.pack("<Q", len(encoded)))
            sink.write(encoded)
            if self.buckets is not None:
                np.save(sink, self.buckets.astype(np.float32), allow_pickle=False)

    @classmethod
    def load(cls, path):
        path = Path(path)
        tokens, rows = [], []
        with open(path, "r", encoding="utf-8") as source:
            header = source.readline().split()
            if len(header) != 2 or not all(part.isdigit() for part in header):
                raise EmbeddingFormatError("header must be '<vocab_size> <dimension>'", 1)
            vocab_size, dimension = int(header[0]), int(header[1])
            for line_number, line in enumerate(source, start=2):
                parts = line.rstrip("\n").split(" ")
                if len(parts) - 1 != dimension:
                    raise EmbeddingFormatError(
                        f"expected {dimension} values for '{parts[0]}', found {len(parts) - 1}", line_number
                    )
                try:
                    rows.append([float(value) for value in parts[1:]])
                except ValueError as exc:
                    raise EmbeddingFormatError(f"non-numeric value: {exc}", line_number) from exc
                tokens.append(parts[0])
        if len(tokens) != vocab_size:
            raise EmbeddingFormatError(f"header declares {vocab_size} tokens, file has {len(tokens)}")

        vectors = np.array(rows, dtype=np.float64).reshape(len(rows), dimension)
        meta = {"language_id": path.stem, "min_n": 3, "max_n": 6, "provenance": {}}
        buckets = None
        sidecar = sidecar_path(path)
        if sidecar.exists():
            meta, buckets = _read_sidecar(sidecar, dimension)
        return cls(meta["language_id"], tokens, vectors, buckets, meta["min_n"], meta["max_n"], meta["provenance"])


def sidecar_path(path):
    return Path(str(path) + SIDECAR_SUFFIX)


def _read_sidecar(path, dimension):
    with open(path, "rb") as source:
        if source.read(len(SIDECAR_MAGIC)) != SIDECAR_MAGIC:
            raise EmbeddingFormatError(f"{path} is not an embedding sidecar (bad magic)")
        (length,) = struct.unpack("<Q", source.read(8))
        meta = json.loads(source.read(length).decode("utf-8"))
        buckets = None
        if meta.get("bucket_count"):
            buckets = np.load(source, allow_pickle=False)
            if buckets.shape != (meta["bucket_count"], dimension):
                raise EmbeddingFormatError(
                    f"bucket table shape {buckets.shape} does not match "
                    f"({meta['bucket_count']}, {dimension})"
                )
    return meta, buckets


class SkipGramTrainer:

    def __init__(self, config):
        self.config = config
        self._progress_lock = threading.Lock()

    # -----------------------------
    # 1. VOCABULARY AND TABLES
    # -----------------------------
    def build_vocab(self, corpus):
        counts = corpus.token_counts()
        kept = sorted(
            ((token, count) for token, count in counts.items() if count >= self.config.min_count),
            key=lambda item: (-item[1], item[0]),
        )
        if not kept:
            raise EmptyVocabularyError(
                f"no token in '{corpus.language_id}' occurs at least {self.config.min_count} times"
            )
        self.tokens = [token for token, _ in kept]
        self.counts = np.array([count for _, count in kept], dtype=np.float64)
        self.index = {token: row for row, token in enumerate(self.tokens)}

    def _init_tables(self, rng):
        cfg = self.config
        vocab_size = len(self.tokens)
        bucket_rows = cfg.bucket_count if cfg.subword else 0

        bound = 0.5 / cfg.dimension
        self.input = rng.uniform(-bound, bound, size=(vocab_size + bucket_rows, cfg.dimension)).astype(np.float32)
        self.output = np.zeros((vocab_size, cfg.dimension), dtype=np.float32)

        member_rows = []
        for row, token in enumerate(self.tokens):
            rows = [row]
            if cfg.subword:
                rows.extend(vocab_size + b for b in ngram_buckets(token, cfg.min_n, cfg.max_n, cfg.bucket_count))
            member_rows.append(rows)
        width = max(len(rows) for rows in member_rows)
        self.rows = np.full((vocab_size, width), -1, dtype=np.int64)
        for row, rows in enumerate(member_rows):
            self.rows[row, :len(rows)] = rows
        self.row_counts = (self.rows >= 0).sum(axis=1).astype(np.float32)

        total = self.counts.sum()
        if cfg.sample > 0:
            threshold = cfg.sample * total
            self.keep_prob = np.minimum((np.sqrt(self.counts / threshold) + 1.0) * threshold / self.counts, 1.0)
        else:
            self.keep_prob = None
        self.noise_cumsum = np.cumsum(self.counts ** 0.75)

    def _sample_negatives(self, rng, shape):
        draws = rng.random(shape) * self.noise_cumsum[-1]
        return np.minimum(np.searchsorted(self.noise_cumsum, draws, side="right"), len(self.tokens) - 1)

    # -----------------------------
    # 2. TRAINING EVENTS
    # -----------------------------
    def _window_pairs(self, ids, doc_of, rng):
        spans = rng.integers(1, self.config.window + 1, size=len(ids))
        centers, contexts = [], []
        for offset in range(1, self.config.window + 1):
            if offset >= len(ids):
                break
            same_doc = doc_of[:-offset] == doc_of[offset:]
            right = np.nonzero(same_doc & (spans[:-offset] >= offset))[0]
            centers.append(ids[right])
            contexts.append(ids[right + offset])
            left = np.nonzero(same_doc & (spans[offset:] >= offset))[0] + offset
            centers.append(ids[left])
            contexts.append(ids[left - offset])
        if not centers:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        centers = np.concatenate(centers)
        contexts = np.concatenate(contexts)
        order = rng.permutation(len(centers))
        return centers[order], contexts[order]

    def _learning_rate(self):
        fraction = self._words_done / self._total_work
        return self.config.initial_learning_rate * max(1.0 - fraction, MIN_LR_FRACTION)

    def _train_batch(self, centers, contexts, lr, rng):
        cfg = self.config
        rows = self.rows[centers]
        mask = rows >= 0
        safe_rows = np.where(mask, rows, 0)
        inv_counts = 1.0 / self.row_counts[centers]

        hidden = (self.input[safe_rows] * mask[..., None]).sum(axis=1) * inv_counts[:, None]
        negatives = self._sample_negatives(rng, (len(centers), cfg.negatives))
        u_pos = self.output[contexts]
        u_neg = self.output[negatives]

        pos_dot = np.einsum("bd,bd->b", hidden, u_pos)
        neg_dot = np.einsum("bd,bkd->bk", hidden, u_neg)
        loss = np.logaddexp(0.0, -pos_dot).sum() + np.logaddexp(0.0, neg_dot).sum()

        pos_coef = expit(pos_dot) - 1.0
        neg_coef = expit(neg_dot)
        grad_hidden = pos_coef[:, None] * u_pos + np.einsum("bk,bkd->bd", neg_coef, u_neg)

        np.add.at(self.output, contexts, (-lr * pos_coef[:, None] * hidden).astype(np.float32))
        np.add.at(
            self.output,
            negatives.ravel(),
            (-lr * neg_coef[..., None] * hidden[:, None, :]).reshape(-1, cfg.dimension).astype(np.float32),
        )
        share = (-lr * grad_hidden * inv_counts[:, None]).astype(np.float32)
        batch_index = np.nonzero(mask)[0]
        np.add.at(self.input, rows[mask], share[batch_index])
        return float(loss)

    def _train_block(self, block, rng):
        ids = np.concatenate(block)
        doc_of = np.repeat(np.arange(len(block)), [len(doc) for doc in block])
        with self._progress_lock:
            self._words_done += len(ids)
        if self.keep_prob is not None:
            keep = rng.random(len(ids)) < self.keep_prob[ids]
            ids, doc_of = ids[keep], doc_of[keep]

        centers, contexts = self._window_pairs(ids, doc_of, rng)
        loss, pairs = 0.0, len(centers)
        lr = self._learning_rate()
        for start in range(0, pairs, self.config.batch_pairs):
            stop = start + self.config.batch_pairs
            loss += self._train_batch(centers[start:stop], contexts[start:stop], lr, rng)
        return loss, pairs

    def _train_shard(self, documents, rng):
        loss, pairs = 0.0, 0
        block, block_tokens = [], 0
        for ids in documents:
            block.append(ids)
            block_tokens += len(ids)
            if block_tokens >= BLOCK_TOKENS:
                block_loss, block_pairs = self._train_block(block, rng)
                loss, pairs = loss + block_loss, pairs + block_pairs
                block, block_tokens = [], 0
        if block:
            block_loss, block_pairs = self._train_block(block, rng)
            loss, pairs = loss + block_loss, pairs + block_pairs
        return loss, pairs

    # -----------------------------
    # 3. EPOCH LOOP
    # -----------------------------
    def train(self, corpus):
        cfg = self.config
        if corpus.token_count == 0:
            raise EmptyCorpusError(f"corpus '{corpus.language_id}' is empty")

        self.build_vocab(corpus)
        rng = derive_rng(cfg.seed, 0)
        self._init_tables(rng)

        documents = []
        for document in corpus.documents:
            ids = np.array([self.index[t] for t in document if t in self.index], dtype=np.int64)
            if len(ids):
                documents.append(ids)

        workers = cfg.effective_workers
        self._words_done = 0
        self._total_work = max(cfg.epochs * sum(len(ids) for ids in documents), 1)
        logger.info(
            "Training '%s': %d words, %d tokens, dim %d, subword %s, %d worker(s)",
            corpus.language_id, len(self.tokens), corpus.token_count, cfg.dimension,
            "on" if cfg.subword else "off", workers,
        )

        epoch_losses = []
        for epoch in tqdm(range(cfg.epochs), desc=f"train {corpus.language_id}", disable=progress_disabled(logger)):
            if workers == 1:
                loss, pairs = self._train_shard(documents, derive_rng(cfg.seed, 1, epoch))
            else:
                # shared tables, no locking: lost updates are tolerated in fast mode
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    futures = [
                        pool.submit(self._train_shard, documents[w::workers], derive_rng(cfg.seed, 1, epoch, w))
                        for w in range(workers)
                    ]
                    outcomes = [future.result() for future in futures]
                loss = sum(o[0] for o in outcomes)
                pairs = sum(o[1] for o in outcomes)
            epoch_losses.append(loss / max(pairs, 1))
            logger.info("Epoch %d/%d for '%s': mean loss %.5f over %d pairs",
                        epoch + 1, cfg.epochs, corpus.language_id, epoch_losses[-1], pairs)

        return self._export(corpus, epoch_losses)

    def _export(self, corpus, epoch_losses):
        cfg = self.config
        mask = self.rows >= 0
        safe_rows = np.where(mask, self.rows, 0)
        vectors = (self.input[safe_rows] * mask[..., None]).sum(axis=1) / self.row_counts[:, None]
        buckets = self.input[len(self.tokens):].copy() if cfg.subword else None
        provenance = {
            "config": cfg.to_dict(),
            "corpus_token_count": corpus.token_count,
            "seed": cfg.seed,
            "epoch_losses": epoch_losses,
        }
        return EmbeddingSpace(corpus.language_id, self.tokens, vectors, buckets, cfg.min_n, cfg.max_n, provenance)


def train(corpus, config):
    return SkipGramTrainer(config).train(corpus)
