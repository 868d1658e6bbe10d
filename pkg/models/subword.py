"""Character n-gram hashing for subword-enriched word vectors."""

from functools import lru_cache

BOW = "<"
EOW = ">"
_FNV_OFFSET = 2166136261
_FNV_PRIME = 16777619


def ft_hash(text):
    # 32-bit FNV-1a over the UTF-8 bytes, as fastText buckets n-grams
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFF
    return h


def compute_ngrams(word, min_n, max_n):
    padded = BOW + word + EOW
    ngrams = []
    for n in range(min_n, max_n + 1):
        for start in range(len(padded) - n + 1):
            ngrams.append(padded[start:start + n])
    return ngrams


@lru_cache(maxsize=200_000)
def ngram_buckets(word, min_n, max_n, bucket_count):
    if bucket_count <= 0:
        return ()
    return tuple(ft_hash(ngram) % bucket_count for ngram in compute_ngrams(word, min_n, max_n))
