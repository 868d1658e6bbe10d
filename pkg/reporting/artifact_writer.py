"""Result artifacts stamped with reproducibility provenance.

Every JSON artifact carries a top-level ``provenance`` object and every CSV
starts with one ``# provenance {...}`` comment line. Provenance holds the
config fingerprint, the seed and the tool version; it never holds timestamps,
so reruns with the same inputs produce byte-identical files.
"""

import json
import logging
import os
from pathlib import Path

import numpy as np
import pandas as pd

from utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

TOOL_NAME = "corpus-divergence"
TOOL_VERSION = "1.0.0"
PROVENANCE_PREFIX = "# provenance "
LOCK_NAME = ".divergence.lock"


def provenance(config_hash, seed, **extra):
    header = {"tool": TOOL_NAME, "version": TOOL_VERSION, "config_hash": config_hash, "seed": seed}
    header.update(extra)
    return header


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and np.isnan(value):
        return None
    return value


def write_json(path, payload, header):
    document = {"provenance": header}
    document.update(_jsonable(payload))
    with open(path, "w", encoding="utf-8") as sink:
        json.dump(document, sink, indent=2, sort_keys=True)
        sink.write("\n")
    logger.info("Wrote %s", path)
    return Path(path)


def read_json(path):
    with open(path, "r", encoding="utf-8") as source:
        return json.load(source)


def write_csv(path, frame, header, index=False):
    with open(path, "w", encoding="utf-8", newline="") as sink:
        sink.write(PROVENANCE_PREFIX + json.dumps(header, sort_keys=True) + "\n")
        frame.to_csv(sink, index=index, float_format="%.6f", lineterminator="\n")
    logger.info("Wrote %s", path)
    return Path(path)


def read_csv(path, **kwargs):
    with open(path, "r", encoding="utf-8") as source:
        first = source.readline()
        header = json.loads(first[len(PROVENANCE_PREFIX):]) if first.startswith(PROVENANCE_PREFIX) else None
        if header is None:
            source.seek(0)
        frame = pd.read_csv(source, **kwargs)
    return header, frame


def write_matrix(path, matrix, header):
    """Square language matrix; rows are sources, columns targets, diagonal empty."""
    frame = matrix.copy()
    frame.index.name = "source"
    return write_csv(path, frame, header, index=True)


def write_misaligned(path, pairs, header):
    frame = pd.DataFrame(
        [(p.source, p.target, p.score, p.margin) for p in pairs],
        columns=["source", "target", "score", "margin"],
    )
    return write_csv(path, frame, header)


class OutputLock:
    """Exclusive ``<out>/.divergence.lock`` held while a command writes."""

    def __init__(self, output_dir):
        self.output_dir = Path(output_dir)
        self.path = self.output_dir / LOCK_NAME
        self._held = False

    def __enter__(self):
        self.output_dir.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as exc:
            raise ConfigurationError(
                f"output directory {self.output_dir} is locked by another writer ({self.path})"
            ) from exc
        with os.fdopen(fd, "w") as handle:
            handle.write(str(os.getpid()))
        self._held = True
        return self

    def __exit__(self, exc_type, exc, tb):
        if self._held:
            self.path.unlink(missing_ok=True)
            self._held = False
        return False
