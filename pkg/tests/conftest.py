import json

import numpy as np
import pytest

from experiments.synthgen import SynthConfig, generate
from ingestion.corpus_builder import Corpus
from ingestion.records import CommentRecord, VideoRecord
from models.embedding import EmbeddingSpace, TrainConfig
from models.vocabulary import stopwords
from utils.config_loader import PipelineConfig


@pytest.fixture(scope="session")
def stopword_set():
    return stopwords()


@pytest.fixture
def small_train_config():
    return TrainConfig(
        dimension=16, window=2, negatives=3, epochs=2, min_count=1,
        subword=False, sample=0.0, batch_pairs=16, seed=0,
    )


@pytest.fixture
def make_comment():
    counter = iter(range(1, 1_000_000))

    def factory(user_id="u1", channel_id="cnn", posted_at=1_580_515_200, text="the news today",
                is_reply=False, comment_id=None, video_id="v1"):
        return CommentRecord(
            comment_id=comment_id or f"c{next(counter)}",
            video_id=video_id,
            channel_id=channel_id,
            user_id=user_id,
            posted_at=posted_at,
            text=text,
            is_reply=is_reply,
            parent_id="c0" if is_reply else None,
        )
    return factory


@pytest.fixture
def make_video():
    counter = iter(range(1, 1_000_000))

    def factory(likes, dislikes, channel_id="cnn", uploaded_at=1_580_515_200):
        return VideoRecord(f"v{next(counter)}", channel_id, uploaded_at, likes, dislikes)
    return factory


@pytest.fixture
def comment_line():
    def render(**overrides):
        record = {
            "comment_id": "c1", "video_id": "v1", "channel_id": "cnn", "user_id": "u1",
            "posted_at": 1580515200, "text": "hello", "is_reply": False,
        }
        record.update(overrides)
        return json.dumps(record)
    return render


@pytest.fixture(scope="session")
def synthetic_pair():
    """Small planted-swap corpus pair shared by the pipeline-level tests."""
    config = SynthConfig(
        vocabulary_size=80, topic_count=4, documents=400, planted_pairs=[("aleph", "beth")], seed=3,
    )
    source, target, truth = generate(config)
    return source, target, truth, config


@pytest.fixture
def random_space():
    def factory(tokens, dimension=8, seed=0, language_id="a"):
        rng = np.random.default_rng(seed)
        return EmbeddingSpace(language_id, tokens, rng.normal(size=(len(tokens), dimension)))
    return factory


@pytest.fixture
def toy_corpus():
    def factory(documents, language_id="a"):
        return Corpus(language_id, [document.split() for document in documents])
    return factory


@pytest.fixture
def pipeline_config(tmp_path):
    return PipelineConfig.from_dict({
        "training": {
            "dimension": 16, "window": 2, "negatives": 3, "epochs": 2, "min_count": 1,
            "subword": False, "sample": 0.0, "batch_pairs": 16,
        },
        "vocab": {"source_size": 20, "target_size": 40},
        "evaluation": {"neighborhood_k": 5, "max_snippets": 2, "sweep_sizes": [10, 20]},
        "output_dir": str(tmp_path / "results"),
        "random_seed": 0,
    })
