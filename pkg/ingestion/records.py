"""Line-delimited JSON records for comments and videos."""

import json
import logging
from dataclasses import asdict, dataclass
from typing import Optional

from utils.exceptions import ConfigurationError, ParseFailureError

logger = logging.getLogger(__name__)

DEFAULT_MAX_ERROR_FRACTION = 0.01


@dataclass(frozen=True)
class CommentRecord:
    comment_id: str
    video_id: str
    channel_id: str
    user_id: str
    posted_at: int
    text: str
    is_reply: bool
    parent_id: Optional[str] = None

    def to_dict(self):
        data = asdict(self)
        if self.parent_id is None:
            del data["parent_id"]
        return data


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    channel_id: str
    uploaded_at: int
    like_count: int
    dislike_count: int

    def to_dict(self):
        return asdict(self)


def _require(raw, name, kind):
    if name not in raw:
        raise ValueError(f"missing field '{name}'")
    value = raw[name]
    # bool is a subclass of int; counts and timestamps must not accept it
    if kind is int and isinstance(value, bool):
        raise ValueError(f"field '{name}' must be an integer")
    if not isinstance(value, kind):
        raise ValueError(f"field '{name}' must be {kind.__name__}")
    return value


def _require_object(raw):
    if not isinstance(raw, dict):
        raise ValueError(f"expected a JSON object, got {type(raw).__name__}")


def comment_from_dict(raw):
    _require_object(raw)
    parent_id = raw.get("parent_id")
    if parent_id is not None and not isinstance(parent_id, str):
        raise ValueError("field 'parent_id' must be a string")
    record = CommentRecord(
        comment_id=_require(raw, "comment_id", str),
        video_id=_require(raw, "video_id", str),
        channel_id=_require(raw, "channel_id", str),
        user_id=_require(raw, "user_id", str),
        posted_at=_require(raw, "posted_at", int),
        text=_require(raw, "text", str),
        is_reply=_require(raw, "is_reply", bool),
        parent_id=parent_id,
    )
    if not record.comment_id:
        raise ValueError("comment_id is empty")
    if record.posted_at < 0:
        raise ValueError("posted_at is negative")
    if record.is_reply != (record.parent_id is not None):
        raise ValueError("is_reply must be true exactly when parent_id is present")
    return record


def video_from_dict(raw):
    _require_object(raw)
    record = VideoRecord(
        video_id=_require(raw, "video_id", str),
        channel_id=_require(raw, "channel_id", str),
        uploaded_at=_require(raw, "uploaded_at", int),
        like_count=_require(raw, "like_count", int),
        dislike_count=_require(raw, "dislike_count", int),
    )
    if not record.video_id:
        raise ValueError("video_id is empty")
    if record.like_count < 0 or record.dislike_count < 0:
        raise ValueError("like/dislike counts must be nonnegative")
    if record.uploaded_at < 0:
        raise ValueError("uploaded_at is negative")
    return record


_FACTORIES = {
    "comments": (comment_from_dict, "comment_id"),
    "videos": (video_from_dict, "video_id"),
}


class RecordParser:

    def __init__(self, max_error_fraction=DEFAULT_MAX_ERROR_FRACTION):
        self.max_error_fraction = max_error_fraction
        self.errors = []
        self.total_lines = 0

    def parse(self, stream, kind):
        if kind not in _FACTORIES:
            raise ConfigurationError(f"unknown record kind '{kind}'")
        factory, id_field = _FACTORIES[kind]

        self.errors = []
        self.total_lines = 0
        records = []
        seen_ids = set()

        for line_number, raw_line in enumerate(stream, start=1):
            if isinstance(raw_line, bytes):
                raw_line = raw_line.decode("utf-8", errors="replace")
            if not raw_line.strip():
                continue
            self.total_lines += 1
            try:
                payload = json.loads(raw_line)
                if not isinstance(payload, dict):
                    raise ValueError("line is not a JSON object")
                record = factory(payload)
                record_id = getattr(record, id_field)
                if record_id in seen_ids:
                    raise ValueError(f"duplicate {id_field} '{record_id}'")
            except ValueError as exc:
                # json.JSONDecodeError is a ValueError
                self.errors.append((line_number, str(exc)))
                logger.warning("Malformed %s record on line %d: %s", kind, line_number, exc)
                continue
            seen_ids.add(record_id)
            records.append(record)

        self._check_error_rate(kind)
        logger.info("Parsed %d %s records (%d malformed)", len(records), kind, len(self.errors))
        return records

    def _check_error_rate(self, kind):
        if not self.errors:
            return
        fraction = len(self.errors) / self.total_lines
        if fraction > self.max_error_fraction:
            lines = [line for line, _ in self.errors]
            shown = ", ".join(str(line) for line in lines[:20])
            raise ParseFailureError(
                f"{len(self.errors)} of {self.total_lines} {kind} lines malformed "
                f"({fraction:.2%} > {self.max_error_fraction:.2%}); lines: {shown}",
                line_numbers=lines,
            )


def parse_records(stream, kind, max_error_fraction=DEFAULT_MAX_ERROR_FRACTION):
    return RecordParser(max_error_fraction).parse(stream, kind)


def read_records(path, kind, max_error_fraction=DEFAULT_MAX_ERROR_FRACTION):
    with open(path, "rb") as stream:
        return parse_records(stream, kind, max_error_fraction)


def write_records(records, path):
    with open(path, "w", encoding="utf-8") as sink:
        for record in records:
            sink.write(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True))
            sink.write("\n")
