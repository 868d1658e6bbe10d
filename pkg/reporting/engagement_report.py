"""Viewership disagreement and commenter-loyalty breakdowns."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ingestion.corpus_builder import Period
from utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

MIN_VIDEOS_PER_MONTH = 10


@dataclass
class DisagreementSeries:
    channel_id: str
    entries: List[Tuple[str, float, int]] = field(default_factory=list)
    undefined_count: int = 0

    def to_frame(self):
        return pd.DataFrame(self.entries, columns=["month", "value", "count"])

    def to_dict(self):
        return {
            "channel_id": self.channel_id,
            "entries": [{"month": m, "value": v, "count": c} for m, v, c in self.entries],
            "undefined_count": self.undefined_count,
        }


@dataclass
class CommentShareBreakdown:
    year: int
    counts: Dict[str, int]
    shares: Dict[str, float]

    @property
    def total(self):
        return sum(self.counts.values())

    def to_frame(self):
        return pd.DataFrame(
            [(name, count, self.shares[name]) for name, count in self.counts.items()],
            columns=["category", "count", "share"],
        )

    def to_dict(self):
        return {"year": self.year, "counts": dict(self.counts), "shares": dict(self.shares)}


def share_categories(channel_a, channel_b):
    return [
        f"{channel_a}_sole^{channel_a}",
        f"{channel_b}_sole^{channel_b}",
        f"{channel_a}_maj^{channel_a}",
        f"{channel_a}_maj^{channel_b}",
        f"{channel_b}_maj^{channel_a}",
        f"{channel_b}_maj^{channel_b}",
        "equal",
    ]


def _month_keys(timestamps):
    stamps = pd.to_datetime(pd.Series(timestamps, dtype="int64"), unit="s", utc=True)
    return stamps.dt.strftime("%Y-%m")


# -----------------------------
# 1. DISAGREEMENT FACTOR
# -----------------------------
def disagreement(video) -> Optional[float]:
    total = video.like_count + video.dislike_count
    if total == 0:
        return None
    return video.dislike_count / total


def monthly_series(videos, channel, period=None, min_videos=MIN_VIDEOS_PER_MONTH):
    period = period or Period.unbounded()
    selected = [v for v in videos if v.channel_id == channel and v.uploaded_at in period]
    if not selected:
        logger.warning("No uploads for channel '%s' in %s", channel, period.describe())
        return DisagreementSeries(channel)

    values = [disagreement(v) for v in selected]
    frame = pd.DataFrame({
        "month": _month_keys([v.uploaded_at for v in selected]),
        "value": [np.nan if value is None else value for value in values],
    })
    undefined = int(frame["value"].isna().sum())
    grouped = frame.groupby("month", sort=True).agg(value=("value", "mean"), count=("value", "size"))

    entries = []
    for month, row in grouped.iterrows():
        if row["count"] < min_videos:
            continue
        if np.isnan(row["value"]):
            logger.warning("Month %s of '%s' has no video with likes or dislikes; omitted", month, channel)
            continue
        entries.append((month, float(row["value"]), int(row["count"])))

    if undefined:
        logger.info("Excluded %d zero-engagement uploads of '%s'", undefined, channel)
    logger.info("Disagreement series for '%s': %d of %d months kept", channel, len(entries), len(grouped))
    return DisagreementSeries(channel, entries, undefined)


# -----------------------------
# 2. COMMENT ACTIVITY
# -----------------------------
def monthly_comment_volume(comments, channel, period=None):
    period = period or Period.unbounded()
    stamps = [c.posted_at for c in comments if c.channel_id == channel and c.posted_at in period]
    if not stamps:
        return pd.DataFrame(columns=["month", "count"])
    counts = _month_keys(stamps).value_counts().sort_index()
    return pd.DataFrame({"month": counts.index, "count": counts.values.astype(int)})


def comment_share(comments, channels, year):
    channel_a, channel_b = channels
    if channel_a == channel_b:
        raise ConfigurationError("comment_share needs two distinct channels")
    period = Period.for_year(year)
    names = share_categories(channel_a, channel_b)

    rows = [(c.user_id, c.channel_id) for c in comments
            if c.channel_id in (channel_a, channel_b) and c.posted_at in period]
    if not rows:
        return CommentShareBreakdown(year, dict.fromkeys(names, 0), dict.fromkeys(names, 0.0))

    frame = pd.DataFrame(rows, columns=["user_id", "channel_id"])
    per_user = pd.crosstab(frame["user_id"], frame["channel_id"])
    per_user = per_user.reindex(columns=[channel_a, channel_b], fill_value=0)
    u_a = frame["user_id"].map(per_user[channel_a])
    u_b = frame["user_id"].map(per_user[channel_b])
    on_a = frame["channel_id"] == channel_a

    conditions = [
        (u_b == 0),
        (u_a == 0),
        (u_b > 0) & (u_a > u_b) & on_a,
        (u_b > 0) & (u_a > u_b) & ~on_a,
        (u_a > 0) & (u_b > u_a) & on_a,
        (u_a > 0) & (u_b > u_a) & ~on_a,
        (u_a == u_b),
    ]
    category = np.select(conditions, names, default="")
    counts = {name: int((category == name).sum()) for name in names}
    total = len(frame)
    shares = {name: counts[name] / total for name in names}
    logger.info("Comment share %s/%s in %d over %d comments", channel_a, channel_b, year, total)
    return CommentShareBreakdown(year, counts, shares)


class EngagementReport:

    def __init__(self, videos, comments=None, min_videos=MIN_VIDEOS_PER_MONTH):
        self.videos = list(videos)
        self.comments = list(comments or [])
        self.min_videos = min_videos

    def series(self, channel, period=None):
        return monthly_series(self.videos, channel, period, self.min_videos)

    def share(self, channels, year):
        return comment_share(self.comments, channels, year)

    def summary(self, channels, period=None):
        out = {}
        for channel in channels:
            series = self.series(channel, period)
            values = [value for _, value, _ in series.entries]
            out[channel] = {
                "months": len(series.entries),
                "mean_disagreement": float(np.mean(values)) if values else None,
                "undefined_videos": series.undefined_count,
            }
        return out
