"""Candidate generation: keyword search seeding, channel memory, dedup.

The frontier cycles through a list of very common search keywords (each
query surfaces only recent uploads, so cycling keeps discovering fresh
material) and remembers channels that already produced accepted samples;
channel-sourced candidates are drained before keyword-sourced ones. Every
video id is emitted at most once per session. Emission order is fully
determined by the keyword list and the enqueue order — no randomness.
"""
from __future__ import annotations

import json
from collections import deque
from importlib import resources
from pathlib import Path

from .model import VideoRecord

SOURCE_KEYWORD = "keyword"
SOURCE_CHANNEL = "channel"

_KEYWORD_FILE = "keywords_top100.txt"


class FrontierConfigError(Exception):
    pass


def default_keywords() -> list[str]:
    """The packaged top-100 common English words used as search keywords."""
    text = resources.files(__package__).joinpath("data", _KEYWORD_FILE).read_text("utf-8")
    return [w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#")]


def _stub_to_json(v: VideoRecord) -> dict:
    return {
        "video_id": v.video_id,
        "channel_id": v.channel_id,
        "title": v.title,
        "duration_s": v.duration_s,
        "audio_ref": v.audio_ref,
    }


def _stub_from_json(d: dict) -> VideoRecord:
    return VideoRecord(
        video_id=d["video_id"],
        channel_id=d["channel_id"],
        title=d.get("title", ""),
        duration_s=d.get("duration_s", 0.0),
        audio_ref=d.get("audio_ref"),
    )


class CrawlFrontier:
    """Single-owner work queue of video candidates.

    Not thread-safe by itself; concurrent pipeline workers must pull
    through one serialized access point.
    """

    def __init__(self, keywords: list[str] | None = None):
        if keywords is None:
            keywords = default_keywords()
        if not keywords:
            raise FrontierConfigError("keyword list must not be empty")
        self.keywords = list(keywords)
        self._keyword_pos = 0
        self.channel_memory: set[str] = set()
        self.seen_videos: set[str] = set()
        self._channel_queue: deque[VideoRecord] = deque()
        self._keyword_queue: deque[VideoRecord] = deque()

    def next_keyword(self) -> str:
        """Round-robin over the keyword list, restarting after a full cycle."""
        kw = self.keywords[self._keyword_pos % len(self.keywords)]
        self._keyword_pos += 1
        return kw

    def enqueue_results(self, source: str, videos: list[VideoRecord]) -> int:
        """Queue unseen videos; returns how many were actually added.

        Channel-sourced entries outrank keyword-sourced ones when dequeuing.
        """
        if source not in (SOURCE_KEYWORD, SOURCE_CHANNEL):
            raise ValueError(f"unknown source {source!r}")
        queue = self._channel_queue if source == SOURCE_CHANNEL else self._keyword_queue
        added = 0
        for video in videos:
            if video.video_id in self.seen_videos:
                continue
            self.seen_videos.add(video.video_id)
            queue.append(video)
            added += 1
        return added

    def next_video(self) -> VideoRecord | None:
        if self._channel_queue:
            return self._channel_queue.popleft()
        if self._keyword_queue:
            return self._keyword_queue.popleft()
        return None

    def pending_count(self) -> int:
        return len(self._channel_queue) + len(self._keyword_queue)

    def record_acceptance(self, video: VideoRecord) -> bool:
        """Memorize the channel of a video that produced accepted samples.

        Returns True iff the channel is newly memorized. Memory only grows.
        """
        new = video.channel_id not in self.channel_memory
        self.channel_memory.add(video.channel_id)
        return new

    # -- persistence (resumable crawls) ------------------------------------

    def snapshot(self) -> dict:
        return {
            "keywords": self.keywords,
            "keyword_pos": self._keyword_pos,
            "channel_memory": sorted(self.channel_memory),
            "seen_videos": sorted(self.seen_videos),
            "pending_channel": [_stub_to_json(v) for v in self._channel_queue],
            "pending_keyword": [_stub_to_json(v) for v in self._keyword_queue],
        }

    @classmethod
    def restore(cls, snapshot: dict) -> "CrawlFrontier":
        f = cls(snapshot["keywords"])
        f._keyword_pos = snapshot.get("keyword_pos", 0)
        f.channel_memory = set(snapshot.get("channel_memory", ()))
        f.seen_videos = set(snapshot.get("seen_videos", ()))
        f._channel_queue = deque(_stub_from_json(d) for d in snapshot.get("pending_channel", ()))
        f._keyword_queue = deque(_stub_from_json(d) for d in snapshot.get("pending_keyword", ()))
        return f

    def save(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.snapshot(), indent=2) + "\n", "utf-8")

    @classmethod
    def load(cls, path: Path | str) -> "CrawlFrontier":
        return cls.restore(json.loads(Path(path).read_text("utf-8")))
