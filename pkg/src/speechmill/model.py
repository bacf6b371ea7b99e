"""Shared domain types and the sample lifecycle.

All types are immutable values; lifecycle transitions return new values, so
instances are safe to share across threads. Times are seconds with
millisecond precision (caption formats carry millisecond timestamps).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace


def to_ms(seconds: float) -> int:
    """Convert seconds to integer milliseconds (the precision all timing
    arithmetic in this package is carried out in)."""
    return round(seconds * 1000)


class RejectReason(enum.Enum):
    OVERLAP = "overlap"
    MUSIC = "music"
    NON_ASCII = "non_ascii"
    URL = "url"
    CHARSET = "charset"
    DURATION = "duration"
    SIMILARITY_GATE = "similarity_gate"
    EMPTY_AFTER_NORMALIZATION = "empty_after_normalization"
    ALIGNMENT_UNAVAILABLE = "alignment_unavailable"


class UtteranceStatus(enum.Enum):
    CANDIDATE = "candidate"
    REJECTED = "rejected"
    MERGED = "merged"
    ALIGNED = "aligned"
    ACCEPTED = "accepted"


class IllegalTransition(Exception):
    """Raised when a lifecycle event is not legal for the current status."""

    def __init__(self, status: UtteranceStatus, event: str):
        super().__init__(f"event {event!r} is not legal in status {status.value!r}")
        self.status = status
        self.event = event


@dataclass(frozen=True, slots=True)
class CaptionCue:
    """One timed subtitle entry parsed from an SRT or WebVTT track."""

    index: int
    start_s: float
    end_s: float
    raw_text: str

    def __post_init__(self) -> None:
        if self.start_s < 0:
            raise ValueError(f"cue start must be non-negative, got {self.start_s}")
        if self.end_s <= self.start_s:
            raise ValueError(
                f"cue end must be after start, got [{self.start_s}, {self.end_s}]"
            )

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True, slots=True)
class AlignedWord:
    """One transcript word mapped (or not) to a time span by a forced aligner."""

    word: str
    start_s: float
    end_s: float
    aligned: bool

    def __post_init__(self) -> None:
        if self.aligned and self.end_s <= self.start_s:
            raise ValueError(f"aligned word {self.word!r} has empty span")


@dataclass(frozen=True, slots=True)
class VideoRecord:
    """Metadata for one source video."""

    video_id: str
    channel_id: str
    title: str
    duration_s: float
    caption_track: tuple[CaptionCue, ...] = ()
    audio_ref: str | None = None

    def __post_init__(self) -> None:
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if self.duration_s < 0:
            raise ValueError(f"duration must be non-negative, got {self.duration_s}")


@dataclass(frozen=True, slots=True)
class Utterance:
    """A candidate sample flowing through the filter pipeline.

    Reaches ``accepted`` only along candidate -> merged -> aligned -> accepted;
    ``rejected`` is terminal and always carries exactly one reason.
    """

    source_video: str
    start_s: float
    end_s: float
    transcript: str
    cue_indices: tuple[int, ...]
    status: UtteranceStatus = UtteranceStatus.CANDIDATE
    reject_reason: RejectReason | None = None

    def __post_init__(self) -> None:
        if self.end_s <= self.start_s:
            raise ValueError(
                f"utterance span empty or inverted: [{self.start_s}, {self.end_s}]"
            )
        rejected = self.status is UtteranceStatus.REJECTED
        if rejected and self.reject_reason is None:
            raise ValueError("rejected utterance must carry a reject reason")
        if not rejected and self.reject_reason is not None:
            raise ValueError("only rejected utterances carry a reject reason")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


# Legal lifecycle transitions: (current status, event) -> next status.
_TRANSITIONS: dict[tuple[UtteranceStatus, str], UtteranceStatus] = {
    (UtteranceStatus.CANDIDATE, "reject"): UtteranceStatus.REJECTED,
    (UtteranceStatus.CANDIDATE, "merge"): UtteranceStatus.MERGED,
    (UtteranceStatus.MERGED, "align_ok"): UtteranceStatus.ALIGNED,
    (UtteranceStatus.ALIGNED, "accept"): UtteranceStatus.ACCEPTED,
}

LIFECYCLE_EVENTS = ("reject", "merge", "align_ok", "accept")


def advance_status(
    u: Utterance, event: str, reason: RejectReason | None = None
) -> Utterance:
    """Apply a lifecycle event and return the updated utterance.

    ``reject`` requires a reason; every other event forbids one. Any
    (status, event) pair outside the transition table raises
    :class:`IllegalTransition` — in particular, rejected is terminal.
    """
    nxt = _TRANSITIONS.get((u.status, event))
    if nxt is None:
        raise IllegalTransition(u.status, event)
    if event == "reject":
        if reason is None:
            raise ValueError("reject event requires a reason")
        return replace(u, status=nxt, reject_reason=reason)
    if reason is not None:
        raise ValueError(f"event {event!r} does not take a reason")
    return replace(u, status=nxt)


@dataclass(frozen=True, slots=True)
class ManifestEntry:
    """One accepted dataset row: audio path, transcript, timing, provenance."""

    sample_id: str
    audio_path: str
    transcript: str
    duration_s: float
    video_id: str
    channel_id: str
    start_s: float
    end_s: float
    pipeline_version: str

    def __post_init__(self) -> None:
        if not self.sample_id:
            raise ValueError("sample_id must be non-empty")
        if not self.transcript:
            raise ValueError("transcript must be non-empty")
        if abs(self.duration_s - (self.end_s - self.start_s)) > 0.001:
            raise ValueError(
                f"duration {self.duration_s} disagrees with span "
                f"[{self.start_s}, {self.end_s}] by more than 1 ms"
            )

    def to_json(self) -> dict:
        # Field order is part of the manifest file contract.
        return {
            "sample_id": self.sample_id,
            "audio_path": self.audio_path,
            "transcript": self.transcript,
            "duration_s": self.duration_s,
            "video_id": self.video_id,
            "channel_id": self.channel_id,
            "start_s": self.start_s,
            "end_s": self.end_s,
            "pipeline_version": self.pipeline_version,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ManifestEntry":
        return cls(
            sample_id=d["sample_id"],
            audio_path=d["audio_path"],
            transcript=d["transcript"],
            duration_s=d["duration_s"],
            video_id=d["video_id"],
            channel_id=d["channel_id"],
            start_s=d["start_s"],
            end_s=d["end_s"],
            pipeline_version=d["pipeline_version"],
        )


class Verdict(enum.Enum):
    CONFIRMED = "confirmed"
    CORRECTED = "corrected"


@dataclass(frozen=True, slots=True)
class ReviewVerdict:
    """A human judgment on one sample: confirmed, or a corrected transcript."""

    sample_id: str
    verdict: Verdict
    corrected_transcript: str | None
    reviewer_id: str
    timestamp: str  # RFC 3339

    def __post_init__(self) -> None:
        if self.verdict is Verdict.CORRECTED and not self.corrected_transcript:
            raise ValueError("corrected verdict requires a corrected transcript")
        if self.verdict is Verdict.CONFIRMED and self.corrected_transcript is not None:
            raise ValueError("confirmed verdict must not carry a correction")

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "verdict": self.verdict.value,
            "corrected_transcript": self.corrected_transcript,
            "reviewer_id": self.reviewer_id,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ReviewVerdict":
        return cls(
            sample_id=d["sample_id"],
            verdict=Verdict(d["verdict"]),
            corrected_transcript=d.get("corrected_transcript"),
            reviewer_id=d["reviewer_id"],
            timestamp=d["timestamp"],
        )
