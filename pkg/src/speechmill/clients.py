"""Contracts for external services (ASR, forced aligner, media, search) and
the deterministic mock implementations used by tests and offline runs.

Every client error is classified retryable or fatal via
:attr:`ClientError.retryable`; the pipeline defers work on retryable
failures and drops it on fatal ones. Real network adapters live behind the
same contracts as optional plug-ins (see docs/adapters.md for the wire
shapes); nothing in this module touches the network.

All mocks are deterministic functions of their configuration and inputs —
no wall clock, no hidden randomness — so pipeline runs over fixtures are
exactly reproducible.
"""
from __future__ import annotations

import wave
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .model import AlignedWord, VideoRecord, to_ms

SAMPLE_RATE = 16_000
SAMPLE_WIDTH = 2  # bytes: 16-bit PCM
CHANNELS = 1


@dataclass(frozen=True, slots=True)
class AudioSpan:
    """A time span of one video's audio stream."""

    video_id: str
    audio_ref: str | None
    start_s: float
    end_s: float


class ClientError(Exception):
    retryable = False


class AsrUnavailable(ClientError):
    retryable = True


class AsrQuotaExceeded(ClientError):
    retryable = True


class AlignerUnavailable(ClientError):
    retryable = True


class MediaNotFound(ClientError):
    retryable = False


class MediaIOError(ClientError):
    retryable = False


class AsrClient(ABC):
    """Speech recognizer used by the video-level similarity gate."""

    @abstractmethod
    def transcribe(self, span: AudioSpan) -> str:
        """Best-hypothesis transcript for the span (possibly empty).

        Raises :class:`AsrUnavailable` or :class:`AsrQuotaExceeded` on
        retryable failures; the pipeline defers the video.
        """


class AlignerClient(ABC):
    """Forced aligner mapping transcript words onto the audio timeline."""

    @abstractmethod
    def align(self, span: AudioSpan, transcript: str) -> tuple[AlignedWord, ...]:
        """One :class:`AlignedWord` per transcript token, in order, with
        ``aligned=False`` for words that could not be mapped.

        ``transcript`` must be non-empty. Raises :class:`AlignerUnavailable`
        on failure.
        """


class MediaClient(ABC):
    """Audio acquisition: full-stream fetch and exact sub-span cuts."""

    @abstractmethod
    def fetch(self, video_id: str) -> str:
        """Materialize the full-length mono 16 kHz WAV; returns its path."""

    @abstractmethod
    def cut(self, audio_ref: str, start_s: float, end_s: float, out_path: Path) -> Path:
        """Write the exact [start_s, end_s) sub-span as a 16 kHz mono PCM16
        WAV at ``out_path`` and return it."""


class SearchClient(ABC):
    """Video discovery backend for the crawl frontier."""

    @abstractmethod
    def search(self, keyword: str) -> list[VideoRecord]:
        """Most-recent video stubs matching the keyword (at most 600)."""

    @abstractmethod
    def list_channel(self, channel_id: str) -> list[VideoRecord]:
        """Video stubs from one channel."""


def span_key(video_id: str, start_s: float, end_s: float) -> tuple[str, int, int]:
    return (video_id, to_ms(start_s), to_ms(end_s))


class EchoAsr(AsrClient):
    """Returns the caption text registered for the queried span.

    Used to exercise the similarity gate's pass path: echoing the caption
    yields similarity 1.0. Unknown spans raise ``LookupError`` — that is a
    fixture wiring bug, not a recognizer failure.
    """

    def __init__(self, transcripts: Mapping[tuple[str, int, int], str]):
        self._transcripts = dict(transcripts)

    @classmethod
    def from_videos(cls, videos: Sequence[VideoRecord]) -> "EchoAsr":
        table = {}
        for video in videos:
            for cue in video.caption_track:
                table[span_key(video.video_id, cue.start_s, cue.end_s)] = cue.raw_text
        return cls(table)

    def transcribe(self, span: AudioSpan) -> str:
        key = span_key(span.video_id, span.start_s, span.end_s)
        if key not in self._transcripts:
            raise LookupError(f"no registered transcript for {key}")
        return self._transcripts[key]


class GarbageAsr(AsrClient):
    """Returns one fixed, unrelated string for every span (gate reject path)."""

    def __init__(self, text: str = "xxxx xxxx xxxx"):
        self.text = text

    def transcribe(self, span: AudioSpan) -> str:
        return self.text


class FailingAsr(AsrClient):
    def transcribe(self, span: AudioSpan) -> str:
        raise AsrUnavailable("recognizer permanently unavailable (mock)")


class MarginAligner(AlignerClient):
    """Aligner mock with configurable dead zones at the span borders.

    Word k of n is nominally at the center of the k-th equal slice of the
    queried span. A word is aligned iff its nominal position falls inside
    the span shrunk by the configured margins, so a border word "missing"
    from the caption span becomes aligned once the query is widened enough.
    """

    _EPS = 1e-9  # absorbs float dust in position/margin comparisons

    def __init__(self, left_margin_s: float = 0.0, right_margin_s: float = 0.0):
        self.left_margin_s = left_margin_s
        self.right_margin_s = right_margin_s

    def align(self, span: AudioSpan, transcript: str) -> tuple[AlignedWord, ...]:
        words = transcript.split()
        if not words:
            raise ValueError("transcript must be non-empty")
        n = len(words)
        qs, qe = span.start_s, span.end_s
        length = qe - qs
        lo = qs + self.left_margin_s - self._EPS
        hi = qe - self.right_margin_s + self._EPS
        out = []
        for i, word in enumerate(words):
            pos = qs + (i + 0.5) * length / n
            out.append(
                AlignedWord(
                    word=word,
                    start_s=qs + i * length / n,
                    end_s=qs + (i + 1) * length / n,
                    aligned=lo <= pos <= hi,
                )
            )
        return tuple(out)


class FailingAligner(AlignerClient):
    def align(self, span: AudioSpan, transcript: str) -> tuple[AlignedWord, ...]:
        raise AlignerUnavailable("aligner permanently unavailable (mock)")


class DirectoryMedia(MediaClient):
    """Serves full-length fixture WAVs from a directory keyed by video id.

    Files must already be mono 16 kHz 16-bit PCM; cuts are exact frame
    slices (frame = round(seconds * 16000)), so a cut of d seconds holds
    round(d * 16000) frames up to one frame of boundary rounding.
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def fetch(self, video_id: str) -> str:
        path = self.root / f"{video_id}.wav"
        if not path.is_file():
            raise MediaNotFound(f"no fixture audio for video {video_id!r}")
        return str(path)

    def cut(self, audio_ref: str, start_s: float, end_s: float, out_path: Path) -> Path:
        if end_s <= start_s:
            raise MediaIOError(f"empty cut span [{start_s}, {end_s}]")
        try:
            with wave.open(audio_ref, "rb") as src:
                if (
                    src.getframerate() != SAMPLE_RATE
                    or src.getnchannels() != CHANNELS
                    or src.getsampwidth() != SAMPLE_WIDTH
                ):
                    raise MediaIOError(
                        f"{audio_ref} is not mono {SAMPLE_RATE} Hz 16-bit PCM"
                    )
                total = src.getnframes()
                first = round(start_s * SAMPLE_RATE)
                last = round(end_s * SAMPLE_RATE)
                if first < 0 or first >= total:
                    raise MediaIOError(
                        f"cut start {start_s}s outside source ({total} frames)"
                    )
                last = min(last, total)
                src.setpos(first)
                frames = src.readframes(last - first)
        except (wave.Error, OSError) as exc:
            raise MediaIOError(f"cannot read {audio_ref}: {exc}") from exc

        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        try:
            with wave.open(str(out_path), "wb") as dst:
                dst.setnchannels(CHANNELS)
                dst.setsampwidth(SAMPLE_WIDTH)
                dst.setframerate(SAMPLE_RATE)
                dst.writeframes(frames)
        except (wave.Error, OSError) as exc:
            raise MediaIOError(f"cannot write {out_path}: {exc}") from exc
        return out_path


class StaticSearch(SearchClient):
    """Fixture search backend answering from in-memory result tables."""

    def __init__(
        self,
        keyword_results: Mapping[str, Sequence[VideoRecord]] | None = None,
        channel_results: Mapping[str, Sequence[VideoRecord]] | None = None,
    ):
        self._by_keyword = {k: list(v) for k, v in (keyword_results or {}).items()}
        self._by_channel = {k: list(v) for k, v in (channel_results or {}).items()}

    def search(self, keyword: str) -> list[VideoRecord]:
        return list(self._by_keyword.get(keyword, ()))[:600]

    def list_channel(self, channel_id: str) -> list[VideoRecord]:
        return list(self._by_channel.get(channel_id, ()))


def words_from_alignment_json(payload: Mapping) -> tuple[AlignedWord, ...]:
    """Map an aligner service response into :class:`AlignedWord` values.

    Expected shape: ``{"words": [{"word", "start", "end", "case"}, ...]}``
    with ``case == "success"`` for mapped words; unmapped words may omit
    their timings. This is the reference wire shape a real HTTP aligner
    adapter produces (see docs/adapters.md).
    """
    out = []
    for w in payload.get("words", ()):
        ok = w.get("case") == "success" and "start" in w and "end" in w
        if ok:
            word = AlignedWord(w.get("word", ""), float(w["start"]), float(w["end"]), True)
        else:
            word = AlignedWord(w.get("word", ""), 0.0, 0.0, False)
        out.append(word)
    return tuple(out)
