"""Accept/reject rules for caption cues plus the video-level similarity gate.

Cue-level rules run in a fixed order (overlap, music, non-ASCII, URL,
charset-after-normalization, duration) so the recorded reject reason is
deterministic; permuting the other cues of a track can change only the
overlap verdict. The gate probes a few random cues against an independent
recognizer and discards the whole video when the transcripts disagree too
much — the sole defense against English captions on non-English speech and
against globally misaligned tracks.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .captions import CaptionTrack, find_overlaps
from .clients import AsrClient, AudioSpan
from .metrics import align_tokens
from .model import CaptionCue, RejectReason, VideoRecord, to_ms
from .normalize import normalize

GATE_MEAN = "mean"
GATE_MIN = "min"


@dataclass(frozen=True, slots=True)
class FilterConfig:
    min_duration_s: float = 1.0
    max_duration_s: float = 10.0
    similarity_threshold: float = 0.70
    probe_count: int = 3
    rng_seed: int = 0
    gate_aggregation: str = GATE_MEAN

    def __post_init__(self) -> None:
        if not 0 < self.min_duration_s < self.max_duration_s:
            raise ValueError(
                f"need 0 < min_duration_s < max_duration_s, got "
                f"[{self.min_duration_s}, {self.max_duration_s}]"
            )
        if not 0 <= self.similarity_threshold <= 1:
            raise ValueError(
                f"similarity_threshold must be in [0, 1], got {self.similarity_threshold}"
            )
        if self.probe_count < 1:
            raise ValueError("probe_count must be at least 1")
        if self.gate_aggregation not in (GATE_MEAN, GATE_MIN):
            raise ValueError(f"unknown gate aggregation {self.gate_aggregation!r}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "FilterConfig":
        """Build from a config-file section; keys equal field names."""
        kwargs: dict = {}
        for f, cast in (
            ("min_duration_s", float),
            ("max_duration_s", float),
            ("similarity_threshold", float),
            ("probe_count", int),
            ("rng_seed", int),
            ("gate_aggregation", str),
        ):
            if f in mapping:
                kwargs[f] = cast(mapping[f])
        return cls(**kwargs)


@dataclass(frozen=True, slots=True)
class CueVerdict:
    passed: bool
    reason: RejectReason | None = None
    transcript: str | None = None  # normalized text, set on pass


_URL = re.compile(r"https?://|\bwww\.", re.IGNORECASE)
_ANNOTATION = re.compile(r"\[([^\[\]]*)\]|\(([^()]*)\)|\*([^*]*)\*")
_MUSIC_WORD = re.compile(r"\bmusic\b", re.IGNORECASE)
_LEGAL_TRANSCRIPT = frozenset("abcdefghijklmnopqrstuvwxyz' ")


def _is_music(raw: str) -> bool:
    if "♪" in raw or "♫" in raw:  # ♪ ♫
        return True
    for m in _ANNOTATION.finditer(raw):
        content = next(g for g in m.groups() if g is not None)
        if _MUSIC_WORD.search(content):
            return True
    return False


def filter_cue(
    cue: CaptionCue,
    track: CaptionTrack | Sequence[CaptionCue],
    cfg: FilterConfig,
    overlap_indices: frozenset[int] | None = None,
) -> CueVerdict:
    """Classify one cue of a track: pass with its normalized transcript, or
    the first failing reason in the fixed rule order.

    ``overlap_indices`` lets callers reuse one overlap scan for the whole
    track; when omitted it is computed here.
    """
    if overlap_indices is None:
        overlap_indices = overlapping_cue_indices(track)
    if cue.index in overlap_indices:
        return CueVerdict(False, RejectReason.OVERLAP)

    raw = cue.raw_text
    if _is_music(raw):
        return CueVerdict(False, RejectReason.MUSIC)
    if not raw.isascii():
        return CueVerdict(False, RejectReason.NON_ASCII)
    if _URL.search(raw):
        return CueVerdict(False, RejectReason.URL)

    transcript = normalize(raw)
    if not transcript:
        return CueVerdict(False, RejectReason.EMPTY_AFTER_NORMALIZATION)
    if not set(transcript) <= _LEGAL_TRANSCRIPT:
        return CueVerdict(False, RejectReason.CHARSET)

    dur_ms = to_ms(cue.end_s) - to_ms(cue.start_s)
    if dur_ms < to_ms(cfg.min_duration_s) or dur_ms > to_ms(cfg.max_duration_s):
        return CueVerdict(False, RejectReason.DURATION)

    return CueVerdict(True, transcript=transcript)


def overlapping_cue_indices(track: CaptionTrack | Sequence[CaptionCue]) -> frozenset[int]:
    return frozenset(i for pair in find_overlaps(track) for i in pair)


def passing_cues(
    cues: Sequence[CaptionCue], cfg: FilterConfig
) -> list[tuple[CaptionCue, str]]:
    """Cues of a track that pass :func:`filter_cue`, with their transcripts."""
    overlaps = overlapping_cue_indices(cues)
    out = []
    for cue in cues:
        verdict = filter_cue(cue, cues, cfg, overlaps)
        if verdict.passed:
            out.append((cue, verdict.transcript or ""))
    return out


def similarity(a: str, b: str) -> float:
    """Character-level edit similarity: 1 - distance / max length, in [0, 1].

    Both strings empty compare as 1.0.
    """
    if not a and not b:
        return 1.0
    distance = align_tokens(list(a), list(b)).distance
    return 1.0 - distance / max(len(a), len(b))


@dataclass(frozen=True, slots=True)
class GateProbe:
    cue_index: int
    caption: str
    asr_transcript: str
    similarity: float


@dataclass(frozen=True, slots=True)
class GateResult:
    passed: bool
    score: float
    probes: tuple[GateProbe, ...]


def video_gate(
    video: VideoRecord,
    asr: AsrClient,
    cfg: FilterConfig,
    passing: Sequence[tuple[CaptionCue, str]] | None = None,
) -> GateResult:
    """Probe a few passing cues against an independent recognizer; below the
    similarity threshold the caller discards every sample of the video.

    ``passing`` is the (cue, normalized transcript) list that survived
    :func:`filter_cue`; when omitted it is recomputed from the video's own
    caption track. Probes are drawn without replacement by an RNG seeded
    from (rng_seed, video_id), so verdicts do not depend on scheduling.
    Recognizer failures propagate: the video is deferred, not rejected.
    """
    if passing is None:
        passing = passing_cues(video.caption_track, cfg)
    if not passing:
        raise ValueError(f"video {video.video_id!r} has no passing cue to probe")

    rng = random.Random(f"{cfg.rng_seed}:{video.video_id}")
    k = min(cfg.probe_count, len(passing))
    probes = []
    for cue, transcript in sorted(rng.sample(list(passing), k), key=lambda p: p[0].index):
        span = AudioSpan(video.video_id, video.audio_ref, cue.start_s, cue.end_s)
        asr_text = normalize(asr.transcribe(span))
        probes.append(
            GateProbe(cue.index, transcript, asr_text, similarity(transcript, asr_text))
        )

    if cfg.gate_aggregation == GATE_MIN:
        score = min(p.similarity for p in probes)
    else:
        score = sum(p.similarity for p in probes) / len(probes)
    return GateResult(passed=score >= cfg.similarity_threshold, score=score, probes=tuple(probes))
