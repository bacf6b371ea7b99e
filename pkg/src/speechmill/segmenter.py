"""Post-processing: cue grouping, alignment-driven boundary repair, audio cuts.

Nearby cues are merged greedily so clipped border words get absorbed into a
longer span, then a forced aligner checks the border words and the
boundaries are pushed outward (never inward, at most half a second) until
they map. Timing arithmetic runs in integer milliseconds.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .clients import AlignerClient, AlignerUnavailable, AudioSpan, MediaClient
from .model import AlignedWord, Utterance, UtteranceStatus, VideoRecord, advance_status, to_ms

__all__ = [
    "AlignedWord",
    "MERGE_GAP_S",
    "MERGE_MAX_SPAN_S",
    "EXTENSION_CAP_S",
    "EXTENSION_STEP_S",
    "RefineOutcome",
    "merge_adjacent",
    "refine_boundaries",
    "cut_audio",
]

log = logging.getLogger(__name__)

MERGE_GAP_S = 1.0  # group cues closer than this
MERGE_MAX_SPAN_S = 10.0  # stop growing a group beyond this span
EXTENSION_CAP_S = 0.5  # widen a border by at most this much
EXTENSION_STEP_S = 0.1  # widening probe step


def merge_adjacent(candidates: Sequence[Utterance]) -> list[Utterance]:
    """Greedy left-to-right grouping of passing cue candidates.

    The next candidate joins the current group iff the gap to the group end
    is under one second and the grown span stays within ten seconds.
    Transcripts join with single spaces; outputs carry status ``merged``
    and the concatenation of their members' cue indices. Never reorders,
    drops or duplicates cues.
    """
    gap_ms = to_ms(MERGE_GAP_S)
    cap_ms = to_ms(MERGE_MAX_SPAN_S)
    merged: list[Utterance] = []
    group: list[Utterance] = []

    def flush() -> None:
        if not group:
            return
        first, last = group[0], group[-1]
        combined = Utterance(
            source_video=first.source_video,
            start_s=first.start_s,
            end_s=last.end_s,
            transcript=" ".join(u.transcript for u in group),
            cue_indices=tuple(i for u in group for i in u.cue_indices),
        )
        merged.append(advance_status(combined, "merge"))

    for cand in candidates:
        if cand.status is not UtteranceStatus.CANDIDATE:
            raise ValueError(f"can only merge candidates, got {cand.status.value}")
        if group:
            gap = to_ms(cand.start_s) - to_ms(group[-1].end_s)
            span = to_ms(cand.end_s) - to_ms(group[0].start_s)
            if gap < gap_ms and span <= cap_ms:
                group.append(cand)
                continue
            flush()
            group = [cand]
        else:
            group = [cand]
    flush()
    return merged


@dataclass(frozen=True, slots=True)
class RefineOutcome:
    utterance: Utterance  # status aligned; boundaries possibly widened
    aligner_failed: bool = False  # aligner errored; boundaries kept as-is


def _probe_offsets(anchor_ms: int, limit_ms: int, outward: int) -> list[int]:
    """Widening schedule from the anchor toward the limit, 100 ms at a time,
    clamped; duplicates from clamping collapse. Empty when the limit leaves
    no room to widen."""
    step = to_ms(EXTENSION_STEP_S)
    cap = to_ms(EXTENSION_CAP_S)
    offsets: list[int] = []
    for k in range(1, cap // step + 1):
        probe = anchor_ms + outward * k * step
        probe = max(probe, limit_ms) if outward < 0 else min(probe, limit_ms)
        if probe == anchor_ms or (offsets and offsets[-1] == probe):
            break
        offsets.append(probe)
    return offsets


def refine_boundaries(
    u: Utterance,
    aligner: AlignerClient,
    video: VideoRecord,
) -> RefineOutcome:
    """Repair caption-border timing with a forced aligner.

    Aligns the merged span; for an unmapped first word the start is widened
    outward in 100 ms steps (at most 500 ms, clamped at zero) until the word
    maps, and likewise, independently, the end toward the video duration.
    When a border word never maps — or the aligner is unavailable — the
    original boundary stays. Boundaries move only outward. The result is
    ``aligned`` either way.
    """
    if u.status is not UtteranceStatus.MERGED:
        raise ValueError(f"can only refine merged utterances, got {u.status.value}")

    start_ms = to_ms(u.start_s)
    end_ms = to_ms(u.end_s)

    def align_span(s_ms: int, e_ms: int) -> tuple[AlignedWord, ...]:
        span = AudioSpan(u.source_video, video.audio_ref, s_ms / 1000.0, e_ms / 1000.0)
        return aligner.align(span, u.transcript)

    try:
        words = align_span(start_ms, end_ms)
        new_start, new_end = start_ms, end_ms
        if not words[0].aligned:
            for probe in _probe_offsets(start_ms, 0, outward=-1):
                if align_span(probe, end_ms)[0].aligned:
                    new_start = probe
                    break
        if not words[-1].aligned:
            # A missing/shorter video duration leaves no room to widen; it
            # never pulls the boundary inward.
            end_limit = max(end_ms, to_ms(video.duration_s))
            for probe in _probe_offsets(end_ms, end_limit, outward=+1):
                if align_span(start_ms, probe)[-1].aligned:
                    new_end = probe
                    break
    except AlignerUnavailable as exc:
        log.warning("aligner unavailable for %s: %s; keeping boundaries", u.source_video, exc)
        return RefineOutcome(advance_status(u, "align_ok"), aligner_failed=True)

    refined = Utterance(
        source_video=u.source_video,
        start_s=new_start / 1000.0,
        end_s=new_end / 1000.0,
        transcript=u.transcript,
        cue_indices=u.cue_indices,
        status=u.status,
    )
    return RefineOutcome(advance_status(refined, "align_ok"))


def cut_audio(
    u: Utterance,
    video: VideoRecord,
    media: MediaClient,
    out_path: Path,
) -> tuple[Path, Utterance]:
    """Write the utterance's exact audio span as a mono 16 kHz PCM16 WAV.

    Returns the file path and the utterance advanced to ``accepted``. Media
    errors propagate; the caller drops the sample and records the reason.
    """
    if u.status is not UtteranceStatus.ALIGNED:
        raise ValueError(f"can only cut aligned utterances, got {u.status.value}")
    audio_ref = video.audio_ref or media.fetch(video.video_id)
    path = media.cut(audio_ref, u.start_s, u.end_s, Path(out_path))
    return path, advance_status(u, "accept")
