"""SRT and WebVTT parsing into ordered cue lists, plus overlap detection.

The parser is recovery-oriented: defective cues are dropped or repaired
with a warning recorded per cue, and only a file yielding no cue at all is
an error. Timestamp grammars: SRT ``HH:MM:SS,mmm``; WebVTT ``[HH:]MM:SS.mmm``
(either decimal separator is tolerated in both formats).
"""
from __future__ import annotations

import enum
import html
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .model import CaptionCue, to_ms


class CaptionFormat(enum.Enum):
    SRT = "srt"
    WEBVTT = "webvtt"


class CaptionParseError(Exception):
    """No cue could be extracted from the input."""


class TrackWarning(NamedTuple):
    cue_index: int  # ordinal of the source block the warning refers to
    kind: str


WARN_MISSING_INDEX = "missing_index"
WARN_NEGATIVE_DURATION = "negative_duration"
WARN_BAD_TIMESTAMP = "bad_timestamp"
WARN_OUT_OF_ORDER = "out_of_order"


@dataclass(frozen=True, slots=True)
class CaptionTrack:
    format: CaptionFormat
    cues: tuple[CaptionCue, ...]
    warnings: tuple[TrackWarning, ...] = ()


# SRT hours are mandatory, WebVTT hours optional; both separators accepted.
_SRT_TS = r"(\d{1,3}):([0-5]\d):([0-5]\d)[,.](\d{3})"
_VTT_TS = r"(?:(\d{1,3}):)?([0-5]\d):([0-5]\d)[.,](\d{3})"
_SRT_CUE_LINE = re.compile(rf"^\s*{_SRT_TS}\s*-->\s*{_SRT_TS}\s*$")
_VTT_CUE_LINE = re.compile(rf"^\s*{_VTT_TS}\s*-->\s*{_VTT_TS}(?:\s+\S.*)?$")
_VTT_TAG = re.compile(r"<[^>]*>")


def _srt_seconds(h: str, m: str, s: str, ms: str) -> float:
    return int(h) * 3600 + int(m) * 60 + int(s) + int(ms) / 1000.0


def _vtt_seconds(h: str | None, m: str, s: str, ms: str) -> float:
    return (int(h) if h else 0) * 3600 + int(m) * 60 + int(s) + int(ms) / 1000.0


def _blocks(text: str) -> Iterable[list[str]]:
    block: list[str] = []
    for line in text.split("\n"):
        line = line.rstrip("\r")
        if line.strip():
            block.append(line)
        elif block:
            yield block
            block = []
    if block:
        yield block


def _clean_text(lines: list[str], fmt: CaptionFormat) -> str:
    text = " ".join(lines)
    if fmt is CaptionFormat.WEBVTT:
        text = _VTT_TAG.sub("", text)
    return html.unescape(" ".join(text.split()))


def parse_track(
    data: bytes | str, format_hint: CaptionFormat | None = None
) -> CaptionTrack:
    """Parse raw SRT/WebVTT content into a :class:`CaptionTrack`.

    The format is taken from ``format_hint`` when given, otherwise sniffed
    from the WEBVTT magic header. Cues come out sorted by start time (an
    out-of-order source is repaired with a warning) with ordinal indexes
    assigned after sorting. WebVTT styling and voice tags are stripped;
    cue settings after the timestamps are ignored.

    Raises :class:`CaptionParseError` if no cue at all can be extracted.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise CaptionParseError(f"input is not UTF-8: {exc}") from exc
    else:
        text = data.lstrip("﻿")

    first_line = text.split("\n", 1)[0].strip()
    if format_hint is not None:
        fmt = format_hint
    elif first_line.startswith("WEBVTT"):
        fmt = CaptionFormat.WEBVTT
    else:
        fmt = CaptionFormat.SRT

    warnings: list[TrackWarning] = []
    parsed: list[tuple[float, float, str]] = []
    cue_line = _SRT_CUE_LINE if fmt is CaptionFormat.SRT else _VTT_CUE_LINE
    to_seconds = _srt_seconds if fmt is CaptionFormat.SRT else _vtt_seconds

    ordinal = 0
    for block in _blocks(text):
        if fmt is CaptionFormat.WEBVTT:
            head = block[0].strip()
            if head.startswith("WEBVTT"):
                # Tolerate a missing blank line between header and first cue.
                if len(block) > 1 and any("-->" in ln for ln in block[1:]):
                    block = block[1:]
                else:
                    continue
            elif head.startswith(("NOTE", "STYLE", "REGION")):
                continue

        lines = list(block)
        has_index = bool(re.fullmatch(r"\d+", lines[0].strip()))
        if has_index:
            lines = lines[1:]
        if not lines:
            continue

        m = cue_line.match(lines[0])
        if m is None:
            # A stray id line (WebVTT cue identifiers) may precede the
            # timestamps; otherwise the block is not a cue.
            if len(lines) > 1 and "-->" in lines[1]:
                m = cue_line.match(lines[1])
                lines = lines[1:]
            if m is None:
                if "-->" in " ".join(lines):
                    warnings.append(TrackWarning(ordinal, WARN_BAD_TIMESTAMP))
                    ordinal += 1
                continue

        ordinal += 1
        if fmt is CaptionFormat.SRT and not has_index:
            warnings.append(TrackWarning(ordinal - 1, WARN_MISSING_INDEX))

        g = m.groups()
        start = to_seconds(*g[: len(g) // 2])
        end = to_seconds(*g[len(g) // 2 :])
        if end <= start:
            warnings.append(TrackWarning(ordinal - 1, WARN_NEGATIVE_DURATION))
            continue
        parsed.append((start, end, _clean_text(lines[1:], fmt)))

    if not parsed:
        raise CaptionParseError(f"no cue could be extracted ({fmt.value} input)")

    if any(parsed[i][0] > parsed[i + 1][0] for i in range(len(parsed) - 1)):
        warnings.append(TrackWarning(-1, WARN_OUT_OF_ORDER))
        parsed.sort(key=lambda c: (c[0], c[1]))

    cues = tuple(
        CaptionCue(index=i, start_s=start, end_s=end, raw_text=txt)
        for i, (start, end, txt) in enumerate(parsed)
    )
    return CaptionTrack(format=fmt, cues=cues, warnings=tuple(warnings))


def _format_ts(seconds: float, sep: str) -> str:
    ms = to_ms(seconds)
    h, rem = divmod(ms, 3_600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d}{sep}{ms:03d}"


def serialize_track(track: CaptionTrack) -> str:
    """Render a track back to caption text in its own format.

    Round-trips the (start, end, text) triples of a parsed track.
    """
    out: list[str] = []
    if track.format is CaptionFormat.WEBVTT:
        out.append("WEBVTT\n")
        for cue in track.cues:
            start = _format_ts(cue.start_s, ".")
            end = _format_ts(cue.end_s, ".")
            out.append(f"{start} --> {end}\n{cue.raw_text}\n")
    else:
        for i, cue in enumerate(track.cues, start=1):
            start = _format_ts(cue.start_s, ",")
            end = _format_ts(cue.end_s, ",")
            out.append(f"{i}\n{start} --> {end}\n{cue.raw_text}\n")
    return "\n".join(out)


# Cues intersecting by less than this are treated as touching, not
# overlapping; caption tools routinely emit adjacent cues sharing a border.
OVERLAP_TOLERANCE_MS = 1


def cues_overlap(a: CaptionCue, b: CaptionCue) -> bool:
    """True when the two cue spans intersect by at least 1 ms."""
    inter = min(to_ms(a.end_s), to_ms(b.end_s)) - max(to_ms(a.start_s), to_ms(b.start_s))
    return inter >= OVERLAP_TOLERANCE_MS


def find_overlaps(track: "CaptionTrack | Iterable[CaptionCue]") -> set[tuple[int, int]]:
    """All unordered pairs of cue indexes whose spans overlap.

    Touching boundaries (one cue ending exactly where the next starts) do
    not count. Result is symmetric-free: each pair appears once as
    (smaller index, larger index), and is invariant under cue reordering.
    Accepts a parsed track or any iterable of cues.
    """
    source = track.cues if isinstance(track, CaptionTrack) else track
    cues = sorted(source, key=lambda c: to_ms(c.start_s))
    pairs: set[tuple[int, int]] = set()
    for i, a in enumerate(cues):
        a_end = to_ms(a.end_s)
        for b in cues[i + 1 :]:
            if to_ms(b.start_s) >= a_end - OVERLAP_TOLERANCE_MS + 1:
                break
            if cues_overlap(a, b):
                pairs.add((min(a.index, b.index), max(a.index, b.index)))
    return pairs
