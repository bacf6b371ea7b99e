"""Append-only persistence for accepted samples, provenance and review.

Three JSONL files live in one directory:

* ``manifest.jsonl``   — accepted samples, one :class:`ManifestEntry` per line
* ``provenance.jsonl`` — pipeline events (rejects, gate outcomes, deferrals)
* ``review.jsonl``     — human verdicts feeding the error-rate estimate

JSONL keeps runs crash-tolerant (a partial trailing line is ignored on
reload), diff-able and relocatable; audio files sit under
``audio/<video_id>/<sample_id>.wav`` relative to the manifest.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .metrics import EditCounts, align_tokens, wer
from .model import ManifestEntry, ReviewVerdict, Verdict
from .normalize import normalize

MANIFEST_FILE = "manifest.jsonl"
PROVENANCE_FILE = "provenance.jsonl"
REVIEW_FILE = "review.jsonl"
AUDIO_DIR = "audio"


class DuplicateSampleId(Exception):
    pass


class UnknownSample(Exception):
    pass


class ManifestCorrupt(Exception):
    """A malformed line somewhere other than the tail of the file."""


def _read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        return []
    rows: list[dict] = []
    lines = path.read_text("utf-8").splitlines()
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            if i == len(lines) - 1:
                break  # partial trailing line from an interrupted run
            raise ManifestCorrupt(f"{path}:{i + 1}: {exc}") from exc
    return rows


def _dump(row: dict) -> str:
    return json.dumps(row, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True, slots=True)
class ManifestStats:
    sample_count: int
    total_hours: float
    per_channel: dict[str, int]
    reject_histogram: dict[str, int]


@dataclass
class _ReviewState:
    pooled: EditCounts = field(default_factory=EditCounts)
    reviewed: int = 0


class ManifestStore:
    """Single writer for one dataset directory.

    Concurrent pipeline workers must funnel writes through one store
    instance; all mutating methods take an internal lock. Readers may open
    the files concurrently — append-only writes keep everything before the
    last complete line consistent.
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._entries: dict[str, ManifestEntry] = {}
        self._review = _ReviewState()

        for row in _read_jsonl(self.manifest_path):
            entry = ManifestEntry.from_json(row)
            if entry.sample_id in self._entries:
                raise ManifestCorrupt(f"duplicate sample_id {entry.sample_id!r} on reload")
            self._entries[entry.sample_id] = entry
        for row in _read_jsonl(self.review_path):
            self._absorb_verdict(ReviewVerdict.from_json(row))

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST_FILE

    @property
    def provenance_path(self) -> Path:
        return self.root / PROVENANCE_FILE

    @property
    def review_path(self) -> Path:
        return self.root / REVIEW_FILE

    @property
    def audio_root(self) -> Path:
        return self.root / AUDIO_DIR

    def _append_line(self, path: Path, row: dict) -> None:
        with path.open("a", encoding="utf-8") as fh:
            fh.write(_dump(row) + "\n")
            fh.flush()

    # -- samples ------------------------------------------------------------

    def append(self, entry: ManifestEntry) -> None:
        """Durably append one accepted sample; sample ids are unique."""
        with self._lock:
            if entry.sample_id in self._entries:
                raise DuplicateSampleId(entry.sample_id)
            self._append_line(self.manifest_path, entry.to_json())
            self._entries[entry.sample_id] = entry

    def entries(self) -> list[ManifestEntry]:
        return list(self._entries.values())

    def get(self, sample_id: str) -> ManifestEntry:
        try:
            return self._entries[sample_id]
        except KeyError:
            raise UnknownSample(sample_id) from None

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, sample_id: str) -> bool:
        return sample_id in self._entries

    def audio_file(self, sample_id: str) -> Path:
        return self.root / self.get(sample_id).audio_path

    # -- provenance -----------------------------------------------------------

    def log_event(self, event: dict) -> None:
        with self._lock:
            self._append_line(self.provenance_path, event)

    def events(self) -> list[dict]:
        return _read_jsonl(self.provenance_path)

    # -- statistics -----------------------------------------------------------

    def stats(self) -> ManifestStats:
        per_channel: dict[str, int] = {}
        total_s = 0.0
        for entry in self._entries.values():
            per_channel[entry.channel_id] = per_channel.get(entry.channel_id, 0) + 1
            total_s += entry.duration_s
        histogram: dict[str, int] = {}
        for event in self.events():
            if event.get("event") == "cue_rejected":
                reason = event.get("reason", "unknown")
                histogram[reason] = histogram.get(reason, 0) + 1
        return ManifestStats(
            sample_count=len(self._entries),
            total_hours=total_s / 3600.0,
            per_channel=per_channel,
            reject_histogram=histogram,
        )

    # -- review ---------------------------------------------------------------

    @staticmethod
    def _verdict_pair(verdict: ReviewVerdict, original: str) -> tuple[str, str]:
        """(reference, hypothesis) pair a verdict contributes to the pooled
        estimate: the human text is the reference, the crawled caption the
        hypothesis under test. Corrections are normalized first so casing
        or punctuation in human input does not inflate the rate."""
        if verdict.verdict is Verdict.CORRECTED:
            return normalize(verdict.corrected_transcript or ""), original
        return original, original

    def _absorb_verdict(self, verdict: ReviewVerdict) -> None:
        entry = self._entries.get(verdict.sample_id)
        if entry is None:
            raise UnknownSample(verdict.sample_id)
        ref, hyp = self._verdict_pair(verdict, entry.transcript)
        self._review.pooled = self._review.pooled + align_tokens(ref.split(), hyp.split())
        self._review.reviewed += 1

    def record_verdict(self, verdict: ReviewVerdict) -> float:
        """Persist a verdict and return the updated pooled error estimate.

        A corrected verdict must actually differ from the stored transcript
        (after normalization); raises ``ValueError`` otherwise and
        :class:`UnknownSample` for ids not in the manifest.
        """
        with self._lock:
            entry = self._entries.get(verdict.sample_id)
            if entry is None:
                raise UnknownSample(verdict.sample_id)
            if verdict.verdict is Verdict.CORRECTED:
                corrected = normalize(verdict.corrected_transcript or "")
                if corrected == entry.transcript:
                    raise ValueError("correction equals the original transcript")
            self._append_line(self.review_path, verdict.to_json())
            self._absorb_verdict(verdict)
            return self.review_estimate()

    def reviewed_count(self) -> int:
        return self._review.reviewed

    def reviewed_sample_ids(self) -> set[str]:
        return {row.get("sample_id", "") for row in _read_jsonl(self.review_path)}

    def review_estimate(self) -> float | None:
        """Pooled error rate over all verdicts so far; None before any
        review (or if every reviewed reference is empty)."""
        if self._review.pooled.reference_length == 0:
            return None
        return wer(self._review.pooled)

    def recompute_review_estimate(self) -> float | None:
        """Recompute the estimate from the review log alone (consistency
        check for the incrementally maintained value)."""
        pooled = EditCounts()
        for row in _read_jsonl(self.review_path):
            verdict = ReviewVerdict.from_json(row)
            entry = self.get(verdict.sample_id)
            ref, hyp = self._verdict_pair(verdict, entry.transcript)
            pooled = pooled + align_tokens(ref.split(), hyp.split())
        if pooled.reference_length == 0:
            return None
        return wer(pooled)
