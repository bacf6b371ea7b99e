"""End-to-end processing: parse -> filter -> gate -> merge -> refine -> cut.

A worker pool handles videos in parallel, but per-video results are
committed to the manifest in submission order, so a run over the same
inputs with the same config is byte-identical. Candidate accounting is at
cue granularity and always balances:
candidates == accepted + sum(reject histogram) + deferred.
"""
from __future__ import annotations

import configparser
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .captions import CaptionFormat, CaptionParseError, CaptionTrack, parse_track
from .clients import (
    AlignerClient,
    AsrClient,
    ClientError,
    DirectoryMedia,
    EchoAsr,
    FailingAligner,
    FailingAsr,
    GarbageAsr,
    MarginAligner,
    MediaClient,
)
from .filters import FilterConfig, filter_cue, overlapping_cue_indices, video_gate
from .manifest import AUDIO_DIR, ManifestStore
from .model import ManifestEntry, RejectReason, Utterance, VideoRecord, to_ms
from .segmenter import cut_audio, merge_adjacent, refine_boundaries

log = logging.getLogger(__name__)

# Cues lost to media extraction failures get this provenance reason; it is
# outside the utterance lifecycle (no utterance survives to carry it).
MEDIA_ERROR_REASON = "media_error"


class ConfigError(Exception):
    pass


@dataclass(frozen=True, slots=True)
class PipelineConfig:
    filters: FilterConfig = FilterConfig()
    seed: int = 0
    workers: int = 4
    version: str = __version__
    asr: str = "echo"  # echo | garbage | failing
    aligner: str = "margin"  # margin | failing
    aligner_left_margin_s: float = 0.0
    aligner_right_margin_s: float = 0.0
    media: str = "directory"

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


# Environment variables SPEECHMILL_<KEY> override config values; CLI flags
# override both.
ENV_PREFIX = "SPEECHMILL_"


def load_config(path: Path | str | None, env: dict[str, str] | None = None) -> PipelineConfig:
    """Read the INI-style config file; a None path means all defaults.

    Sections: [filters] (FilterConfig fields), [pipeline] (seed, workers,
    version), [clients] (asr, aligner, margins, media). The pipeline seed
    doubles as the filter rng_seed unless [filters] sets one explicitly.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc

    def section(name: str) -> dict[str, str]:
        return dict(parser[name]) if parser.has_section(name) else {}

    pipe = section("pipeline")
    clients = section("clients")
    overrides = {
        k[len(ENV_PREFIX) :].lower(): v
        for k, v in (env or {}).items()
        if k.startswith(ENV_PREFIX)
    }
    for key in ("seed", "workers", "version"):
        if key in overrides:
            pipe[key] = overrides[key]

    try:
        filters = FilterConfig.from_mapping(section("filters"))
        if "seed" in pipe and "rng_seed" not in section("filters"):
            filters = replace(filters, rng_seed=int(pipe["seed"]))
        return PipelineConfig(
            filters=filters,
            seed=int(pipe.get("seed", 0)),
            workers=int(pipe.get("workers", 4)),
            version=pipe.get("version", __version__),
            asr=clients.get("asr", "echo"),
            aligner=clients.get("aligner", "margin"),
            aligner_left_margin_s=float(clients.get("aligner_left_margin_s", 0.0)),
            aligner_right_margin_s=float(clients.get("aligner_right_margin_s", 0.0)),
            media=clients.get("media", "directory"),
        )
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad configuration value: {exc}") from exc


def discover_videos(input_dir: Path) -> list[tuple[dict, Path]]:
    """Locate videos in an input directory, sorted by metadata file name.

    Per video id three files: ``<id>.json`` (metadata: video_id, channel_id,
    title, duration_s), ``<id>.srt`` or ``<id>.vtt`` (captions) and
    ``<id>.wav`` (full-length audio). Returns (metadata, caption path).
    """
    found = []
    for meta_path in sorted(input_dir.glob("*.json")):
        try:
            meta = json.loads(meta_path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad video metadata {meta_path}: {exc}") from exc
        meta.setdefault("video_id", meta_path.stem)
        caption_path = None
        for ext in (".srt", ".vtt"):
            cand = meta_path.with_suffix(ext)
            if cand.is_file():
                caption_path = cand
                break
        if caption_path is None:
            log.warning("skipping %s: no caption file", meta["video_id"])
            continue
        found.append((meta, caption_path))
    return found


def _parse_caption_file(
    caption_path: Path, video_id: str, events: list[dict]
) -> CaptionTrack | None:
    fmt = CaptionFormat.SRT if caption_path.suffix == ".srt" else CaptionFormat.WEBVTT
    try:
        return parse_track(caption_path.read_bytes(), fmt)
    except CaptionParseError as exc:
        events.append(
            {"event": "track_unparseable", "video_id": video_id, "error": str(exc)}
        )
        return None


def prepare_videos(
    input_dir: Path,
) -> tuple[list[tuple[VideoRecord, CaptionTrack]], list[dict]]:
    """Parse every discovered video's caption track up front.

    Returns the parseable (record-with-track, track) pairs plus provenance
    events for files that yielded no cues.
    """
    prepared: list[tuple[VideoRecord, CaptionTrack]] = []
    events: list[dict] = []
    for meta, caption_path in discover_videos(input_dir):
        track = _parse_caption_file(caption_path, meta["video_id"], events)
        if track is None:
            continue
        record = VideoRecord(
            video_id=meta["video_id"],
            channel_id=meta.get("channel_id", ""),
            title=meta.get("title", ""),
            duration_s=float(meta.get("duration_s", 0.0)),
            caption_track=track.cues,
        )
        prepared.append((record, track))
    return prepared, events


def prepare_from_frontier(
    frontier, input_dir: Path
) -> tuple[list[tuple[VideoRecord, CaptionTrack]], list[dict]]:
    """Drain the frontier's pending queue, resolving captions (and metadata
    defaults) from the input directory by video id.

    Videos without local caption material are skipped with an event; a
    production deployment would fetch them through real adapters instead.
    """
    prepared: list[tuple[VideoRecord, CaptionTrack]] = []
    events: list[dict] = []
    while (stub := frontier.next_video()) is not None:
        caption_path = None
        for ext in (".srt", ".vtt"):
            cand = input_dir / f"{stub.video_id}{ext}"
            if cand.is_file():
                caption_path = cand
                break
        if caption_path is None:
            events.append(
                {"event": "video_unavailable", "video_id": stub.video_id}
            )
            continue
        track = _parse_caption_file(caption_path, stub.video_id, events)
        if track is None:
            continue
        meta = {}
        meta_path = input_dir / f"{stub.video_id}.json"
        if meta_path.is_file():
            try:
                meta = json.loads(meta_path.read_text("utf-8"))
            except json.JSONDecodeError:
                meta = {}
        record = VideoRecord(
            video_id=stub.video_id,
            channel_id=stub.channel_id or meta.get("channel_id", ""),
            title=stub.title or meta.get("title", ""),
            duration_s=float(meta.get("duration_s", stub.duration_s)),
            caption_track=track.cues,
        )
        prepared.append((record, track))
    return prepared, events


def build_clients(
    cfg: PipelineConfig, input_dir: Path, videos: list[VideoRecord]
) -> tuple[AsrClient, AlignerClient, MediaClient]:
    if cfg.asr == "echo":
        asr: AsrClient = EchoAsr.from_videos(videos)
    elif cfg.asr == "garbage":
        asr = GarbageAsr()
    elif cfg.asr == "failing":
        asr = FailingAsr()
    else:
        raise ConfigError(f"unknown asr client {cfg.asr!r}")

    if cfg.aligner == "margin":
        aligner: AlignerClient = MarginAligner(
            cfg.aligner_left_margin_s, cfg.aligner_right_margin_s
        )
    elif cfg.aligner == "failing":
        aligner = FailingAligner()
    else:
        raise ConfigError(f"unknown aligner client {cfg.aligner!r}")

    if cfg.media == "directory":
        media: MediaClient = DirectoryMedia(input_dir)
    else:
        raise ConfigError(f"unknown media client {cfg.media!r}")
    return asr, aligner, media


@dataclass
class VideoOutcome:
    video_id: str
    events: list[dict] = field(default_factory=list)
    samples: list[dict] = field(default_factory=list)  # manifest rows, in order
    candidates: int = 0
    accepted_cues: int = 0
    deferred_cues: int = 0
    rejected: dict[str, int] = field(default_factory=dict)


@dataclass
class RunSummary:
    videos: int = 0
    candidates: int = 0
    accepted_cues: int = 0
    accepted_samples: int = 0
    deferred_cues: int = 0
    deferred_videos: int = 0
    rejected: dict[str, int] = field(default_factory=dict)

    def balances(self) -> bool:
        return (
            self.candidates
            == self.accepted_cues + sum(self.rejected.values()) + self.deferred_cues
        )


def _sample_id(video_id: str, start_ms: int, end_ms: int) -> str:
    return f"{video_id}-{start_ms:08d}-{end_ms:08d}"


def process_video(
    video: VideoRecord,
    track: CaptionTrack,
    cfg: PipelineConfig,
    audio_out: Path,
    asr: AsrClient,
    aligner: AlignerClient,
    media: MediaClient,
) -> VideoOutcome:
    """Run the per-video stages and stage manifest rows.

    Audio files are written here (names are unique per sample); manifest and
    provenance lines are only staged so the caller can commit them in
    deterministic order.
    """
    outcome = VideoOutcome(video_id=video.video_id, candidates=len(track.cues))

    def reject_cue(index: int, reason: str) -> None:
        outcome.rejected[reason] = outcome.rejected.get(reason, 0) + 1
        outcome.events.append(
            {
                "event": "cue_rejected",
                "video_id": video.video_id,
                "cue_index": index,
                "reason": reason,
            }
        )

    overlaps = overlapping_cue_indices(track)
    passing = []
    for cue in track.cues:
        verdict = filter_cue(cue, track, cfg.filters, overlaps)
        if verdict.passed:
            passing.append((cue, verdict.transcript or ""))
        else:
            assert verdict.reason is not None
            reject_cue(cue.index, verdict.reason.value)

    if not passing:
        outcome.events.append(
            {"event": "video_done", "video_id": video.video_id, "accepted": 0}
        )
        return outcome

    try:
        audio_ref = media.fetch(video.video_id)
    except ClientError as exc:
        for cue, _ in passing:
            reject_cue(cue.index, MEDIA_ERROR_REASON)
        outcome.events.append(
            {"event": "media_error", "video_id": video.video_id, "error": str(exc)}
        )
        return outcome
    video = replace(video, audio_ref=audio_ref)

    try:
        gate = video_gate(video, asr, cfg.filters, passing)
    except ClientError as exc:
        if exc.retryable:
            outcome.deferred_cues = len(passing)
            outcome.events.append(
                {"event": "video_deferred", "video_id": video.video_id, "error": str(exc)}
            )
            return outcome
        raise
    outcome.events.append(
        {
            "event": "video_gate",
            "video_id": video.video_id,
            "passed": gate.passed,
            "score": round(gate.score, 6),
            "probe_cues": [p.cue_index for p in gate.probes],
        }
    )
    if not gate.passed:
        for cue, _ in passing:
            reject_cue(cue.index, RejectReason.SIMILARITY_GATE.value)
        return outcome

    candidates = [
        Utterance(
            source_video=video.video_id,
            start_s=cue.start_s,
            end_s=cue.end_s,
            transcript=transcript,
            cue_indices=(cue.index,),
        )
        for cue, transcript in passing
    ]

    for utterance in merge_adjacent(candidates):
        refined = refine_boundaries(utterance, aligner, video)
        if refined.aligner_failed:
            outcome.events.append(
                {
                    "event": "alignment_unavailable",
                    "video_id": video.video_id,
                    "cue_indices": list(utterance.cue_indices),
                }
            )
        aligned = refined.utterance
        start_ms, end_ms = to_ms(aligned.start_s), to_ms(aligned.end_s)
        sample_id = _sample_id(video.video_id, start_ms, end_ms)
        rel_path = f"{AUDIO_DIR}/{video.video_id}/{sample_id}.wav"
        try:
            _, accepted = cut_audio(aligned, video, media, audio_out / rel_path)
        except ClientError as exc:
            for index in utterance.cue_indices:
                reject_cue(index, MEDIA_ERROR_REASON)
            outcome.events.append(
                {"event": "media_error", "video_id": video.video_id, "error": str(exc)}
            )
            continue
        outcome.samples.append(
            {
                "sample_id": sample_id,
                "audio_path": rel_path,
                "transcript": accepted.transcript,
                "duration_s": (end_ms - start_ms) / 1000.0,
                "video_id": video.video_id,
                "channel_id": video.channel_id,
                "start_s": start_ms / 1000.0,
                "end_s": end_ms / 1000.0,
                "pipeline_version": cfg.version,
            }
        )
        outcome.accepted_cues += len(accepted.cue_indices)
    outcome.events.append(
        {
            "event": "video_done",
            "video_id": video.video_id,
            "accepted": len(outcome.samples),
        }
    )
    return outcome


def run_process(
    input_dir: Path | str,
    out_dir: Path | str,
    cfg: PipelineConfig,
    frontier_path: Path | str | None = None,
) -> RunSummary:
    """Process videos into a dataset directory.

    Candidates come either from the input directory itself or, when
    ``frontier_path`` is given, from that crawl-frontier snapshot (captions
    and audio still resolve from the input directory). In frontier mode,
    channels that produced accepted samples are memorized and the drained
    snapshot is written back, so the next crawl mines them first.

    Re-running over an existing dataset directory is idempotent: samples
    already in the manifest are skipped.
    """
    input_dir = Path(input_dir)
    if not input_dir.is_dir():
        raise ConfigError(f"input directory not found: {input_dir}")
    store = ManifestStore(out_dir)

    frontier = None
    if frontier_path is not None:
        from .crawl import CrawlFrontier

        frontier_path = Path(frontier_path)
        if not frontier_path.is_file():
            raise ConfigError(f"frontier snapshot not found: {frontier_path}")
        frontier = CrawlFrontier.load(frontier_path)
        prepared, parse_events = prepare_from_frontier(frontier, input_dir)
    else:
        prepared, parse_events = prepare_videos(input_dir)

    for event in parse_events:
        store.log_event(event)
    asr, aligner, media = build_clients(cfg, input_dir, [v for v, _ in prepared])

    summary = RunSummary(videos=len(prepared))
    records = {video.video_id: video for video, _ in prepared}
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [
            pool.submit(process_video, video, track, cfg, store.root, asr, aligner, media)
            for video, track in prepared
        ]
        # Commit in submission order: identical inputs -> identical bytes.
        for future in futures:
            outcome = future.result()
            for row in outcome.samples:
                if row["sample_id"] not in store:
                    store.append(ManifestEntry.from_json(row))
            for event in outcome.events:
                store.log_event(event)
            if frontier is not None and outcome.samples:
                frontier.record_acceptance(records[outcome.video_id])
            summary.candidates += outcome.candidates
            summary.accepted_cues += outcome.accepted_cues
            summary.accepted_samples += len(outcome.samples)
            summary.deferred_cues += outcome.deferred_cues
            if outcome.deferred_cues:
                summary.deferred_videos += 1
            for reason, count in outcome.rejected.items():
                summary.rejected[reason] = summary.rejected.get(reason, 0) + count
    if frontier is not None:
        frontier.save(frontier_path)
    return summary
