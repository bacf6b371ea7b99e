"""Command-line entry point: crawl, process, stats, review-serve.

``crawl`` and ``process`` are separate subcommands so the filtering
pipeline runs fully offline on fixture directories; continuous crawling is
achieved by re-invoking ``crawl`` with the persisted frontier snapshot.
Exit codes: 0 on success (rejected samples are still success), 1 on
configuration or I/O failure, 2 on bad command lines.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .clients import StaticSearch
from .crawl import SOURCE_CHANNEL, SOURCE_KEYWORD, CrawlFrontier, FrontierConfigError
from .manifest import ManifestCorrupt, ManifestStore
from .model import VideoRecord
from .pipeline import ConfigError, load_config, run_process

log = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speechmill",
        description="Build filtered, aligned speech datasets from captioned videos.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="run the filter/align/cut pipeline over an input directory")
    p.add_argument("input", type=Path, help="directory of <id>.json/.srt|.vtt/.wav fixtures")
    p.add_argument("--config", type=Path, default=None, help="INI config file")
    p.add_argument("--out", type=Path, required=True, help="dataset output directory")
    p.add_argument("--seed", type=int, default=None, help="override the run seed")
    p.add_argument("--workers", type=int, default=None, help="worker pool width")
    p.add_argument("--frontier", type=Path, default=None,
                   help="process videos pending in this crawl-frontier snapshot "
                        "(drained and written back with channel acceptances)")

    c = sub.add_parser("crawl", help="advance the crawl frontier against a search backend")
    c.add_argument("--config", type=Path, default=None)
    c.add_argument("--frontier", type=Path, required=True, help="frontier snapshot (JSON, created if absent)")
    c.add_argument("--search-fixture", type=Path, required=True,
                   help="JSON file with keyword_results/channel_results stubs")
    c.add_argument("--rounds", type=int, default=1, help="keyword queries to issue")

    s = sub.add_parser("stats", help="report manifest statistics")
    s.add_argument("--out", type=Path, required=True, help="dataset directory")

    r = sub.add_parser("review-serve", help="serve the human validation API and UI")
    r.add_argument("--out", type=Path, required=True, help="dataset directory")
    r.add_argument("--bind", default="127.0.0.1:8707", help="host:port to listen on")
    r.add_argument("--ui", type=Path, default=None,
                   help="built UI bundle directory (default: autodetect frontend/dist)")
    return parser


def cmd_process(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, dict(os.environ))
    try:
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed, filters=replace(cfg.filters, rng_seed=args.seed))
        if args.workers is not None:
            cfg = replace(cfg, workers=args.workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    summary = run_process(args.input, args.out, cfg, frontier_path=args.frontier)
    print(f"videos processed : {summary.videos}")
    print(f"cue candidates   : {summary.candidates}")
    print(f"accepted samples : {summary.accepted_samples} ({summary.accepted_cues} cues)")
    print(f"deferred         : {summary.deferred_cues} cues in {summary.deferred_videos} videos")
    for reason in sorted(summary.rejected):
        print(f"rejected {reason:<24}: {summary.rejected[reason]}")
    if not summary.balances():
        log.error("candidate accounting does not balance: %s", summary)
        return 1
    return 0


def _load_search_fixture(path: Path) -> StaticSearch:
    data = json.loads(path.read_text("utf-8"))

    def stubs(rows: list[dict]) -> list[VideoRecord]:
        return [
            VideoRecord(
                video_id=r["video_id"],
                channel_id=r.get("channel_id", ""),
                title=r.get("title", ""),
                duration_s=float(r.get("duration_s", 0.0)),
            )
            for r in rows
        ]

    return StaticSearch(
        keyword_results={k: stubs(v) for k, v in data.get("keyword_results", {}).items()},
        channel_results={k: stubs(v) for k, v in data.get("channel_results", {}).items()},
    )


def cmd_crawl(args: argparse.Namespace) -> int:
    search = _load_search_fixture(args.search_fixture)
    frontier = CrawlFrontier.load(args.frontier) if args.frontier.is_file() else CrawlFrontier()
    added = 0
    for _ in range(args.rounds):
        keyword = frontier.next_keyword()
        added += frontier.enqueue_results(SOURCE_KEYWORD, search.search(keyword))
    for channel_id in sorted(frontier.channel_memory):
        added += frontier.enqueue_results(SOURCE_CHANNEL, search.list_channel(channel_id))
    frontier.save(args.frontier)
    print(f"enqueued {added} new candidates; {frontier.pending_count()} pending; "
          f"{len(frontier.channel_memory)} channels memorized")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    stats = ManifestStore(args.out).stats()
    print(json.dumps(
        {
            "samples": stats.sample_count,
            "total_hours": round(stats.total_hours, 6),
            "per_channel": dict(sorted(stats.per_channel.items())),
            "reject_histogram": dict(sorted(stats.reject_histogram.items())),
        },
        indent=2,
    ))
    return 0


def cmd_review_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .review import create_app

    ui_dir = args.ui
    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    host, _, port = args.bind.rpartition(":")
    if not port.isdigit():
        raise ConfigError(f"--bind must look like host:port, got {args.bind!r}")
    app = create_app(args.out, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    except OSError as exc:
        log.error("cannot bind %s: %s", args.bind, exc)
        return 1
    return 0


_COMMANDS = {
    "process": cmd_process,
    "crawl": cmd_crawl,
    "stats": cmd_stats,
    "review-serve": cmd_review_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, FrontierConfigError, ManifestCorrupt) as exc:
        log.error("%s", exc)
        return 1
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
