"""HTTP API behind the human validation workflow.

Serves random sample batches with their audio, accepts confirm/correct
verdicts, and reports the running pooled error-rate estimate. Every
estimate in a response is recomputable from the review log alone; the
server holds no other truth.

Routes (JSON unless noted):

* ``GET  /api/samples?n=&seed=&exclude_reviewed=`` — random batch, default 8
* ``POST /api/verdict`` — one verdict; returns the updated estimate
* ``GET  /api/stats`` — {samples, reviewed, pooled_wer}
* ``GET  /audio/{sample_id}.wav`` — audio/wav with byte-range support
* ``/`` — the review UI bundle when one is available
"""
from __future__ import annotations

import random
import re
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .manifest import ManifestStore, UnknownSample
from .model import ReviewVerdict, Verdict

DEFAULT_BATCH = 8

_RANGE = re.compile(r"bytes=(\d*)-(\d*)$")

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>speechmill review</title></head>
<body>
<h1>speechmill review service</h1>
<p>No UI bundle is installed. The JSON API is live under <code>/api/</code>:
<code>GET /api/samples?n=8</code>, <code>POST /api/verdict</code>,
<code>GET /api/stats</code>, <code>GET /audio/{sample_id}.wav</code>.</p>
<p>Build the frontend (<code>npm run build</code> in <code>frontend/</code>)
and restart with <code>--ui</code> pointing at <code>frontend/dist</code>.</p>
</body></html>
"""


class VerdictIn(BaseModel):
    sample_id: str
    verdict: str
    corrected_transcript: str | None = None
    reviewer_id: str = "anonymous"
    timestamp: str | None = None


def _rfc3339_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def create_app(
    store: ManifestStore | Path | str,
    ui_dir: Path | str | None = None,
    default_seed: int | None = None,
) -> FastAPI:
    """Build the review application over one dataset directory.

    ``default_seed`` makes batch sampling deterministic when the request
    does not carry its own seed (useful in tests).
    """
    if not isinstance(store, ManifestStore):
        store = ManifestStore(store)
    app = FastAPI(title="speechmill review", version="1")
    app.state.store = store

    @app.get("/api/samples")
    def get_samples(n: int = DEFAULT_BATCH, seed: int | None = None,
                    exclude_reviewed: bool = False) -> JSONResponse:
        if n < 1:
            raise HTTPException(status_code=400, detail="n must be positive")
        entries = store.entries()
        if exclude_reviewed:
            reviewed = store.reviewed_sample_ids()
            entries = [e for e in entries if e.sample_id not in reviewed]
        if not entries:
            return JSONResponse({"samples": [], "empty": True})
        rng = random.Random(seed if seed is not None else default_seed)
        batch = rng.sample(entries, min(n, len(entries)))
        return JSONResponse(
            {
                "samples": [
                    {
                        "sample_id": e.sample_id,
                        "transcript": e.transcript,
                        "duration_s": e.duration_s,
                        "audio_url": f"/audio/{e.sample_id}.wav",
                    }
                    for e in batch
                ],
                "empty": False,
            }
        )

    @app.post("/api/verdict")
    def post_verdict(body: VerdictIn) -> dict:
        try:
            kind = Verdict(body.verdict)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown verdict {body.verdict!r}")
        try:
            verdict = ReviewVerdict(
                sample_id=body.sample_id,
                verdict=kind,
                corrected_transcript=body.corrected_transcript,
                reviewer_id=body.reviewer_id,
                timestamp=body.timestamp or _rfc3339_now(),
            )
            estimate = store.record_verdict(verdict)
        except UnknownSample:
            raise HTTPException(status_code=404, detail=f"unknown sample {body.sample_id!r}")
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"accepted": True, "current_estimate": estimate}

    @app.get("/api/stats")
    def get_stats() -> dict:
        return {
            "samples": len(store),
            "reviewed": store.reviewed_count(),
            "pooled_wer": store.review_estimate(),
        }

    @app.get("/audio/{sample_id}.wav")
    def get_audio(sample_id: str, request: Request) -> Response:
        try:
            path = store.audio_file(sample_id)
        except UnknownSample:
            raise HTTPException(status_code=404, detail=f"unknown sample {sample_id!r}")
        root = store.audio_root.resolve()
        resolved = path.resolve()
        # The manifest is data: never follow a path it names outside the
        # dataset's audio directory.
        if not resolved.is_file() or not resolved.is_relative_to(root):
            raise HTTPException(status_code=404, detail="audio unavailable")
        return _serve_file_range(resolved, request.headers.get("range"))

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index() -> str:
            return _FALLBACK_PAGE

    return app


def _serve_file_range(path: Path, range_header: str | None) -> Response:
    data = path.read_bytes()
    total = len(data)
    headers = {"accept-ranges": "bytes"}
    if not range_header:
        return Response(data, media_type="audio/wav", headers=headers)
    m = _RANGE.match(range_header.strip())
    if m is None or (not m.group(1) and not m.group(2)):
        raise HTTPException(status_code=416, detail="malformed range")
    if m.group(1):
        start = int(m.group(1))
        end = int(m.group(2)) if m.group(2) else total - 1
    else:  # suffix form: last N bytes
        length = int(m.group(2))
        if length == 0:
            raise HTTPException(status_code=416, detail="empty suffix range")
        start, end = max(total - length, 0), total - 1
    end = min(end, total - 1)
    if start > end or start >= total:
        raise HTTPException(
            status_code=416,
            detail="range out of bounds",
            headers={"content-range": f"bytes */{total}"},
        )
    headers["content-range"] = f"bytes {start}-{end}/{total}"
    return Response(
        data[start : end + 1],
        status_code=206,
        media_type="audio/wav",
        headers=headers,
    )
