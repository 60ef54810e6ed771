"""HTTP service wrapping recovery, recoloring, transfer, and the library.

Recovery jobs run on a small worker pool and are polled by id; results are
persisted under the working directory (cmap.json, field.csv, recon.png) so
the CLI can operate on the same artifacts. Every float in a JSON response
is serialized with 9 significant digits.
"""

from __future__ import annotations

import base64
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

from fastapi import FastAPI, Form, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import apps
from .colormapping import decode_image, encode_png, parse_field, read_field, render, write_field
from .recovery import OptimizerConfig, RecoveryResult, recover
from .serialize import round_floats
from .spline import colormap_from_dict, colormap_to_dict, load_colormap, save_colormap
from .synth import bundled_colormaps

MAX_UPLOAD_BYTES = 16 * 1024 * 1024

_STATUS_ORDER = {"queued": 0, "running": 1, "done": 2, "failed": 2}


@dataclass
class JobRecord:
    job_id: str
    status: str = "queued"
    progress_done: int = 0
    progress_total: int = 0
    error: str | None = None
    payload: dict | None = None  # response extras once done

    def snapshot(self) -> dict:
        out = {
            "jobId": self.job_id,
            "status": self.status,
            "progress": {"done": self.progress_done, "total": self.progress_total},
        }
        if self.error is not None:
            out["error"] = self.error
        if self.payload is not None:
            out.update(self.payload)
        return out


class JobStore:
    """Snapshot-consistent job records; status only moves forward."""

    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, JobRecord] = {}

    def create(self) -> str:
        job_id = uuid.uuid4().hex
        with self._lock:
            self._jobs[job_id] = JobRecord(job_id=job_id)
        return job_id

    def snapshot(self, job_id: str) -> dict | None:
        with self._lock:
            record = self._jobs.get(job_id)
            return None if record is None else record.snapshot()

    def set_status(self, job_id: str, status: str, error: str | None = None,
                   payload: dict | None = None) -> None:
        with self._lock:
            record = self._jobs[job_id]
            if _STATUS_ORDER[status] < _STATUS_ORDER[record.status]:
                raise RuntimeError(f"illegal status transition {record.status} -> {status}")
            record.status = status
            if error is not None:
                record.error = error
            if payload is not None:
                record.payload = payload

    def set_progress(self, job_id: str, done: int, total: int) -> None:
        with self._lock:
            record = self._jobs[job_id]
            record.progress_done = max(record.progress_done, done)
            record.progress_total = total

    def is_done(self, job_id: str) -> bool:
        with self._lock:
            record = self._jobs.get(job_id)
            return record is not None and record.status == "done"


def _json(content, status_code: int = 200) -> JSONResponse:
    return JSONResponse(round_floats(content), status_code=status_code)


def _error(status_code: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status_code)


def create_app(workdir, max_workers: int = 2) -> FastAPI:
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    store = JobStore()
    executor = ThreadPoolExecutor(max_workers=max_workers)

    app = FastAPI(title="cmaprec")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.job_store = store
    app.state.workdir = workdir

    def run_job(job_id: str, image, config: OptimizerConfig) -> None:
        try:
            store.set_status(job_id, "running")
            result = recover(
                image, config,
                progress=lambda done, total: store.set_progress(job_id, done, total),
            )
            payload = persist_result(job_id, result)
            store.set_status(job_id, "done", payload=payload)
        except Exception as exc:  # noqa: BLE001 - job isolation
            store.set_status(job_id, "failed", error=str(exc))

    def persist_result(job_id: str, result: RecoveryResult) -> dict:
        job_dir = workdir / job_id
        job_dir.mkdir(parents=True, exist_ok=True)
        save_colormap(result.cmap, job_dir / "cmap.json")
        write_field(result.field, job_dir / "field.csv")
        # render the reconstruction from the round-tripped artifacts so a
        # later recolor with the served colormap is byte-identical
        stored_cmap = load_colormap(job_dir / "cmap.json")
        stored_field = read_field(job_dir / "field.csv")
        png = encode_png(render(stored_field, stored_cmap))
        (job_dir / "recon.png").write_bytes(png)
        colormap_json = json.loads((job_dir / "cmap.json").read_text())
        return {
            "colormap": colormap_json,
            "controlPoints": colormap_json["control_points"],
            "histogram": apps.field_histogram(stored_field).tolist(),
            "preview": "data:image/png;base64," + base64.b64encode(png).decode("ascii"),
            "converged": result.converged,
            "direction": result.direction,
            "iterations": len(result.trace),
        }

    @app.post("/api/recover", status_code=202)
    async def post_recover(image: UploadFile | None = None,
                           config: str | None = Form(default=None)):
        if image is None:
            return _error(400, "multipart field 'image' is required")
        data = await image.read()
        if len(data) > MAX_UPLOAD_BYTES:
            return _error(413, f"image exceeds {MAX_UPLOAD_BYTES} bytes")
        try:
            decoded = decode_image(data)
        except Exception as exc:  # noqa: BLE001
            return _error(400, f"cannot decode image: {exc}")
        try:
            config_obj = OptimizerConfig.from_dict(json.loads(config) if config else {})
        except (TypeError, ValueError) as exc:
            return _error(400, f"bad optimizer config: {exc}")
        job_id = store.create()
        executor.submit(run_job, job_id, decoded, config_obj)
        return _json({"jobId": job_id}, status_code=202)

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        snapshot = store.snapshot(job_id)
        if snapshot is None:
            return _error(404, f"unknown job {job_id}")
        return _json(snapshot)

    def load_job_result(job_id: str):
        job_dir = workdir / job_id
        return load_colormap(job_dir / "cmap.json"), read_field(job_dir / "field.csv")

    @app.post("/api/recolor")
    def post_recolor(body: dict):
        job_id = body.get("jobId")
        if not job_id or store.snapshot(job_id) is None:
            return _error(404, f"unknown job {job_id!r}")
        if not store.is_done(job_id):
            return _error(409, "job is not done yet")
        if "colormap" not in body:
            return _error(400, "missing 'colormap'")
        try:
            cmap = colormap_from_dict(body["colormap"])
        except Exception as exc:  # noqa: BLE001
            return _error(400, f"bad colormap: {exc}")
        _, stored_field = load_job_result(job_id)
        png = encode_png(render(stored_field, cmap))
        return Response(content=png, media_type="image/png")

    @app.post("/api/transfer")
    async def post_transfer(field: UploadFile | None = None,
                            jobId: str | None = Form(default=None),
                            colormap: str | None = Form(default=None)):
        if field is None:
            return _error(400, "multipart field 'field' (CSV) is required")
        if jobId is not None:
            if store.snapshot(jobId) is None:
                return _error(404, f"unknown job {jobId!r}")
            if not store.is_done(jobId):
                return _error(409, "job is not done yet")
            cmap, _ = load_job_result(jobId)
        elif colormap is not None:
            try:
                cmap = colormap_from_dict(json.loads(colormap))
            except Exception as exc:  # noqa: BLE001
                return _error(400, f"bad colormap: {exc}")
        else:
            return _error(400, "provide either 'jobId' or 'colormap'")
        try:
            parsed = parse_field((await field.read()).decode("utf-8"))
        except Exception as exc:  # noqa: BLE001
            return _error(400, f"bad field CSV: {exc}")
        png = encode_png(apps.transfer(cmap, parsed))
        return Response(content=png, media_type="image/png")

    @app.get("/api/colormaps")
    def get_colormaps():
        return _json([colormap_to_dict(c) for c in bundled_colormaps()])

    return app
