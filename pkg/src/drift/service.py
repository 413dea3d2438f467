"""HTTP tuning service: sessions, live previews, map views, presets.

A session loads one HDR capture, computes the global context and the
exposure pair / enhancement maps once, then serves profile edits by
re-running only the modulation+fusion stage at preview scale. Profile
mutations are serialized per session and versioned; previews always
carry the version they reflect. Presets persist as human-diffable JSON.
"""

from __future__ import annotations

import datetime
import json
import re
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse, Response

from .buffers import ImageBuffer, InvalidImageError
from .enhance import (
    CaptureMetadata,
    TuningProfile,
    UnknownCategoryError,
    default_profile,
    encode_metadata,
    fuse_tone,
    profile_from_dict,
    profile_to_dict,
)
from .io import FileFormatError, decode_image_bytes, encode_png8_bytes
from .lut import InvalidLutError, Lut1D
from .pipeline import PipelineConfig, compute_heuristic_maps, render_tonemap
from .resample import resize_to_max_pixels
from .tiling import plan_tiles
from .tonemap_lite import compute_global_context, tonemap_lite

PREVIEW_MAX_PIXELS = 1 << 20           # <= 1 MP interactive previews
PREVIEW_CACHE_KEEP = 8
PRESET_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]{0,63}$")


def _now_iso() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


@dataclass(frozen=True)
class Preset:
    name: str
    profile: TuningProfile
    metadata_overrides: dict | None = None
    created_at: str = ""


class PresetStore:
    """Directory of <name>.json preset files."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, name: str) -> Path:
        return self.root / f"{name}.json"

    def save(self, preset: Preset, force: bool = False) -> None:
        if not PRESET_NAME_RE.match(preset.name):
            raise ValueError(f"invalid preset name: {preset.name!r}")
        with self._lock:
            path = self._path(preset.name)
            if path.exists() and not force:
                raise FileExistsError(f"preset {preset.name!r} already exists")
            doc = {
                "name": preset.name,
                "profile": profile_to_dict(preset.profile),
                "metadata_overrides": preset.metadata_overrides,
                "created_at": preset.created_at or _now_iso(),
            }
            path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

    def load(self, name: str) -> Preset:
        path = self._path(name)
        if not PRESET_NAME_RE.match(name) or not path.exists():
            raise FileNotFoundError(f"no such preset: {name!r}")
        doc = json.loads(path.read_text())
        return Preset(
            name=doc["name"],
            profile=profile_from_dict(doc["profile"]),
            metadata_overrides=doc.get("metadata_overrides"),
            created_at=doc.get("created_at", ""),
        )

    def names(self) -> list:
        return sorted(p.stem for p in self.root.glob("*.json"))


def save_preset(preset: Preset, store: PresetStore, force: bool = False) -> None:
    store.save(preset, force=force)


def load_preset(name: str, store: PresetStore) -> Preset:
    return store.load(name)


PROFILE_FIELDS = ("lut_weight", "lut_exp0", "lut_exp1", "strength", "strength_map")


def apply_profile_patch(base: TuningProfile, patch: dict) -> TuningProfile:
    """Field-wise patch with per-field validation errors."""
    unknown = set(patch) - set(PROFILE_FIELDS)
    if unknown:
        raise ProfileFieldError(sorted(unknown)[0], "unknown profile field")
    out = base
    for key in PROFILE_FIELDS:
        if key not in patch or patch[key] is None:
            continue
        try:
            out = profile_from_dict({key: patch[key]}, out)
        except (InvalidLutError, ValueError, TypeError) as exc:
            raise ProfileFieldError(key, str(exc)) from exc
    return out


class ProfileFieldError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field


class TuningSession:
    """Cached pipeline state for one loaded capture."""

    def __init__(self, hdr: ImageBuffer, cfg: PipelineConfig,
                 metadata: CaptureMetadata | None = None):
        self.id = uuid.uuid4().hex[:12]
        self.hdr = hdr
        self.cfg = cfg
        self.metadata = metadata
        if metadata is not None:
            self.meta_vec = encode_metadata(metadata, cfg.registry)
        else:
            self.meta_vec = np.zeros(cfg.registry.n_features)
        self.ctx = compute_global_context(hdr)
        self.preview_hdr = resize_to_max_pixels(hdr, PREVIEW_MAX_PIXELS)
        self.preview_scale = hdr.width / self.preview_hdr.width
        self.pair = tonemap_lite(self.preview_hdr, self.ctx, cfg.lite)
        self.maps = compute_heuristic_maps(self.preview_hdr, self.ctx,
                                           self.meta_vec, cfg)
        self.profile = default_profile()
        self.version = 0
        self.previews: dict = {}
        self.export_jobs: dict = {}
        self.lock = threading.RLock()
        self.previews[0] = self._render_preview(self.profile)

    def _render_preview(self, profile: TuningProfile) -> bytes:
        _, enhanced = fuse_tone(self.pair, self.maps, profile)
        return encode_png8_bytes(enhanced)

    def tune(self, patch: dict) -> int:
        """Apply a partial profile, bump the version, render the preview."""
        with self.lock:
            new_profile = apply_profile_patch(self.profile, patch)
            preview = self._render_preview(new_profile)
            self.profile = new_profile
            self.version += 1
            self.previews[self.version] = preview
            while len(self.previews) > PREVIEW_CACHE_KEEP:
                del self.previews[min(self.previews)]
            return self.version

    def preview_bytes(self, version: int | None = None) -> tuple:
        with self.lock:
            if version is not None and version in self.previews:
                return self.previews[version], version
            return self.previews[max(self.previews)], max(self.previews)

    def map_plane(self, kind: str) -> ImageBuffer:
        if kind in ("w_y", "w_c0", "w_c1"):
            plane = getattr(self.maps, kind).astype(np.float64)
        elif kind == "g":
            lo, hi = self.maps.g_bounds
            plane = (self.maps.g.astype(np.float64) - lo) / (hi - lo)
        else:
            raise KeyError(kind)
        from .buffers import ColorSpace

        return ImageBuffer(np.clip(plane, 0, 1).astype(np.float32), ColorSpace.LUMA)

    def start_export(self, out_dir: Path, tiles: str = "auto", overlap: int = 50) -> str:
        job_id = uuid.uuid4().hex[:8]
        with self.lock:
            profile = self.profile
            self.export_jobs[job_id] = {"status": "pending", "path": None, "error": None}

        def work():
            try:
                if tiles == "auto":
                    from .tiling import auto_grid

                    rows, cols = auto_grid(self.hdr.width, self.hdr.height,
                                           overlap_px=overlap)
                else:
                    rows, cols = (int(v) for v in tiles.lower().split("x"))
                plan = None
                if rows > 1 or cols > 1:
                    plan = plan_tiles(self.hdr.width, self.hdr.height,
                                      rows, cols, overlap)
                out = render_tonemap(self.hdr, ctx=self.ctx, profile=profile,
                                     cfg=self.cfg, meta_vec=self.meta_vec,
                                     plan=plan)
                path = out_dir / f"export_{self.id}_{job_id}.png"
                from .io import write_png8

                write_png8(out, path)
                with self.lock:
                    self.export_jobs[job_id].update(status="done", path=str(path))
            except Exception as exc:  # job errors surface via status
                with self.lock:
                    self.export_jobs[job_id].update(status="error", error=str(exc))

        threading.Thread(target=work, daemon=True).start()
        return job_id


def _error(status: int, code: str, message: str, field: str | None = None) -> JSONResponse:
    body = {"code": code, "message": message}
    if field:
        body["field"] = field
    return JSONResponse(body, status_code=status)


def create_app(preset_dir=None, frontend_dir=None, export_dir=None,
               cfg: PipelineConfig | None = None) -> FastAPI:
    app = FastAPI(title="drift tuning service")
    cfg = cfg or PipelineConfig()
    sessions: dict = {}
    sessions_lock = threading.Lock()
    presets = PresetStore(preset_dir) if preset_dir else PresetStore(
        Path.home() / ".drift" / "presets")
    exports = Path(export_dir) if export_dir else presets.root.parent / "exports"
    exports.mkdir(parents=True, exist_ok=True)

    def get_session(session_id: str) -> TuningSession | None:
        with sessions_lock:
            return sessions.get(session_id)

    @app.post("/sessions")
    async def create_session(file: UploadFile = File(...),
                             metadata: str | None = Form(None)):
        blob = await file.read()
        try:
            hdr = decode_image_bytes(blob)
        except (FileFormatError, InvalidImageError, Exception) as exc:
            return _error(422, "bad_image", f"could not decode upload: {exc}")
        if hdr.channels != 3:
            return _error(422, "bad_image", "expected a 3-channel image")
        meta = None
        if metadata:
            try:
                doc = json.loads(metadata)
                meta = CaptureMetadata(
                    sensor_type=doc["sensor_type"],
                    pipeline_type=doc["pipeline_type"],
                    iso=float(doc["iso"]),
                    exposure_time=float(doc["exposure_time"]),
                )
            except (KeyError, ValueError, json.JSONDecodeError) as exc:
                return _error(422, "bad_metadata", str(exc))
        try:
            session = TuningSession(hdr, cfg, meta)
        except UnknownCategoryError as exc:
            return _error(422, "bad_metadata", str(exc))
        with sessions_lock:
            sessions[session.id] = session
        return {"id": session.id, "version": session.version,
                "preview_width": session.preview_hdr.width,
                "preview_height": session.preview_hdr.height}

    @app.patch("/sessions/{session_id}/profile")
    async def patch_profile(session_id: str, request: Request):
        session = get_session(session_id)
        if session is None:
            return _error(404, "not_found", f"no session {session_id}")
        try:
            patch = await request.json()
        except Exception:
            return _error(400, "bad_json", "body must be a JSON object")
        if not isinstance(patch, dict):
            return _error(400, "bad_json", "body must be a JSON object")
        try:
            version = session.tune(patch)
        except ProfileFieldError as exc:
            return _error(422, "invalid_profile", str(exc), field=exc.field)
        return {"version": version}

    @app.get("/sessions/{session_id}/profile")
    async def get_profile(session_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "not_found", f"no session {session_id}")
        with session.lock:
            return {"version": session.version,
                    "profile": profile_to_dict(session.profile)}

    @app.get("/sessions/{session_id}/preview")
    async def get_preview(session_id: str, version: int | None = None):
        session = get_session(session_id)
        if session is None:
            return _error(404, "not_found", f"no session {session_id}")
        data, actual = session.preview_bytes(version)
        return Response(content=data, media_type="image/png",
                        headers={"X-Preview-Version": str(actual)})

    @app.get("/sessions/{session_id}/maps")
    async def get_maps(session_id: str, kind: str = "w_y"):
        session = get_session(session_id)
        if session is None:
            return _error(404, "not_found", f"no session {session_id}")
        try:
            plane = session.map_plane(kind)
        except KeyError:
            return _error(422, "bad_kind", f"unknown map kind {kind!r}", field="kind")
        return Response(content=encode_png8_bytes(plane), media_type="image/png")

    @app.post("/sessions/{session_id}/export")
    async def start_export(session_id: str, request: Request):
        session = get_session(session_id)
        if session is None:
            return _error(404, "not_found", f"no session {session_id}")
        opts = {}
        body = await request.body()
        if body:
            try:
                opts = json.loads(body)
            except json.JSONDecodeError:
                return _error(400, "bad_json", "body must be a JSON object")
        job = session.start_export(exports, tiles=opts.get("tiles", "auto"),
                                   overlap=int(opts.get("overlap", 50)))
        return {"job": job}

    @app.get("/sessions/{session_id}/export/{job_id}")
    async def export_status(session_id: str, job_id: str):
        session = get_session(session_id)
        if session is None:
            return _error(404, "not_found", f"no session {session_id}")
        with session.lock:
            job = session.export_jobs.get(job_id)
            if job is None:
                return _error(404, "not_found", f"no export job {job_id}")
            return {"job": job_id, **job}

    @app.get("/presets")
    async def list_presets():
        return {"presets": presets.names()}

    @app.post("/presets")
    async def create_preset(request: Request):
        try:
            doc = await request.json()
        except Exception:
            return _error(400, "bad_json", "body must be a JSON object")
        name = doc.get("name")
        if not name:
            return _error(422, "invalid_preset", "missing preset name", field="name")
        try:
            profile = profile_from_dict(doc.get("profile", {}))
        except (InvalidLutError, ValueError, TypeError) as exc:
            return _error(422, "invalid_preset", str(exc), field="profile")
        preset = Preset(name=name, profile=profile,
                        metadata_overrides=doc.get("metadata_overrides"),
                        created_at=_now_iso())
        try:
            presets.save(preset, force=bool(doc.get("force", False)))
        except FileExistsError as exc:
            return _error(409, "exists", str(exc), field="name")
        except ValueError as exc:
            return _error(422, "invalid_preset", str(exc), field="name")
        return {"name": name}

    @app.get("/presets/{name}")
    async def get_preset(name: str):
        try:
            preset = presets.load(name)
        except FileNotFoundError as exc:
            return _error(404, "not_found", str(exc))
        return {
            "name": preset.name,
            "profile": profile_to_dict(preset.profile),
            "metadata_overrides": preset.metadata_overrides,
            "created_at": preset.created_at,
        }

    if frontend_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app
