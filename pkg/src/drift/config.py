"""TOML configuration parsing for the pipeline and tuning profiles.

Config files are plain TOML with optional sections [lite], [reference],
[heuristic], [metadata]; absent sections and keys fall back to defaults.
Profile files hold LUT control-point lists and a strength scalar or a
reference to a strength-map image.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .enhance import HeuristicConfig, MetadataRegistry, TuningProfile, profile_from_dict
from .io import read_image
from .pipeline import PipelineConfig
from .reference import ReferenceConfig
from .tonemap_lite import LiteParams


class ConfigError(ValueError):
    pass


def _load_toml(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such config file: {path}")
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _build(cls, section: dict, path, **extra):
    try:
        return cls(**section, **extra)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: invalid [{cls.__name__}] settings: {exc}") from exc


def load_pipeline_config(path=None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    doc = _load_toml(path)
    lite_sec = doc.get("lite", {})
    lite = _build(LiteParams, lite_sec, path)
    ref_sec = dict(doc.get("reference", {}))
    for key in ("exposure_gains", "contrast_boost"):
        if key in ref_sec:
            ref_sec[key] = tuple(ref_sec[key])
    ref = _build(ReferenceConfig, ref_sec, path, lite=lite)
    heur_sec = dict(doc.get("heuristic", {}))
    if "g_bounds" in heur_sec:
        heur_sec["g_bounds"] = tuple(heur_sec["g_bounds"])
    heur = _build(HeuristicConfig, heur_sec, path)
    meta_sec = dict(doc.get("metadata", {}))
    for key in ("sensor_types", "pipeline_types"):
        if key in meta_sec:
            meta_sec[key] = tuple(meta_sec[key])
    registry = _build(MetadataRegistry, meta_sec, path)
    return PipelineConfig(lite=lite, reference=ref, heuristic=heur, registry=registry)


def load_profile(path) -> TuningProfile:
    """Tuning profile from TOML; identity defaults for absent fields."""
    doc = _load_toml(path)
    section = doc.get("profile", doc)
    d = {}
    for key in ("lut_weight", "lut_exp0", "lut_exp1"):
        if key in section:
            d[key] = section[key]
    if "strength_map" in section:
        map_path = Path(path).parent / section["strength_map"]
        img = read_image(map_path)
        plane = img.data if img.channels == 1 else img.data.mean(axis=2)
        d["strength_map"] = np.clip(plane, 0.0, 1.0).tolist()
    elif "strength" in section:
        d["strength"] = section["strength"]
    try:
        return profile_from_dict(d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: invalid profile: {exc}") from exc
