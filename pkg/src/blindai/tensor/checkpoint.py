"""Checkpoint directories: ``manifest.txt`` plus one float32 blob per tensor.

The manifest is ``key=value`` lines followed by one ``param <path> <dims>``
line per tensor, in save order. Each blob is ``<path>.bin``, little-endian
float32, row-major.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigError

FORMAT_VERSION = "blindai-ckpt-v1"


def save_checkpoint(directory, params: dict, meta: dict | None = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [f"version={FORMAT_VERSION}"]
    for key, val in (meta or {}).items():
        if "\n" in str(val) or "=" in str(key):
            raise ConfigError(f"checkpoint meta entry {key!r} is not representable")
        lines.append(f"{key}={val}")
    for path, t in params.items():
        dims = ",".join(str(d) for d in t.shape)
        lines.append(f"param {path} {dims}")
        np.ascontiguousarray(t.data, dtype="<f4").tofile(directory / f"{path}.bin")
    (directory / "manifest.txt").write_text("\n".join(lines) + "\n")
    return directory


def read_manifest(directory) -> tuple[dict, dict]:
    """Return ``(meta, shapes)`` from a checkpoint manifest."""
    path = Path(directory) / "manifest.txt"
    if not path.exists():
        raise ConfigError(f"no checkpoint manifest at {path}")
    meta, shapes = {}, {}
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("param "):
            _, name, dims = line.split(" ")
            shapes[name] = tuple(int(d) for d in dims.split(",")) if dims else ()
        else:
            key, _, val = line.partition("=")
            meta[key] = val
    if meta.get("version") != FORMAT_VERSION:
        raise ConfigError(f"{path}: unsupported checkpoint version {meta.get('version')!r}")
    return meta, shapes


def load_checkpoint(directory, params: dict) -> dict:
    """Load blobs into ``params`` (path -> Tensor) after verifying every shape.

    Nothing is written into ``params`` unless all names and shapes match.
    """
    directory = Path(directory)
    meta, shapes = read_manifest(directory)
    if set(shapes) != set(params):
        missing = sorted(set(params) - set(shapes))
        extra = sorted(set(shapes) - set(params))
        raise ConfigError(f"checkpoint parameters differ: missing {missing}, unexpected {extra}")
    loaded = {}
    for name, t in params.items():
        if shapes[name] != t.shape:
            raise ConfigError(f"{name}: checkpoint shape {shapes[name]} != model shape {t.shape}")
        blob = np.fromfile(directory / f"{name}.bin", dtype="<f4")
        if blob.size != t.size:
            raise ConfigError(f"{name}: blob holds {blob.size} values, expected {t.size}")
        loaded[name] = blob.astype(np.float64).reshape(t.shape)
    for name, t in params.items():
        t.data = loaded[name]
    return meta
