"""Synthetic 64x64 "paintings" in three styles, plus a stylistic outlier.

The styles differ in the topology they put into the channels: isolated
blobs (many components), parallel stripes (long components, few loops) and
concentric rings (nested loops). Everything is generated from fixed seeds,
so the bundled PNGs can be regenerated byte for byte.
"""
from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image

SIZE = 64
STYLES = ("blobs", "stripes", "rings")


def _to_rgb(field: np.ndarray, tint, rng) -> np.ndarray:
    field = (field - field.min()) / max(np.ptp(field), 1e-12)
    tint = np.asarray(tint, dtype=np.float64)
    rgb = field[..., None] * tint[None, None, :] + (1 - field[..., None]) * (255 - tint)[None, None, :] * 0.3
    rgb += rng.normal(0, 4, rgb.shape)
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def blobs(rng) -> np.ndarray:
    y, x = np.mgrid[:SIZE, :SIZE]
    field = np.zeros((SIZE, SIZE))
    for _ in range(rng.integers(9, 14)):
        cy, cx = rng.uniform(4, SIZE - 4, 2)
        r = rng.uniform(2.5, 5)
        field += np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / (2 * r * r))
    return _to_rgb(-field, (230, 90, 60), rng)


def stripes(rng) -> np.ndarray:
    y, x = np.mgrid[:SIZE, :SIZE]
    angle = rng.uniform(0, np.pi)
    freq = rng.uniform(0.35, 0.5)
    phase = rng.uniform(0, 2 * np.pi)
    field = np.sin(freq * (np.cos(angle) * x + np.sin(angle) * y) + phase)
    return _to_rgb(field, (70, 200, 90), rng)


def rings(rng) -> np.ndarray:
    y, x = np.mgrid[:SIZE, :SIZE]
    field = np.zeros((SIZE, SIZE))
    for _ in range(2):
        cy, cx = rng.uniform(16, SIZE - 16, 2)
        r = np.hypot(y - cy, x - cx)
        field += np.cos(r * rng.uniform(0.6, 0.8))
    return _to_rgb(field, (60, 110, 235), rng)


def outlier(rng) -> np.ndarray:
    """Fine-grained speckle texture, topologically unlike every style."""
    return rng.integers(0, 256, (SIZE, SIZE, 3)).astype(np.uint8)


_MAKERS = {"blobs": blobs, "stripes": stripes, "rings": rings}


def make_toy_corpus(dest, per_style: int = 4, seed: int = 0) -> Path:
    """Write ``per_style`` images per style and a ``manifest.csv`` to ``dest``."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    rows = []
    for s, style in enumerate(STYLES):
        for k in range(per_style):
            rng = np.random.default_rng([seed, s, k])
            name = f"{style}_{k:02d}"
            Image.fromarray(_MAKERS[style](rng)).save(dest / f"{name}.png")
            rows.append((name, f"{name}.png", style))
    return _write_manifest(dest, rows)


def make_vs_single_corpus(dest, n_paintings: int = 10, style: str = "blobs", seed: int = 1) -> Path:
    """``n_paintings`` images of one style plus one outlier image."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    rows = []
    for k in range(n_paintings):
        rng = np.random.default_rng([seed, k])
        name = f"{style}_{k:02d}"
        Image.fromarray(_MAKERS[style](rng)).save(dest / f"{name}.png")
        rows.append((name, f"{name}.png", style))
    Image.fromarray(outlier(np.random.default_rng([seed, 999]))).save(dest / "outlier.png")
    rows.append(("outlier", "outlier.png", "outlier"))
    return _write_manifest(dest, rows)


def _write_manifest(dest: Path, rows) -> Path:
    path = dest / "manifest.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image_id", "path", "group"])
        writer.writerows(rows)
    return path


def bundled_manifest(name: str = "toy") -> Path:
    """Path to a bundled manifest: ``"toy"`` or ``"vs_single"``."""
    return Path(str(resources.files("topostyle") / "data" / name / "manifest.csv"))
