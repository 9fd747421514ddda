"""Image decoding and the five intensity channels.

An RGB image is a ``(height, width, 3)`` ``uint8`` array and every channel
is a ``(height, width)`` ``uint8`` array (an intensity grid).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import FormatError

CHANNELS = ("red", "green", "blue", "gray", "edge")

DEFAULT_MAX_SIDE = 512

_LUMA = np.array([0.299, 0.587, 0.114])


def _round_half_up(x: np.ndarray) -> np.ndarray:
    # inputs are non-negative, so floor(x + 0.5) rounds half away from zero
    return np.floor(x + 0.5)


def check_rgb(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) array, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if img.dtype != np.uint8:
        if np.any(img < 0) or np.any(img > 255):
            raise ValueError("pixel components must lie in [0, 255]")
        img = img.astype(np.uint8)
    return img


def check_grid(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.shape[0] < 1 or grid.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2D grid, got shape {grid.shape}")
    if grid.dtype != np.uint8:
        if not np.issubdtype(grid.dtype, np.integer):
            raise ValueError("grid values must be integers")
        if np.any(grid < 0) or np.any(grid > 255):
            raise ValueError("grid values must lie in [0, 255]")
        grid = grid.astype(np.uint8)
    return grid


def load_image(path: str | Path) -> np.ndarray:
    """Decode a PNG or JPEG file into an ``(H, W, 3)`` uint8 array.

    Transparent images are composited over white; palette and grayscale
    images are expanded to RGB.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    try:
        with Image.open(path) as im:
            fmt = im.format
            if fmt not in ("PNG", "JPEG"):
                raise FormatError(f"{path}: unsupported format {fmt}")
            im.load()
            if im.mode == "P":
                im = im.convert("RGBA")
            if im.mode in ("RGBA", "LA", "PA") or "transparency" in im.info:
                rgba = im.convert("RGBA")
                background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
                im = Image.alpha_composite(background, rgba)
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except FormatError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise FormatError(f"{path}: cannot decode image ({exc})") from exc
    return np.ascontiguousarray(arr)


def _bilinear(channel: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = channel.shape
    # pixel-centre alignment
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    ys = np.clip(ys, 0, h - 1)
    xs = np.clip(xs, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    c = channel.astype(np.float64)
    top = c[np.ix_(y0, x0)] * (1 - fx) + c[np.ix_(y0, x1)] * fx
    bottom = c[np.ix_(y1, x0)] * (1 - fx) + c[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bottom * fy


def resize_capped(img: np.ndarray, max_side: int = DEFAULT_MAX_SIDE) -> np.ndarray:
    """Shrink ``img`` so that its longest side is at most ``max_side``.

    Aspect ratio is preserved, the short side never drops below one pixel,
    and interpolation is bilinear with components rounded to the nearest
    integer. Images already within the cap are returned unchanged.
    """
    if max_side < 1:
        raise ValueError("max_side must be >= 1")
    img = check_rgb(img)
    h, w = img.shape[:2]
    if max(h, w) <= max_side:
        return img
    scale = max_side / max(h, w)
    if w >= h:
        out_w, out_h = max_side, max(1, int(_round_half_up(np.float64(h * scale))))
    else:
        out_h, out_w = max_side, max(1, int(_round_half_up(np.float64(w * scale))))
    out = np.empty((out_h, out_w, 3), dtype=np.uint8)
    for k in range(3):
        resampled = _round_half_up(_bilinear(img[:, :, k], out_h, out_w))
        out[:, :, k] = np.clip(resampled, 0, 255).astype(np.uint8)
    return out


def grayscale(img: np.ndarray) -> np.ndarray:
    """Rec.601 luma, rounded half away from zero."""
    img = check_rgb(img)
    luma = img.astype(np.float64) @ _LUMA
    return np.clip(_round_half_up(luma), 0, 255).astype(np.uint8)


def edge_map(img: np.ndarray) -> np.ndarray:
    """Inverted, globally normalised Sobel magnitude of the grayscale image.

    Strong edges map to 0 (dark) and flat regions to 255, so contours enter
    a sublevel filtration first. Borders use edge replication.
    """
    gray = grayscale(img).astype(np.float64)
    gx = ndimage.sobel(gray, axis=1, mode="nearest")
    gy = ndimage.sobel(gray, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak == 0:
        return np.full(gray.shape, 255, dtype=np.uint8)
    return (255 - _round_half_up(255.0 * mag / peak)).astype(np.uint8)


@dataclass(frozen=True)
class ChannelSet:
    red: np.ndarray
    green: np.ndarray
    blue: np.ndarray
    gray: np.ndarray
    edge: np.ndarray

    def __post_init__(self):
        shapes = {self[name].shape for name in CHANNELS}
        if len(shapes) != 1:
            raise ValueError(f"channel shapes differ: {sorted(shapes)}")

    def __getitem__(self, name: str) -> np.ndarray:
        if name not in CHANNELS:
            raise KeyError(name)
        return getattr(self, name)

    def items(self):
        return [(name, self[name]) for name in CHANNELS]

    @property
    def shape(self) -> tuple[int, int]:
        return self.red.shape


def extract_channels(img: np.ndarray) -> ChannelSet:
    img = check_rgb(img)
    return ChannelSet(
        red=np.ascontiguousarray(img[:, :, 0]),
        green=np.ascontiguousarray(img[:, :, 1]),
        blue=np.ascontiguousarray(img[:, :, 2]),
        gray=grayscale(img),
        edge=edge_map(img),
    )


def save_grid_png(grid: np.ndarray, path: str | Path) -> None:
    """Write an intensity grid as an 8-bit grayscale PNG."""
    Image.fromarray(check_grid(grid)).save(path, format="PNG")


def save_bits_png(bits: np.ndarray, path: str | Path) -> None:
    """Write a binarized grid as a 1-bit PNG, black where ``bits`` is set."""
    bits = np.asarray(bits, dtype=bool)
    Image.fromarray(~bits).convert("1").save(path, format="PNG")
