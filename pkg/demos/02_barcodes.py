"""Persistence barcodes of a tiny hand-made grid and of a toy image.

The ring example is small enough to check by eye: a dark square frame
around a bright centre gives one component born at 0 that never dies and
one loop born at 0 that is filled in when the centre enters at 100.
"""
import numpy as np

from topostyle import barcodes, betti_at, load_image, extract_channels
from topostyle.toy import bundled_manifest

ring = np.array([[0, 0, 0], [0, 100, 0], [0, 0, 0]], dtype=np.uint8)
b0, b1 = barcodes(ring)
print("ring H0:", b0.intervals.tolist())
print("ring H1:", b1.intervals.tolist())

path = bundled_manifest("toy").parent / "stripes_00.png"
gray = extract_channels(load_image(path))["gray"]
b0, b1 = barcodes(gray)
print(f"\n{path.name} gray: {len(b0)} H0 intervals, {len(b1)} H1 intervals")
for t in (50, 100, 150, 200):
    print(f"  t={t:3d}: b0={betti_at(b0, t):3d}  b1={betti_at(b1, t):3d}")
longest = b1.intervals[np.argsort(b1.deaths - b1.births)[::-1][:3]]
print("  longest loops:", longest.tolist())
