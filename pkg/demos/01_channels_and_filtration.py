"""Channels of an image and the sublevel sets of one of them.

Loads a bundled toy painting, splits it into the five intensity channels,
and prints how the number of black pixels grows with the threshold.

Run with ``python demos/01_channels_and_filtration.py``.
"""

from topostyle import binarize, extract_channels, load_image
from topostyle.toy import bundled_manifest

path = bundled_manifest("toy").parent / "rings_00.png"
channels = extract_channels(load_image(path))
print(f"{path.name}: {channels.shape[0]}x{channels.shape[1]} pixels")

for name, grid in channels.items():
    print(f"  {name:5s} min {grid.min():3d}  max {grid.max():3d}  mean {grid.mean():6.1f}")

# The filtration is the nested family of binarized images X_t = {pixel <= t}.
gray = channels["gray"]
for t in (32, 64, 128, 192, 255):
    print(f"  gray <= {t:3d}: {binarize(gray, t).mean():6.1%} of pixels")
