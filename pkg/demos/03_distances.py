"""Bottleneck and 1-Wasserstein distances between barcodes.

Reproduces the small worked example, shows the optimal matching, and then
compares the gray-channel loops of two toy styles.
"""
from topostyle import bottleneck, wasserstein1, barcodes, extract_channels, load_image
from topostyle.toy import bundled_manifest

a = [(0, 10), (2, 4)]
b = [(1, 9)]
value, matching = bottleneck(a, b, return_matching=True)
print(f"bottleneck = {value}, pairs {matching.pairs}, to diagonal {matching.unmatched_a}")
value, matching = wasserstein1(a, b, return_matching=True)
print(f"1-Wasserstein = {value}, pairs {matching.pairs}, to diagonal {matching.unmatched_a}")

root = bundled_manifest("toy").parent
loops = {}
for name in ("blobs_00", "blobs_01", "rings_00"):
    gray = extract_channels(load_image(root / f"{name}.png"))["gray"]
    loops[name] = barcodes(gray)[1]
for x, y in (("blobs_00", "blobs_01"), ("blobs_00", "rings_00")):
    print(f"{x} vs {y}: bottleneck {bottleneck(loops[x], loops[y]):.1f}, "
          f"W1 {wasserstein1(loops[x], loops[y]):.1f}")
