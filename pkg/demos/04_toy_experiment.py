"""Full one-vs-rest experiment on the bundled toy corpus.

Computes all barcodes, the twenty distance matrices and one permutation
test per (style, channel, dimension, metric), then writes Markdown and CSV
tables to ``toy_report/``. Takes about half a minute on one core.
"""
from pathlib import Path

from topostyle.pipeline import CorpusManifest, run_experiment
from topostyle.toy import bundled_manifest

out = Path("toy_report")
bundle = run_experiment(
    CorpusManifest.read(bundled_manifest("toy")), "one-vs-rest-all",
    out / "cache", out / "report", n_perms=10_000, seed=2024,
)
for target in sorted({o["target"] for o in bundle.outcomes}):
    rows = [o for o in bundle.outcomes if o["target"] == target]
    hits = sum(o["significant"] for o in rows)
    print(f"{target:8s} significant in {hits:2d} of {len(rows)} cells")
print(f"tables written to {out / 'report'}")
