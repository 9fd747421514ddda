"""Corpus-level orchestration: barcodes, distance matrices, experiments.

On-disk layout of a cache directory::

    index.json                              image id -> digest, group, path
    barcodes/<digest>/<options>/<channel>_h<dim>.json
    distances/<channel>_h<dim>_<metric>[_p<eps>].csv

Barcodes are keyed by the image's content digest, so renamed or duplicated
files reuse work.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, FormatError, IntegrityError
from .imaging import CHANNELS, extract_channels, load_image, resize_capped
from .metrics import METRICS, diagram, distance
from .persistence import CAP, Barcode, barcodes
from .stats import DEFAULT_ALPHA, DEFAULT_N_PERMS, DistanceMatrix, PermutationOutcome, permutation_test

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DIMENSIONS = (0, 1)
DESIGNS = ("one-vs-rest-all", "vs-single")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    path: Path
    group: str


@dataclass
class CorpusManifest:
    entries: list[ManifestEntry]
    resize: int | None = None
    prune: float | None = None

    def __post_init__(self):
        ids = [e.image_id for e in self.entries]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ConfigurationError(f"duplicate image ids: {', '.join(dupes)}")
        if not self.entries:
            raise ConfigurationError("manifest has no entries")

    @classmethod
    def read(cls, path, resize: int | None = None, prune: float | None = None) -> "CorpusManifest":
        """Parse a ``image_id,path,group`` CSV; paths are relative to the file."""
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"manifest {path} does not exist")
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["image_id", "path", "group"]:
                raise ConfigurationError(f"{path}: header must be image_id,path,group")
            entries = []
            for row in reader:
                p = Path(row["path"].strip())
                if not p.is_absolute():
                    p = path.parent / p
                entries.append(ManifestEntry(row["image_id"].strip(), p, row["group"].strip()))
        return cls(entries, resize=resize, prune=prune)

    @property
    def groups(self) -> dict[str, str]:
        return {e.image_id: e.group for e in self.entries}

    def check_paths(self) -> None:
        missing = [str(e.path) for e in self.entries if not e.path.is_file()]
        if missing:
            raise IntegrityError(f"missing image files: {', '.join(missing)}")

    def options_key(self) -> str:
        return f"r{self.resize}" if self.resize else "native"

    def digest(self) -> str:
        """Changes whenever any image byte, id, group or option changes."""
        h = hashlib.sha256()
        for e in self.entries:
            h.update(f"{e.image_id}\0{e.group}\0{file_digest(e.path)}\n".encode())
        h.update(f"resize={self.resize};prune={self.prune}".encode())
        return h.hexdigest()


def barcode_record(image_id: str, channel: str, barcode: Barcode) -> dict:
    """JSON-ready barcode with the essential class capped at ``CAP``."""
    iv = barcode.capped(CAP).astype(np.int64)
    return {
        "schema_version": SCHEMA_VERSION,
        "image_id": image_id,
        "channel": channel,
        "dimension": barcode.dimension,
        "cap": CAP,
        "intervals": iv.tolist(),
    }


def write_barcode(path, image_id: str, channel: str, barcode: Barcode) -> None:
    Path(path).write_text(json.dumps(barcode_record(image_id, channel, barcode)) + "\n")


def read_barcode(path) -> Barcode:
    """Load a barcode file; the capped class is restored as essential."""
    try:
        rec = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise IntegrityError(f"missing barcode file {path}") from None
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"corrupt barcode file {path}: {exc}") from exc
    if rec.get("schema_version") != SCHEMA_VERSION:
        raise IntegrityError(f"{path}: unsupported schema version {rec.get('schema_version')}")
    iv = np.asarray(rec["intervals"], dtype=np.float64).reshape(-1, 2)
    iv[iv[:, 1] >= rec["cap"], 1] = np.inf
    return Barcode(rec["dimension"], iv)


def image_barcodes(path, resize: int | None = None) -> dict:
    """All ten barcodes of one image, keyed by ``(channel, dimension)``."""
    img = load_image(path)
    if resize:
        img = resize_capped(img, resize)
    out = {}
    for name, grid in extract_channels(img).items():
        b0, b1 = barcodes(grid)
        out[(name, 0)] = b0
        out[(name, 1)] = b1
    return out


def _compute_job(args):
    image_id, path, resize = args
    try:
        return image_id, image_barcodes(path, resize), None
    except (FormatError, OSError) as exc:
        return image_id, None, f"{path}: {exc}"


class BarcodeStore:
    """Read access to the barcodes of a cache directory."""

    def __init__(self, cache_dir):
        self.cache_dir = Path(cache_dir)
        index_path = self.cache_dir / "index.json"
        if not index_path.is_file():
            raise IntegrityError(f"{self.cache_dir} has no index.json; run the barcode step first")
        self.index = json.loads(index_path.read_text())
        self._memo: dict = {}

    @property
    def ids(self) -> list[str]:
        return [e["image_id"] for e in self.index["entries"]]

    @property
    def groups(self) -> dict[str, str]:
        return {e["image_id"]: e["group"] for e in self.index["entries"]}

    @property
    def options(self) -> dict:
        return self.index["options"]

    def manifest(self) -> CorpusManifest:
        entries = [ManifestEntry(e["image_id"], Path(e["path"]), e["group"]) for e in self.index["entries"]]
        return CorpusManifest(entries, resize=self.options.get("resize"), prune=self.options.get("prune"))

    def path_for(self, image_id: str, channel: str, dimension: int) -> Path:
        entry = next((e for e in self.index["entries"] if e["image_id"] == image_id), None)
        if entry is None:
            raise IntegrityError(f"unknown image id {image_id!r}")
        return _barcode_path(self.cache_dir, entry["digest"], self.index["options_key"], channel, dimension)

    def get(self, image_id: str, channel: str, dimension: int) -> Barcode:
        key = (image_id, channel, dimension)
        if key not in self._memo:
            self._memo[key] = read_barcode(self.path_for(image_id, channel, dimension))
        return self._memo[key]


def _barcode_path(cache_dir: Path, digest: str, options_key: str, channel: str, dimension: int) -> Path:
    return cache_dir / "barcodes" / digest / options_key / f"{channel}_h{dimension}.json"


def compute_all_barcodes(manifest: CorpusManifest, cache_dir, workers: int = 1) -> tuple[BarcodeStore, dict]:
    """Compute (or reuse) the ten barcodes of every manifest image.

    Returns the store and a summary with the number of images computed and
    reused. Any unreadable image aborts the run with ``IntegrityError``.
    """
    cache_dir = Path(cache_dir)
    manifest.check_paths()
    t0 = time.perf_counter()
    key = manifest.options_key()
    digests = {e.image_id: file_digest(e.path) for e in manifest.entries}

    todo, seen = [], set()
    for e in manifest.entries:
        d = digests[e.image_id]
        complete = all(
            _barcode_path(cache_dir, d, key, c, k).is_file() for c in CHANNELS for k in DIMENSIONS
        )
        if not complete and d not in seen:
            todo.append((e.image_id, str(e.path), manifest.resize))
            seen.add(d)

    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_compute_job, todo))
    else:
        results = [_compute_job(job) for job in todo]

    for image_id, bars, error in results:
        if error is not None:
            raise IntegrityError(f"cannot process image {image_id!r} ({error})")
        target = _barcode_path(cache_dir, digests[image_id], key, CHANNELS[0], 0).parent
        target.mkdir(parents=True, exist_ok=True)
        for (channel, dim), bar in bars.items():
            write_barcode(target / f"{channel}_h{dim}.json", image_id, channel, bar)

    index = {
        "schema_version": SCHEMA_VERSION,
        "options": {"resize": manifest.resize, "prune": manifest.prune},
        "options_key": key,
        "manifest_digest": manifest.digest(),
        "entries": [
            {"image_id": e.image_id, "path": str(e.path.resolve()), "group": e.group, "digest": digests[e.image_id]}
            for e in manifest.entries
        ],
    }
    cache_dir.mkdir(parents=True, exist_ok=True)
    (cache_dir / "index.json").write_text(json.dumps(index, indent=1) + "\n")
    summary = {
        "computed": len(todo),
        "reused": len(manifest.entries) - len(todo),
        "seconds": time.perf_counter() - t0,
    }
    log.info("barcodes: %(computed)d computed, %(reused)d reused", summary)
    return BarcodeStore(cache_dir), summary


def _distance_job(args):
    metric, pa, pb, prune = args
    kwargs = {"min_persistence": prune} if (metric == "wasserstein1" and prune) else {}
    return distance(pa, pb, metric, **kwargs)


def distance_matrix(
    store: BarcodeStore,
    metric: str,
    dimension: int,
    channel: str,
    prune: float | None = None,
    workers: int = 1,
) -> DistanceMatrix:
    """Pairwise distances between all images for one (channel, dimension, metric).

    Only the upper triangle is computed; ``prune`` drops intervals shorter
    than the given persistence before 1-Wasserstein matching.
    """
    if metric not in METRICS:
        raise ConfigurationError(f"unknown metric {metric!r}")
    if channel not in CHANNELS:
        raise ConfigurationError(f"unknown channel {channel!r}")
    if dimension not in DIMENSIONS:
        raise ConfigurationError(f"dimension must be 0 or 1, got {dimension}")
    ids = store.ids
    diagrams = [diagram(store.get(i, channel, dimension)) for i in ids]
    pairs = [(i, j) for i in range(len(ids)) for j in range(i + 1, len(ids))]
    jobs = [(metric, diagrams[i], diagrams[j], prune) for i, j in pairs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            values = list(pool.map(_distance_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        values = [_distance_job(job) for job in jobs]
    dm = DistanceMatrix(ids)
    for (i, j), v in zip(pairs, values):
        dm.values[i, j] = dm.values[j, i] = v
    dm.validate()
    return dm


def cached_distance_matrix(store: BarcodeStore, metric, dimension, channel, prune=None, workers=1) -> DistanceMatrix:
    """``distance_matrix`` backed by a CSV file in the cache directory."""
    suffix = f"_p{prune:g}" if (prune and metric == "wasserstein1") else ""
    path = store.cache_dir / "distances" / f"{channel}_h{dimension}_{metric}{suffix}.csv"
    stamp = path.with_suffix(".digest")
    digest = store.index["manifest_digest"]
    if path.is_file() and stamp.is_file() and stamp.read_text().strip() == digest:
        dm = DistanceMatrix.from_csv(path)
        if list(dm.ids) == store.ids:
            return dm
    dm = distance_matrix(store, metric, dimension, channel, prune=prune, workers=workers)
    path.parent.mkdir(parents=True, exist_ok=True)
    dm.to_csv(path)
    stamp.write_text(digest + "\n")
    return dm


@dataclass
class ReportBundle:
    design: str
    outcomes: list[dict]
    out_dir: Path
    outputs: list[str] = field(default_factory=list)
    record: dict = field(default_factory=dict)


def _targets(groups: dict[str, str], design: str) -> list[tuple[str, list[str]]]:
    """(row label, sample-A ids) for every test of a design."""
    names = sorted(set(groups.values()))
    members = {g: [i for i, gg in groups.items() if gg == g] for g in names}
    if design == "one-vs-rest-all":
        if len(names) < 2:
            raise ConfigurationError("one-vs-rest-all needs at least two groups")
        return [(g, members[g]) for g in names]
    if design == "vs-single":
        singles = [g for g in names if len(members[g]) == 1]
        if len(singles) != 1 or len(groups) < 3:
            raise ConfigurationError("vs-single needs exactly one single-image group and at least two other images")
        single = singles[0]
        return [(single, [i for i in groups if groups[i] != single])]
    raise ConfigurationError(f"unknown design {design!r}; expected one of {', '.join(DESIGNS)}")


def run_tests(
    store: BarcodeStore,
    design: str,
    n_perms: int = DEFAULT_N_PERMS,
    seed: int = 0,
    alpha: float = DEFAULT_ALPHA,
    prune: float | None = None,
    workers: int = 1,
) -> tuple[list[dict], dict]:
    """All permutation tests of a design over a computed barcode store.

    Every test uses the same ``seed``. Returns outcome records and stage
    timings.
    """
    groups = store.groups
    targets = _targets(groups, design)
    timings = {"distances": 0.0, "permutation_tests": 0.0}
    outcomes = []
    for metric in METRICS:
        for dim in DIMENSIONS:
            for channel in CHANNELS:
                t0 = time.perf_counter()
                dm = cached_distance_matrix(store, metric, dim, channel, prune=prune, workers=workers)
                t1 = time.perf_counter()
                for label, sample_a in targets:
                    res: PermutationOutcome = permutation_test(
                        dm, sample_a, n_perms=n_perms, seed=seed, alpha=alpha, workers=workers
                    )
                    outcomes.append({"target": label, "channel": channel, "dimension": dim, "metric": metric, **res.to_dict()})
                timings["distances"] += t1 - t0
                timings["permutation_tests"] += time.perf_counter() - t1
    outcomes.sort(key=lambda o: (o["target"], METRICS.index(o["metric"]), o["dimension"], CHANNELS.index(o["channel"])))
    return outcomes, timings


def run_experiment(
    manifest: CorpusManifest,
    design: str,
    cache_dir,
    out_dir,
    n_perms: int = DEFAULT_N_PERMS,
    seed: int = 0,
    alpha: float = DEFAULT_ALPHA,
    workers: int = 1,
) -> ReportBundle:
    """Barcodes, distances, permutation tests and reports for one design."""
    _targets(manifest.groups, design)
    store, summary = compute_all_barcodes(manifest, cache_dir, workers=workers)
    return run_design(store, design, out_dir, n_perms=n_perms, seed=seed, alpha=alpha,
                      workers=workers, extra_timings={"barcodes": summary["seconds"]})


def run_design(
    store: BarcodeStore,
    design: str,
    out_dir,
    n_perms: int = DEFAULT_N_PERMS,
    seed: int = 0,
    alpha: float = DEFAULT_ALPHA,
    workers: int = 1,
    extra_timings: dict | None = None,
) -> ReportBundle:
    from .report import write_outcomes, render_tables

    out_dir = Path(out_dir)
    prune = store.options.get("prune")
    outcomes, timings = run_tests(store, design, n_perms=n_perms, seed=seed, alpha=alpha, prune=prune, workers=workers)
    timings = {**(extra_timings or {}), **timings}
    t0 = time.perf_counter()
    outputs = write_outcomes(outcomes, design, out_dir)
    outputs += render_tables(outcomes, design, out_dir)
    timings["reports"] = time.perf_counter() - t0
    record = {
        "manifest_digest": store.index["manifest_digest"],
        "software_version": __version__,
        "design": design,
        "seed": seed,
        "n_perms": n_perms,
        "alpha": alpha,
        "options": store.options,
        "timings": timings,
        "outputs": sorted(outputs),
    }
    (out_dir / "run_record.json").write_text(json.dumps(record, indent=1) + "\n")
    return ReportBundle(design, outcomes, out_dir, sorted(outputs), record)
