"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data integrity error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .cubical import binarize
from .errors import ConfigurationError, FormatError, IntegrityError
from .imaging import CHANNELS, extract_channels, load_image, resize_capped, save_bits_png, save_grid_png
from .pipeline import DESIGNS, BarcodeStore, CorpusManifest, compute_all_barcodes, distance_matrix, run_design
from .report import load_outcomes, plot_diagrams, render_tables
from .stats import DEFAULT_ALPHA, DEFAULT_N_PERMS

METRIC_ALIASES = {"b": "bottleneck", "bottleneck": "bottleneck", "w1": "wasserstein1", "wasserstein1": "wasserstein1"}


def cmd_channels(args) -> None:
    img = load_image(args.image)
    if args.resize:
        img = resize_capped(img, args.resize)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem
    for name, grid in extract_channels(img).items():
        save_grid_png(grid, out / f"{stem}_{name}.png")
        if args.binarize is not None:
            save_bits_png(binarize(grid, args.binarize), out / f"{stem}_{name}_t{args.binarize}.png")


def cmd_barcodes(args) -> None:
    manifest = CorpusManifest.read(args.manifest, resize=args.resize, prune=args.prune)
    _, summary = compute_all_barcodes(manifest, args.cache, workers=args.workers)
    print(f"{summary['computed']} images computed, {summary['reused']} reused")


def cmd_distmat(args) -> None:
    store = BarcodeStore(args.cache)
    prune = args.prune if args.prune is not None else store.options.get("prune")
    dm = distance_matrix(store, METRIC_ALIASES[args.metric], args.dim, args.channel, prune=prune, workers=args.workers)
    if args.output == "-":
        sys.stdout.write(dm.to_csv())
    else:
        dm.to_csv(args.output)


def cmd_permtest(args) -> None:
    store = BarcodeStore(args.cache)
    bundle = run_design(store, args.design, args.output, n_perms=args.n_perms, seed=args.seed,
                        alpha=args.alpha, workers=args.workers)
    n_sig = sum(o["significant"] for o in bundle.outcomes)
    print(f"{len(bundle.outcomes)} tests, {n_sig} significant; results in {args.output}")


def cmd_report(args) -> None:
    design, outcomes = load_outcomes(args.output)
    written = render_tables(outcomes, design, args.output)
    if args.cache:
        written += plot_diagrams(BarcodeStore(args.cache), args.output)
    print(json.dumps(written, indent=1))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topostyle", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channels", help="export the five channels of an image as PNGs")
    p.add_argument("image")
    p.add_argument("--binarize", type=int, metavar="T", help="also export the channels binarized at T")
    p.add_argument("--resize", type=int, metavar="N")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_channels)

    p = sub.add_parser("barcodes", help="compute and cache barcodes for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--cache", required=True)
    p.add_argument("--resize", type=int, metavar="N", help="cap the longest image side at N pixels")
    p.add_argument("--prune", type=float, metavar="EPS",
                   help="drop intervals shorter than EPS before 1-Wasserstein matching")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_barcodes)

    p = sub.add_parser("distmat", help="write one distance matrix as CSV")
    p.add_argument("--cache", required=True)
    p.add_argument("--metric", choices=sorted(METRIC_ALIASES), required=True)
    p.add_argument("--dim", type=int, choices=(0, 1), required=True)
    p.add_argument("--channel", choices=CHANNELS, required=True)
    p.add_argument("--prune", type=float, metavar="EPS")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_distmat)

    p = sub.add_parser("permtest", help="run every permutation test of a design")
    p.add_argument("--cache", required=True)
    p.add_argument("--design", choices=DESIGNS, required=True)
    p.add_argument("--n-perms", type=int, default=DEFAULT_N_PERMS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_permtest)

    p = sub.add_parser("report", help="render tables (and diagram plots) from permtest results")
    p.add_argument("--cache", help="barcode cache; enables persistence-diagram SVGs")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (IntegrityError, FormatError, FileNotFoundError) as exc:
        print(f"data integrity error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
