"""Topological signatures of painting style.

Images are split into five intensity channels, each channel is turned into
a sublevel cubical filtration, and its 0- and 1-dimensional barcodes are
compared with bottleneck and 1-Wasserstein distances. Permutation tests on
average cross-sample distances decide whether two groups of images differ.
"""

__version__ = "0.1.0"

from .cubical import FilteredCubicalComplex, binarize, build_filtration
from .errors import ConfigurationError, FormatError, IntegrityError
from .imaging import CHANNELS, ChannelSet, edge_map, extract_channels, grayscale, load_image, resize_capped
from .metrics import Matching, bottleneck, cross_average, diagonal_cost, wasserstein1
from .persistence import CAP, ESSENTIAL, Barcode, barcodes, betti_at, compute_barcode, oracle_betti_curve
from .stats import DistanceMatrix, PermutationOutcome, one_vs_rest, permutation_test

__all__ = [
    "CAP", "CHANNELS", "ESSENTIAL", "Barcode", "ChannelSet", "ConfigurationError", "DistanceMatrix",
    "FilteredCubicalComplex", "FormatError", "IntegrityError", "Matching", "PermutationOutcome",
    "barcodes", "betti_at", "binarize", "bottleneck", "build_filtration", "compute_barcode",
    "cross_average", "diagonal_cost", "edge_map", "extract_channels", "grayscale", "load_image",
    "one_vs_rest", "oracle_betti_curve", "permutation_test", "resize_capped", "wasserstein1",
]
