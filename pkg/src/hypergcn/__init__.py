"""Hypergraph learning toolkit: spectral expansions, a two-layer graph
convolutional trainer, and densest-k-subhypergraph solvers."""

from .hypergraph import Hypergraph, degrees, size_counts, validate
from .expansion import (
    NormalizedAdjacency,
    WeightedGraph,
    expand_clique,
    expand_mediators,
    expand_one_edge,
    extreme_pair,
    normalize,
)
from .dataio import (
    DataError,
    DatasetBundle,
    LabeledSplit,
    balanced_split,
    gen_noisy_ssl,
    load_bundle,
    save_bundle,
)
from .training import TrainConfig, TrainReport, evaluate, run_trials, train_ssl

__all__ = [
    "Hypergraph",
    "degrees",
    "size_counts",
    "validate",
    "NormalizedAdjacency",
    "WeightedGraph",
    "expand_clique",
    "expand_mediators",
    "expand_one_edge",
    "extreme_pair",
    "normalize",
    "DataError",
    "DatasetBundle",
    "LabeledSplit",
    "balanced_split",
    "gen_noisy_ssl",
    "load_bundle",
    "save_bundle",
    "TrainConfig",
    "TrainReport",
    "evaluate",
    "run_trials",
    "train_ssl",
]

__version__ = "0.1.0"
