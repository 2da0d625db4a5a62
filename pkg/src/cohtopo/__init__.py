"""Identify the interconnection topology of stationary time series from the
modeling error of optimal linear (static gain or non-causal Wiener) models."""

__version__ = "0.1.0"

from .errors import ValidationError
from .evaluate import ComparisonReport, TopologyScore, compare_ensemble, compare_metrics, score_topology
from .graph import ArcSet, PropertyReport, WeightedGraph, check_graph_properties, clusterize, connected_components, mst
from .metrics import (
    DistanceMatrix,
    MetricKind,
    build_distance_matrix,
    coherence_distance,
    correlation_distance,
    static_distance,
)
from .series import Ensemble, correlation_index, cross_covariance, optimal_gain, preprocess, residual_energy
from .simgen import NetworkSpec, SimulationRun, TransferFunction2, random_filter, random_network, random_tree, synthesize
from .spectral import SpectralPair, WelchConfig, estimate_spectral_pair, residual_cost, wiener_response
