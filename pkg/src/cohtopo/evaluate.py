"""Scoring reconstructed topologies against the generating tree."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .errors import ValidationError
from .graph import ArcSet, WeightedGraph, clusterize, mst
from .metrics import DistanceMatrix, MetricKind, build_distance_matrix
from .series import Ensemble
from .simgen import NetworkSpec, SimulationRun
from .spectral import WelchConfig

__all__ = ["TopologyScore", "ComparisonReport", "score_topology", "compare_metrics", "compare_ensemble"]


@dataclass(frozen=True)
class TopologyScore:
    true_edges: frozenset
    found_edges: frozenset
    recall: float
    precision: float
    exact: bool

    @property
    def hits(self) -> int:
        return len(self.true_edges & self.found_edges)


def _edges(obj) -> tuple[frozenset, int | None]:
    if isinstance(obj, NetworkSpec):
        return frozenset(obj.edges()), obj.n
    if isinstance(obj, ArcSet):
        return frozenset(obj.arcs), obj.n
    return frozenset((min(i, j), max(i, j)) for i, j in obj), None


def score_topology(truth, found) -> TopologyScore:
    """Undirected edge-set recall/precision of ``found`` against ``truth``.

    Either argument may be a :class:`NetworkSpec`, an :class:`ArcSet` or a
    plain iterable of node pairs.
    """
    t, nt = _edges(truth)
    f, nf = _edges(found)
    if nt is not None and nf is not None and nt != nf:
        raise ValidationError(f"node count mismatch: truth has {nt}, found has {nf}")
    hit = len(t & f)
    return TopologyScore(
        true_edges=t,
        found_edges=f,
        recall=hit / len(t) if t else 1.0,
        precision=hit / len(f) if f else 1.0,
        exact=t == f,
    )


@dataclass(frozen=True)
class ComparisonReport:
    spec: NetworkSpec
    correlation: DistanceMatrix
    coherence: DistanceMatrix
    correlation_mst: ArcSet
    coherence_mst: ArcSet
    coherence_forest: ArcSet
    correlation_mst_score: TopologyScore
    coherence_mst_score: TopologyScore
    coherence_forest_score: TopologyScore

    def scores(self) -> dict[str, TopologyScore]:
        return {
            "correlation_mst": self.correlation_mst_score,
            "coherence_mst": self.coherence_mst_score,
            "coherence_forest": self.coherence_forest_score,
        }

    def scores_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "true_edges", "found_edges", "hits", "recall", "precision", "exact"])
        for name, s in self.scores().items():
            w.writerow(
                [name, len(s.true_edges), len(s.found_edges), s.hits,
                 f"{s.recall:.6f}", f"{s.precision:.6f}", str(s.exact).lower()]
            )
        return buf.getvalue()

    def files(self) -> dict[str, str]:
        """File name -> content for the report bundle."""
        truth = ArcSet(self.spec.n, tuple(self.spec.edges()))
        return {
            "scores.csv": self.scores_csv(),
            "distances_correlation.csv": self.correlation.to_csv(),
            "distances_coherence.csv": self.coherence.to_csv(),
            "truth.dot": truth.to_dot("truth"),
            "mst_correlation.dot": self.correlation_mst.to_dot("mst_correlation"),
            "mst_coherence.dot": self.coherence_mst.to_dot("mst_coherence"),
            "forest_coherence.dot": self.coherence_forest.to_dot("forest_coherence"),
        }


def compare_metrics(run: SimulationRun, config: WelchConfig | None = None) -> ComparisonReport:
    """Reconstruct the run's topology with the correlation MST, the coherence
    MST and the coherence clusterization, and score all three."""
    return compare_ensemble(run.spec, run.ensemble, config)


def compare_ensemble(spec: NetworkSpec, ens: Ensemble, config: WelchConfig | None = None) -> ComparisonReport:
    config = config or WelchConfig()
    if ens.n != spec.n:
        raise ValidationError(f"ensemble has {ens.n} series, spec has {spec.n} nodes")
    dc = build_distance_matrix(ens, MetricKind.CORRELATION)
    dh = build_distance_matrix(ens, MetricKind.COHERENCE, config)
    t_corr = mst(WeightedGraph.complete(dc))
    t_coh = mst(WeightedGraph.complete(dh))
    forest = clusterize(dh)
    return ComparisonReport(
        spec=spec,
        correlation=dc,
        coherence=dh,
        correlation_mst=t_corr,
        coherence_mst=t_coh,
        coherence_forest=forest,
        correlation_mst_score=score_topology(spec, t_corr),
        coherence_mst_score=score_topology(spec, t_coh),
        coherence_forest_score=score_topology(spec, forest),
    )
