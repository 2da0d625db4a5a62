"""Pairwise distances between processes and the matrix that collects them."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, PairwiseFailure, ParseError, ValidationError
from .series import Ensemble, correlation_index, preprocess
from .spectral import (
    SpectralPair,
    WelchConfig,
    quadrature_weights,
    residual_cost,
    segment_spectra,
)

__all__ = [
    "MetricKind",
    "DistanceMatrix",
    "correlation_distance",
    "static_distance",
    "coherence_distance",
    "build_distance_matrix",
    "read_distance_csv",
    "parse_distance_csv",
]


class MetricKind(str, Enum):
    CORRELATION = "correlation"
    STATIC_LS = "static_ls"
    COHERENCE = "coherence"

    @classmethod
    def parse(cls, text: str) -> "MetricKind":
        if isinstance(text, cls):
            return text
        aliases = {"static": cls.STATIC_LS, "static-ls": cls.STATIC_LS}
        key = str(text).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(f"unknown metric {text!r}") from None

    @property
    def upper_bound(self) -> float:
        return 2.0 if self is MetricKind.CORRELATION else 1.0


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not -1.0 <= rho <= 1.0:
        raise ValidationError(f"correlation index must lie in [-1, 1], got {rho}")
    return rho


def correlation_distance(rho: float) -> float:
    """Classical correlation distance ``sqrt(2 (1 - rho))``."""
    return math.sqrt(2.0 * (1.0 - _check_rho(rho)))


def static_distance(rho: float) -> float:
    """Normalized RMS error of the least-squares gain model, ``sqrt(1 - rho^2)``.

    Anticorrelated processes are at distance zero: either one reconstructs the
    other exactly.
    """
    rho = _check_rho(rho)
    return math.sqrt(max(0.0, 1.0 - rho * rho))


def coherence_distance(p: SpectralPair) -> float:
    return math.sqrt(residual_cost(p))


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric matrix of pairwise distances with a zero diagonal.

    ``kind`` and ``welch`` record how the entries were produced; both are
    ``None`` for matrices read back from a file without that metadata.
    """

    d: np.ndarray
    ids: tuple[int, ...] = ()
    kind: MetricKind | None = None
    welch: WelchConfig | None = None

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValidationError(f"distance matrix must be square, got shape {d.shape}")
        n = d.shape[0]
        if n < 2:
            raise ValidationError("distance matrix needs at least 2 nodes")
        if not np.all(np.isfinite(d)):
            raise ValidationError("distance matrix has non-finite entries")
        if np.any(np.abs(d - d.T) > 1e-12):
            raise ValidationError("distance matrix is not symmetric")
        if np.any(np.diag(d) != 0.0):
            raise ValidationError("distance matrix diagonal must be zero")
        if np.any(d < 0.0):
            raise ValidationError("distance matrix has negative entries")
        if self.kind is not None and np.any(d > self.kind.upper_bound + 1e-12):
            raise ValidationError(f"{self.kind.value} distances exceed {self.kind.upper_bound}")
        ids = tuple(int(i) for i in self.ids) if self.ids else tuple(range(1, n + 1))
        if len(ids) != n:
            raise ValidationError(f"{len(ids)} ids for a {n}x{n} matrix")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.ids)
        for row in self.d:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def read_distance_csv(path, kind: MetricKind | None = None) -> DistanceMatrix:
    return parse_distance_csv(Path(path).read_text(), kind)


def parse_distance_csv(text: str, kind: MetricKind | None = None) -> DistanceMatrix:
    """Parse a header-plus-square-block CSV (the layout :meth:`DistanceMatrix.to_csv` writes)."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty distance file")
    try:
        ids = [int(c) for c in rows[0]]
    except ValueError:
        raise ParseError("header must list integer ids", row=1) from None
    n = len(ids)
    body = rows[1:]
    if len(body) != n:
        raise ParseError(f"expected {n} data rows, found {len(body)}")
    d = np.empty((n, n))
    for r, row in enumerate(body):
        if len(row) != n:
            raise ParseError(f"expected {n} values, found {len(row)}", row=r + 2)
        for c, cell in enumerate(row):
            try:
                d[r, c] = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", row=r + 2, column=c + 1) from None
    return DistanceMatrix(d, tuple(ids), kind)


def _pairwise_coherence(values: np.ndarray, config: WelchConfig) -> tuple[np.ndarray, np.ndarray]:
    """Coherence-distance matrix from shared segment FFTs.

    Returns the matrix and a boolean mask of nodes whose auto-spectrum
    needed flooring somewhere.
    """
    spec = segment_spectra(values, config)  # (S, K, N)
    n = values.shape[1]
    phi = np.mean(np.abs(spec) ** 2, axis=0)  # (K, N)
    floored = np.zeros_like(phi, dtype=bool)
    for k in range(n):
        level = config.floor * phi[:, k].max()
        floored[:, k] = phi[:, k] < level
        phi[:, k] = np.where(floored[:, k], max(level, np.finfo(float).tiny), phi[:, k])
    cross = np.einsum("ski,skj->kij", np.conj(spec), spec) / spec.shape[0]  # (K, N, N)
    with np.errstate(invalid="ignore", divide="ignore"):
        # constant series give 0/0 here; their pairs are reported as failures
        coh = np.abs(cross) ** 2 / (phi[:, :, None] * phi[:, None, :])
    coh = np.clip(np.nan_to_num(coh), 0.0, 1.0)
    wts = quadrature_weights(config.omegas())
    cost = np.einsum("k,kij->ij", wts, 1.0 - coh)
    cost = np.clip(cost, 0.0, 1.0)
    d = np.sqrt(cost)
    iu = np.triu_indices(n, 1)
    out = np.zeros((n, n))
    out[iu] = d[iu]
    out = out + out.T
    return out, floored.any(axis=0)


def build_distance_matrix(
    ensemble: Ensemble, kind: MetricKind | str, config: WelchConfig | None = None
) -> DistanceMatrix:
    """All pairwise distances of ``kind`` over the ensemble.

    Series are centered first. Pairs that cannot be computed (a constant
    series, say) are collected and reported together through
    :class:`~cohtopo.errors.PairwiseFailure`.
    """
    kind = MetricKind.parse(kind)
    if ensemble.n < 2:
        raise ValidationError("need at least 2 series")
    cols = [preprocess(ensemble.series(k)) for k in range(ensemble.n)]
    n = len(cols)
    failures: dict[tuple[int, int], Exception] = {}

    if kind is MetricKind.COHERENCE:
        config = config or WelchConfig()
        dead = [k for k in range(n) if not np.any(cols[k])]
        values = np.column_stack(cols)
        d, _ = _pairwise_coherence(values, config)
        for k in dead:
            for j in range(n):
                if j != k:
                    pair = (min(j, k), max(j, k))
                    failures[pair] = DegenerateInputError(f"series {ensemble.ids[k]} is constant")
        for i, j in failures:
            d[i, j] = d[j, i] = np.nan
    else:
        dist = correlation_distance if kind is MetricKind.CORRELATION else static_distance
        d = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                try:
                    d[i, j] = d[j, i] = dist(correlation_index(cols[i], cols[j]))
                except DegenerateInputError as exc:
                    failures[(i, j)] = exc
                    d[i, j] = d[j, i] = np.nan
        config = None

    if failures:
        raise PairwiseFailure(d, failures)
    return DistanceMatrix(d, ensemble.ids, kind, config)
