"""Finite realizations of stationary processes and their time-domain
second-order statistics.

All statistics use the biased estimator (normalization by ``T``), which keeps
the sample covariance sequence positive semidefinite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, LagRangeError, ValidationError

__all__ = [
    "Ensemble",
    "preprocess",
    "cross_covariance",
    "correlation_index",
    "optimal_gain",
    "residual_energy",
]


def _as_series(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DegenerateInputError(f"expected a 1-d series, got shape {arr.shape}")
    if arr.size < 2:
        raise DegenerateInputError(f"series needs at least 2 samples, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DegenerateInputError("series contains non-finite samples")
    return arr


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x, y = _as_series(x), _as_series(y)
    if x.size != y.size:
        raise DegenerateInputError(f"length mismatch: {x.size} vs {y.size}")
    return x, y


def preprocess(x) -> np.ndarray:
    """Return ``x`` with its sample mean removed."""
    x = _as_series(x)
    out = x - x.mean()
    # a second pass cleans up the rounding left by the first
    return out - out.mean()


def cross_covariance(x, y, lag: int = 0) -> float:
    """Biased estimate of ``E[x(t) y(t + lag)]``.

    Both inputs are assumed centered (see :func:`preprocess`).
    """
    x, y = _pair(x, y)
    T = x.size
    lag = int(lag)
    if abs(lag) >= T:
        raise LagRangeError(f"|lag| must be < T={T}, got {lag}")
    if lag >= 0:
        s = np.dot(x[: T - lag], y[lag:])
    else:
        s = np.dot(x[-lag:], y[: T + lag])
    return float(s) / T


def _variance(x: np.ndarray, name: str) -> float:
    v = float(np.dot(x, x)) / x.size
    if not v > 0.0:
        raise DegenerateInputError(f"{name} has zero sample variance")
    return v


def correlation_index(x, y) -> float:
    """Zero-lag correlation coefficient, clamped to [-1, 1]."""
    x, y = _pair(x, y)
    rx, ry = _variance(x, "x"), _variance(y, "y")
    rho = cross_covariance(x, y, 0) / np.sqrt(rx * ry)
    return float(min(1.0, max(-1.0, rho)))


def optimal_gain(x, y) -> float:
    """Least-squares gain modeling ``y`` as ``alpha * x``."""
    x, y = _pair(x, y)
    return cross_covariance(x, y, 0) / _variance(x, "x")


def residual_energy(x, y) -> float:
    """Mean square error left after the least-squares gain model of ``y`` on ``x``.

    Computed as ``R_y - R_xy**2 / R_x``; never negative.
    """
    x, y = _pair(x, y)
    rx = _variance(x, "x")
    rxy = cross_covariance(x, y, 0)
    ry = float(np.dot(y, y)) / y.size
    return max(0.0, ry - rxy * rxy / rx)


@dataclass(frozen=True)
class Ensemble:
    """``N`` equally long series stored column-wise in a ``(T, N)`` array.

    ``ids`` label the columns; they must be a permutation of ``1..N``.
    """

    values: np.ndarray
    ids: tuple[int, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValidationError(f"ensemble must be 2-d (T, N), got shape {v.shape}")
        T, N = v.shape
        if T < 2:
            raise DegenerateInputError(f"ensemble needs T >= 2, got {T}")
        if N < 1:
            raise ValidationError("ensemble has no series")
        if not np.all(np.isfinite(v)):
            raise DegenerateInputError("ensemble contains non-finite samples")
        ids = tuple(int(i) for i in self.ids) if self.ids else tuple(range(1, N + 1))
        if len(ids) != N or sorted(ids) != list(range(1, N + 1)):
            raise ValidationError(f"ids must be a permutation of 1..{N}, got {ids}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "ids", ids)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def series(self, k: int) -> np.ndarray:
        """Column ``k`` (0-based position)."""
        return self.values[:, k]

    def centered(self) -> "Ensemble":
        cols = [preprocess(self.values[:, k]) for k in range(self.n)]
        return Ensemble(np.column_stack(cols), self.ids)
