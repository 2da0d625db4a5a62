"""Welch estimates of auto/cross spectra, coherence and the non-causal
Wiener filter response.

Conventions
-----------
Angular frequency ``omega`` is in radians/sample. The grid is the set of
segment FFT bins in ``(0, pi]``; DC is dropped because the series are
centered. The cross-spectrum of an ordered pair ``(x, y)`` is the average
of ``conj(X) * Y`` over segments, so that for ``y = W x`` the ratio
``phi_xy / phi_x`` is ``W(e^{i omega})``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import get_window

from .errors import DegenerateCoherenceError, InsufficientDataError, ValidationError

__all__ = [
    "WelchConfig",
    "SpectralPair",
    "FilterResponse",
    "segment_spectra",
    "estimate_spectral_pair",
    "wiener_response",
    "residual_cost",
    "band_average",
    "quadrature_weights",
]


@dataclass(frozen=True)
class WelchConfig:
    """Parameters of the Welch estimator.

    ``floor`` is relative: auto-spectrum bins below ``floor * max`` are raised
    to that level and flagged.
    """

    segment_length: int = 128
    overlap: float = 0.5
    window: str = "hann"
    floor: float = 1e-12

    def __post_init__(self):
        L = self.segment_length
        if not isinstance(L, (int, np.integer)) or L < 16 or L & (L - 1):
            raise ValidationError(f"segment_length must be a power of two >= 16, got {L!r}")
        if not 0.0 <= self.overlap < 1.0:
            raise ValidationError(f"overlap must lie in [0, 1), got {self.overlap}")
        if not self.floor > 0.0:
            raise ValidationError(f"floor must be positive, got {self.floor}")
        try:
            get_window(self.window, 8)
        except ValueError as exc:
            raise ValidationError(f"unknown window {self.window!r}") from exc

    @property
    def step(self) -> int:
        return max(1, int(round(self.segment_length * (1.0 - self.overlap))))

    def n_segments(self, T: int) -> int:
        if T < self.segment_length:
            return 0
        return (T - self.segment_length) // self.step + 1

    def omegas(self) -> np.ndarray:
        L = self.segment_length
        return 2.0 * np.pi * np.arange(1, L // 2 + 1) / L

    def as_dict(self) -> dict:
        return {
            "segment_length": int(self.segment_length),
            "overlap": float(self.overlap),
            "window": self.window,
            "floor": float(self.floor),
        }


def segment_spectra(values, config: WelchConfig) -> np.ndarray:
    """Windowed segment FFTs on the positive-frequency grid.

    ``values`` is 1-d ``(T,)`` or 2-d ``(T, N)``; the result has shape
    ``(S, K)`` or ``(S, K, N)`` with ``S`` segments and ``K`` grid bins.
    Each segment is demeaned before windowing.
    """
    v = np.asarray(values, dtype=float)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    T = v.shape[0]
    L = config.segment_length
    if T < L:
        raise InsufficientDataError(f"T={T} is shorter than segment_length={L}")
    S = config.n_segments(T)
    if S < 2:
        raise DegenerateCoherenceError(
            f"only {S} segment(s) for T={T}, segment_length={L}, overlap={config.overlap}; "
            "coherence needs at least 2"
        )
    starts = np.arange(S) * config.step
    segs = v[starts[:, None] + np.arange(L)[None, :], :]  # (S, L, N)
    segs = segs - segs.mean(axis=1, keepdims=True)
    w = get_window(config.window, L)
    spec = np.fft.rfft(segs * w[None, :, None], axis=1)[:, 1:, :]
    return spec[..., 0] if squeeze else spec


def _floored(phi: np.ndarray, rel: float) -> tuple[np.ndarray, np.ndarray]:
    level = rel * float(np.max(phi)) if phi.size else 0.0
    mask = phi < level
    if level <= 0.0:
        # identically zero spectrum: every bin is unreliable
        level = np.finfo(float).tiny
        mask = np.ones_like(phi, dtype=bool)
    return np.where(mask, level, phi), mask


@dataclass(frozen=True)
class SpectralPair:
    """Spectra of an ordered pair ``(x, y)`` on a shared grid.

    ``phi_x`` and ``phi_y`` are already floored; the boolean masks record
    which bins were raised.
    """

    omegas: np.ndarray
    phi_x: np.ndarray
    phi_y: np.ndarray
    phi_xy: np.ndarray
    coherence: np.ndarray
    x_floored: np.ndarray = field(repr=False)
    y_floored: np.ndarray = field(repr=False)
    n_segments: int = 0

    @classmethod
    def from_spectra(cls, omegas, phi_x, phi_y, phi_xy, floor: float = 1e-12, n_segments: int = 0):
        omegas = np.asarray(omegas, dtype=float)
        _check_grid(omegas)
        phi_x, x_mask = _floored(np.asarray(phi_x, dtype=float), floor)
        phi_y, y_mask = _floored(np.asarray(phi_y, dtype=float), floor)
        phi_xy = np.asarray(phi_xy, dtype=complex)
        if not (phi_x.shape == phi_y.shape == phi_xy.shape == omegas.shape):
            raise ValidationError("spectra and grid must share one shape")
        coh = np.abs(phi_xy) ** 2 / (phi_x * phi_y)
        coh = np.clip(coh, 0.0, 1.0)
        return cls(omegas, phi_x, phi_y, phi_xy, coh, x_mask, y_mask, n_segments)

    @property
    def unreliable(self) -> np.ndarray:
        return self.x_floored | self.y_floored


@dataclass(frozen=True)
class FilterResponse:
    omegas: np.ndarray
    values: np.ndarray
    unreliable: np.ndarray


def _check_grid(omegas: np.ndarray) -> None:
    if omegas.ndim != 1 or omegas.size < 8:
        raise ValidationError(f"frequency grid needs at least 8 points, got {omegas.size}")
    if np.any(np.diff(omegas) <= 0):
        raise ValidationError("frequency grid must be strictly increasing")
    if omegas[0] < 0.0 or omegas[-1] > np.pi + 1e-12:
        raise ValidationError("frequency grid must lie in [0, pi]")


def estimate_spectral_pair(x, y, config: WelchConfig | None = None) -> SpectralPair:
    """Welch-averaged spectra and coherence of the pair ``(x, y)``."""
    config = config or WelchConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValidationError(f"x and y must be 1-d of equal length, got {x.shape} and {y.shape}")
    spec = segment_spectra(np.column_stack([x, y]), config)
    X, Y = spec[..., 0], spec[..., 1]
    phi_x = np.mean(np.abs(X) ** 2, axis=0)
    phi_y = np.mean(np.abs(Y) ** 2, axis=0)
    phi_xy = np.mean(np.conj(X) * Y, axis=0)
    return SpectralPair.from_spectra(
        config.omegas(), phi_x, phi_y, phi_xy, config.floor, n_segments=spec.shape[0]
    )


def wiener_response(p: SpectralPair) -> FilterResponse:
    """Non-causal Wiener filter modeling ``y`` from ``x``: ``phi_xy / phi_x``."""
    return FilterResponse(p.omegas, p.phi_xy / p.phi_x, p.x_floored.copy())


def quadrature_weights(omegas: np.ndarray) -> np.ndarray:
    """Weights ``w`` with ``dot(w, f) ~ (1/pi) * int_0^pi f``; they sum to one."""
    # Trapezoid weights on [0, pi]; the integrand is even in omega, so it is
    # extended flat to 0 (and to pi) from the nearest grid value.
    pts = np.concatenate([[0.0], omegas, [np.pi]])
    h = np.diff(pts)
    w = np.zeros(pts.size)
    w[:-1] += h / 2
    w[1:] += h / 2
    inner = w[1:-1].copy()
    inner[0] += w[0]
    inner[-1] += w[-1]
    return inner / np.pi


def band_average(values, omegas) -> float:
    """Normalized integral ``(1/pi) * int_0^pi f(omega) d omega`` of a sampled
    even function."""
    return float(np.dot(quadrature_weights(np.asarray(omegas, dtype=float)), values))


def residual_cost(p: SpectralPair) -> float:
    """Minimum normalized Wiener modeling error, the band average of ``1 - C``."""
    cost = band_average(1.0 - p.coherence, p.omegas)
    return min(1.0, max(0.0, cost))
