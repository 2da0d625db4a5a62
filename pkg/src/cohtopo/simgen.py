"""Synthetic tree networks of linearly interconnected processes.

Every non-root node is its parent passed through a random stable transfer
function of order at most two, plus independent white noise calibrated to a
fixed fraction of the node's power. The root is unit-variance white noise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import SpecError, ValidationError
from .series import Ensemble

__all__ = [
    "TransferFunction2",
    "NetworkSpec",
    "SimulationRun",
    "random_tree",
    "random_filter",
    "random_network",
    "synthesize",
    "WARMUP",
]

WARMUP = 200
POLE_CAP = 0.9


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class TransferFunction2:
    """``(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)``."""

    b: tuple[float, float, float]
    a: tuple[float, float, float]

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        a = tuple(float(v) for v in self.a)
        if len(b) != 3 or len(a) != 3:
            raise SpecError("numerator and denominator need exactly 3 coefficients")
        if a[0] != 1.0:
            raise SpecError(f"denominator must be monic, got a0={a[0]}")
        if not any(b):
            raise SpecError("numerator is identically zero")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)

    @property
    def poles(self) -> np.ndarray:
        return np.roots(self.a) if self.a[2] != 0.0 else np.roots(self.a[:2])

    @property
    def order(self) -> int:
        return 2 if (self.a[2] != 0.0 or self.b[2] != 0.0) else 1

    def max_pole_modulus(self) -> float:
        p = self.poles
        return float(np.max(np.abs(p))) if p.size else 0.0

    def is_stable(self, cap: float = POLE_CAP) -> bool:
        return self.max_pole_modulus() <= cap + 1e-12

    def response(self, omegas) -> np.ndarray:
        """Frequency response at ``z = exp(i omega)``."""
        zi = np.exp(-1j * np.asarray(omegas, dtype=float))
        num = self.b[0] + self.b[1] * zi + self.b[2] * zi**2
        den = self.a[0] + self.a[1] * zi + self.a[2] * zi**2
        return num / den

    def apply(self, x) -> np.ndarray:
        return lfilter(self.b, self.a, x)


def random_tree(n: int, seed=None) -> dict[int, int]:
    """Uniform random recursive tree on nodes ``0..n-1`` rooted at 0.

    Returns the child -> parent map; node ``k`` attaches to a uniformly drawn
    earlier node.
    """
    if n < 2:
        raise ValidationError(f"tree needs n >= 2, got {n}")
    rng = _rng(seed)
    return {k: int(rng.integers(0, k)) for k in range(1, n)}


def _pair_roots(rng, low: float, high: float) -> tuple[float, float]:
    """(sum, product) of a real or complex-conjugate root pair with moduli in [low, high]."""
    if rng.random() < 0.5:
        r = rng.uniform(low, high)
        theta = rng.uniform(0.0, np.pi)
        return 2.0 * r * np.cos(theta), r * r
    r1 = rng.uniform(low, high) * rng.choice([-1.0, 1.0])
    r2 = rng.uniform(low, high) * rng.choice([-1.0, 1.0])
    return r1 + r2, r1 * r2


def random_filter(seed=None, first_order: bool | None = None, p_first_order: float = 0.25) -> TransferFunction2:
    """Random stable filter of order one or two.

    Poles have modulus in [0.3, 0.9], zeros modulus at most 1, and the
    overall gain is drawn from [0.5, 2] with random sign. ``first_order``
    forces (True) or forbids (False) the reduced order.
    """
    rng = _rng(seed)
    if first_order is None:
        first_order = bool(rng.random() < p_first_order)
    gain = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    if first_order:
        p = rng.uniform(0.3, POLE_CAP) * rng.choice([-1.0, 1.0])
        z = rng.uniform(-1.0, 1.0)
        return TransferFunction2((gain, -gain * z, 0.0), (1.0, -p, 0.0))
    ps, pp = _pair_roots(rng, 0.3, POLE_CAP)
    zs, zp = _pair_roots(rng, 0.0, 1.0)
    return TransferFunction2((gain, -gain * zs, gain * zp), (1.0, -ps, pp))


@dataclass(frozen=True)
class NetworkSpec:
    """Ground-truth tree network.

    ``parent`` maps each non-root node to its parent (0-based), ``filters``
    maps each non-root node to the link feeding it.
    """

    n: int
    root: int
    parent: dict
    filters: dict
    noise_ratio: float = 0.5
    seed: int | None = None

    def __post_init__(self):
        n = self.n
        if n < 2:
            raise SpecError(f"network needs n >= 2, got {n}")
        if not 0.0 <= self.noise_ratio <= 1.0:
            raise SpecError(f"noise_ratio must lie in [0, 1], got {self.noise_ratio}")
        parent = {int(k): int(v) for k, v in self.parent.items()}
        expected = set(range(n)) - {self.root}
        if set(parent) != expected:
            raise SpecError("parent map must cover exactly the non-root nodes")
        if any(not 0 <= p < n for p in parent.values()):
            raise SpecError("parent outside node range")
        for k in parent:
            seen = {k}
            node = k
            while node != self.root:
                node = parent[node]
                if node in seen:
                    raise SpecError(f"parent map has a cycle through node {k}")
                seen.add(node)
        filters = {int(k): v for k, v in self.filters.items()}
        if set(filters) != expected:
            raise SpecError("filters must cover exactly the non-root nodes")
        for k, f in filters.items():
            if not f.is_stable():
                raise SpecError(
                    f"filter into node {k} has pole modulus {f.max_pole_modulus():.4f} > {POLE_CAP}"
                )
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "filters", filters)

    def edges(self) -> set[tuple[int, int]]:
        return {(min(c, p), max(c, p)) for c, p in self.parent.items()}

    def topological_order(self) -> list[int]:
        children: dict[int, list[int]] = {k: [] for k in range(self.n)}
        for c, p in self.parent.items():
            children[p].append(c)
        order, queue = [], [self.root]
        while queue:
            u = queue.pop(0)
            order.append(u)
            queue.extend(sorted(children[u]))
        return order

    def to_json(self) -> str:
        doc = {
            "nodes": list(range(1, self.n + 1)),
            "root": self.root + 1,
            "parent": {str(c + 1): p + 1 for c, p in sorted(self.parent.items())},
            "filters": {
                str(c + 1): {"b": list(f.b), "a": list(f.a)} for c, f in sorted(self.filters.items())
            },
            "noise_ratio": self.noise_ratio,
            "seed": self.seed,
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "NetworkSpec":
        try:
            doc = json.loads(text)
            n = len(doc["nodes"])
            if doc["nodes"] != list(range(1, n + 1)):
                raise SpecError("nodes must be 1..n")
            parent = {int(c) - 1: int(p) - 1 for c, p in doc["parent"].items()}
            filters = {
                int(c) - 1: TransferFunction2(tuple(f["b"]), tuple(f["a"]))
                for c, f in doc["filters"].items()
            }
            return cls(
                n=n,
                root=int(doc["root"]) - 1,
                parent=parent,
                filters=filters,
                noise_ratio=float(doc["noise_ratio"]),
                seed=doc.get("seed"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"malformed network spec: {exc}") from exc


def random_network(n: int, noise_ratio: float = 0.5, seed: int | None = None) -> NetworkSpec:
    tree_ss, filt_ss = np.random.SeedSequence(seed).spawn(2)
    parent = random_tree(n, np.random.default_rng(tree_ss))
    frng = np.random.default_rng(filt_ss)
    filters = {k: random_filter(frng) for k in range(1, n)}
    return NetworkSpec(n, 0, parent, filters, noise_ratio, seed)


@dataclass(frozen=True)
class SimulationRun:
    """One realization of a network.

    ``deterministic`` and ``disturbance`` hold, per node, the filtered-parent
    part and the scaled noise part of the retained samples (the root is all
    disturbance).
    """

    spec: NetworkSpec
    seed: int | None
    T: int
    ensemble: Ensemble
    deterministic: np.ndarray = field(repr=False)
    disturbance: np.ndarray = field(repr=False)

    def noise_fractions(self) -> np.ndarray:
        """Realized ``var(disturbance) / var(node)`` per node."""
        return np.var(self.disturbance, axis=0) / np.var(self.ensemble.values, axis=0)

    def max_noise_correlation(self) -> float:
        """Largest absolute sample correlation between two nodes' disturbances."""
        c = np.corrcoef(self.disturbance, rowvar=False)
        np.fill_diagonal(c, 0.0)
        return float(np.max(np.abs(c)))


def _noise_scale(d: np.ndarray, e: np.ndarray, ratio: float) -> float:
    # s such that var(s e) / var(d + s e) == ratio on the realized samples
    vd, ve = np.var(d), np.var(e)
    c = np.mean((d - d.mean()) * (e - e.mean()))
    if ratio == 0.0:
        return 0.0
    qa = (1.0 - ratio) * ve
    qb = -2.0 * ratio * c
    qc = -ratio * vd
    return float((-qb + np.sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa))


def synthesize(spec: NetworkSpec, T: int, seed=None, warmup: int = WARMUP) -> SimulationRun:
    """Simulate ``T`` retained samples of every node after ``warmup`` discarded ones.

    Noise is scaled on the retained window so that each non-root node's
    disturbance carries exactly ``spec.noise_ratio`` of its sample power. At
    ``noise_ratio == 1`` the filtered-parent part is dropped altogether.
    """
    T = int(T)
    if T < 100:
        raise ValidationError(f"T must be >= 100, got {T}")
    rng = _rng(seed)
    total = T + warmup
    noise = rng.standard_normal((total, spec.n))
    x = np.zeros((total, spec.n))
    det = np.zeros((total, spec.n))
    dist = np.zeros((total, spec.n))
    r = spec.noise_ratio
    for k in spec.topological_order():
        if k == spec.root:
            dist[:, k] = noise[:, k]
        else:
            d = spec.filters[k].apply(x[:, spec.parent[k]])
            if r == 1.0:
                det[:, k] = 0.0
                dist[:, k] = noise[:, k]
            else:
                det[:, k] = d
                dist[:, k] = _noise_scale(d[warmup:], noise[warmup:, k], r) * noise[:, k]
        x[:, k] = det[:, k] + dist[:, k]
    keep = slice(warmup, total)
    return SimulationRun(
        spec=spec,
        seed=seed if not isinstance(seed, np.random.Generator) else None,
        T=T,
        ensemble=Ensemble(x[keep]),
        deterministic=det[keep],
        disturbance=dist[keep],
    )
