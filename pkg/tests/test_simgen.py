import json
from pathlib import Path

import numpy as np
import pytest

from cohtopo.errors import SpecError, ValidationError
from cohtopo.metrics import build_distance_matrix
from cohtopo.simgen import (
    NetworkSpec,
    TransferFunction2,
    random_filter,
    random_network,
    random_tree,
    synthesize,
)
from cohtopo.spectral import estimate_spectral_pair

GOLDEN = Path(__file__).parent / "golden"


class TestRandomTree:
    def test_forced(self):
        assert random_tree(2, 0) == {1: 0}

    def test_golden(self):
        ref = json.loads((GOLDEN / "random_tree_n10_seed42.json").read_text())
        assert random_tree(10, 42) == {int(k): v for k, v in ref["parent"].items()}

    def test_is_tree(self):
        for seed in range(50):
            parent = random_tree(12, seed)
            assert len(parent) == 11
            assert all(p < c for c, p in parent.items())  # recursive: acyclic by construction

    def test_range(self):
        with pytest.raises(ValidationError):
            random_tree(1)


class TestRandomFilter:
    def test_stable_over_many_seeds(self):
        g = np.random.default_rng(0)
        worst = max(random_filter(g).max_pole_modulus() for _ in range(10**4))
        assert worst <= 0.9 + 1e-12

    def test_first_order_flag(self):
        f = random_filter(3, first_order=True)
        assert f.a[2] == 0.0 and f.b[2] == 0.0 and f.order == 1

    def test_golden(self):
        ref = json.loads((GOLDEN / "random_filter_seeds.json").read_text())
        for seed, coeffs in zip(ref["seeds"], ref["filters"]):
            f = random_filter(seed)
            assert list(f.b) == coeffs["b"] and list(f.a) == coeffs["a"]

    def test_gain_range(self):
        g = np.random.default_rng(1)
        for _ in range(500):
            assert 0.5 <= abs(random_filter(g).b[0]) <= 2.0

    def test_response_matches_impulse_response(self):
        f = random_filter(5)
        imp = np.zeros(4096)
        imp[0] = 1.0
        h = np.fft.rfft(f.apply(imp))
        om = 2 * np.pi * np.arange(h.size) / 4096
        np.testing.assert_allclose(f.response(om), h, atol=1e-9)


class TestSpec:
    def test_json_round_trip(self):
        spec = random_network(7, 0.3, seed=2)
        back = NetworkSpec.from_json(spec.to_json())
        assert back.parent == spec.parent and back.filters == spec.filters
        assert back.noise_ratio == 0.3 and back.seed == 2

    def test_unstable_rejected(self):
        fine = TransferFunction2((1, 0, 0), (1, -1.5, 0.56))  # poles 0.8 and 0.7
        NetworkSpec(2, 0, {1: 0}, {1: fine})
        with pytest.raises(SpecError):
            NetworkSpec(2, 0, {1: 0}, {1: TransferFunction2((1, 0, 0), (1, -0.95, 0))})

    def test_cycle_rejected(self):
        f = TransferFunction2((1, 0, 0), (1, -0.5, 0))
        with pytest.raises(SpecError):
            NetworkSpec(3, 0, {1: 2, 2: 1}, {1: f, 2: f})

    def test_malformed_json(self):
        with pytest.raises(SpecError):
            NetworkSpec.from_json('{"nodes": [1, 2]}')


class TestSynthesize:
    def test_reproducible(self):
        spec = random_network(6, 0.5, seed=3)
        a = synthesize(spec, 500, seed=9).ensemble.values
        b = synthesize(spec, 500, seed=9).ensemble.values
        assert a.tobytes() == b.tobytes()

    def test_power_calibration(self):
        for seed in range(5):
            spec = random_network(10, 0.5, seed=seed)
            run = synthesize(spec, 1000, seed=seed)
            frac = np.var(run.disturbance, axis=0) / np.var(run.ensemble.values, axis=0)
            nonroot = [k for k in range(10) if k != spec.root]
            assert np.all(np.abs(frac[nonroot] - 0.5) <= 0.05)
            np.testing.assert_allclose(run.noise_fractions()[nonroot], 0.5, atol=1e-9)

    def test_components_add_up(self):
        run = synthesize(random_network(5, 0.4, seed=1), 300, seed=1)
        np.testing.assert_allclose(run.deterministic + run.disturbance, run.ensemble.values, atol=1e-12)

    def test_stationary_halves(self):
        # single narrow-band nodes occasionally leave [0.7, 1.4] by chance alone
        ratios = []
        for seed in range(50):
            v = synthesize(random_network(10, 0.5, seed=seed), 1000, seed=seed).ensemble.values
            ratios.append(np.var(v[:500], axis=0) / np.var(v[500:], axis=0))
        ratios = np.concatenate(ratios)
        inside = np.mean((ratios >= 0.7) & (ratios <= 1.4))
        assert inside >= 0.98
        assert abs(np.mean(np.log(ratios))) < 0.05

    def test_noiseless_child_is_filtered_parent(self):
        spec = random_network(4, 0.0, seed=5)
        run = synthesize(spec, 2000, seed=5)
        for child, parent in spec.parent.items():
            x, y = run.ensemble.series(parent), run.ensemble.series(child)
            p = estimate_spectral_pair(x - x.mean(), y - y.mean())
            assert np.median(p.coherence) > 0.95

    def test_pure_noise(self):
        run = synthesize(random_network(6, 1.0, seed=6), 2000, seed=6)
        d = build_distance_matrix(run.ensemble, "coherence").d
        assert d[np.triu_indices(6, 1)].min() > 0.9

    def test_noise_independence_reported(self):
        run = synthesize(random_network(10, 0.5, seed=7), 1000, seed=7)
        assert 0.0 < run.max_noise_correlation() < 0.2

    def test_minimum_length(self):
        with pytest.raises(ValidationError):
            synthesize(random_network(3, 0.5, seed=0), 50, seed=0)
