import math

import numpy as np
import pytest

from bernoulli_detector.simulate import (
    DependencyStructure,
    PiecewiseSpec,
    dependent_preset,
    gen_dependent,
    gen_piecewise,
    multi_step_spec,
    sigma_to_delta_mu,
    single_step_spec,
    snr_to_sigma,
)


class TestSnr:
    def test_zero_db_unit_jump(self):
        assert snr_to_sigma(1.0, 0.0) == pytest.approx(1.0)

    def test_five_db(self):
        # sigma^2 = 10^(-1/2)
        assert snr_to_sigma(1.0, 5.0) == pytest.approx(math.sqrt(10**-0.5))

    def test_ten_db_jump_two(self):
        # sigma^2 = 4/10
        assert snr_to_sigma(2.0, 10.0) == pytest.approx(math.sqrt(0.4))

    def test_zero_jump_rejected(self):
        with pytest.raises(ValueError):
            snr_to_sigma(0.0, 5.0)

    def test_inverse_relation(self):
        assert sigma_to_delta_mu(snr_to_sigma(1.0, 7.0), 7.0) == pytest.approx(1.0)


class TestPiecewiseSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            PiecewiseSpec(n=10, boundaries=(5, 3), means=(0, 1, 2), sigma=1.0)
        with pytest.raises(ValueError):
            PiecewiseSpec(n=10, boundaries=(5,), means=(0,), sigma=1.0)
        with pytest.raises(ValueError):
            PiecewiseSpec(n=10, boundaries=(9,), means=(0, 1), sigma=1.0)
        with pytest.raises(ValueError):
            PiecewiseSpec(n=10, boundaries=(), means=(0,), sigma=0.0)
        with pytest.raises(ValueError):
            PiecewiseSpec(
                n=10, boundaries=(), means=(0,), sigma=1.0, noise="student", nu=2.0
            )

    def test_mean_vector_layout(self):
        spec = PiecewiseSpec(n=6, boundaries=(2,), means=(0.0, 3.0), sigma=1.0)
        assert spec.mean_vector().tolist() == [0, 0, 0, 3, 3, 3]
        assert spec.segment_slices == ((0, 3), (3, 6))


class TestGenPiecewise:
    def test_vanishing_noise_recovers_means(self):
        spec = PiecewiseSpec(n=50, boundaries=(24,), means=(0.0, 2.0), sigma=1e-12)
        x = gen_piecewise(spec, seed=0)
        assert np.allclose(x, spec.mean_vector(), atol=1e-9)

    def test_seed_determinism(self):
        spec = single_step_spec(5.0)
        assert np.array_equal(gen_piecewise(spec, 11), gen_piecewise(spec, 11))
        assert not np.array_equal(gen_piecewise(spec, 11), gen_piecewise(spec, 12))

    def test_single_step_benchmark_shape(self):
        spec = single_step_spec(10.0)
        assert spec.n == 100
        assert spec.boundaries == (49,)  # time position 50, 1-based
        assert spec.means == (0.0, 1.0)
        assert spec.sigma == pytest.approx(snr_to_sigma(1.0, 10.0))

    def test_multi_step_benchmark_shape(self):
        spec = multi_step_spec(5.0)
        assert spec.n == 320
        assert len(spec.boundaries) == 15
        assert all(b == 20 * (j + 1) - 1 for j, b in enumerate(spec.boundaries))
        diffs = np.abs(np.diff(spec.means))
        assert np.allclose(diffs, 1.0)

    def test_student_noise_matches_declared_variance(self):
        # nu=3 with sigma = sqrt(3) means unit-scale t draws
        spec = single_step_spec(5.0, n=100, noise="student")
        assert spec.sigma == pytest.approx(math.sqrt(3.0))
        big = PiecewiseSpec(
            n=200_000, boundaries=(), means=(0.0,), sigma=spec.sigma,
            noise="student", nu=3.0,
        )
        x = gen_piecewise(big, seed=4)
        # t(3) variance converges slowly; allow a wide band around 3
        assert 2.0 < x.var() < 4.5

    def test_empirical_snr_tracks_request(self):
        snr = 5.0
        spec = PiecewiseSpec(
            n=20_000,
            boundaries=(9_999,),
            means=(0.0, 1.0),
            sigma=snr_to_sigma(1.0, snr),
        )
        x = gen_piecewise(spec, seed=21)
        left, right = x[:10_000], x[10_000:]
        jump = right.mean() - left.mean()
        noise_var = 0.5 * (left.var(ddof=1) + right.var(ddof=1))
        measured = 10 * math.log10(jump**2 / noise_var)
        assert abs(measured - snr) < 0.1


class TestDependencyStructure:
    def test_validation(self):
        with pytest.raises(ValueError):
            DependencyStructure(weights=np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            DependencyStructure(weights=np.array([[0.5, 0.1], [0.1, 1.0]]))

    def test_from_source_weights(self):
        s = DependencyStructure.from_source_weights((0.9, 0.6, 0.2))
        assert s.n_series == 4
        assert s.weights[0].tolist() == [1.0, 0.9, 0.6, 0.2]


class TestGenDependent:
    def test_full_propagation_copies_boundaries(self):
        structure = DependencyStructure.from_source_weights((1.0, 1.0))
        data, truth = gen_dependent((9, 19, 29), structure, 1.0, 1.0, seed=0, n=40)
        for row in truth.rows:
            assert row.change_points == (9, 19, 29)
        assert data.values.shape == (3, 40)

    def test_zero_propagation_gives_flat_series(self):
        structure = DependencyStructure.from_source_weights((0.0,))
        data, truth = gen_dependent((9, 19), structure, 1.0, 1.0, seed=0, n=30)
        assert truth.rows[0].change_points == (9, 19)
        assert truth.rows[1].change_points == ()

    def test_truth_satisfies_indicator_invariants(self):
        data, truth = dependent_preset(seed=5, n=200, n_segments=10)
        for row in truth.rows:
            assert row.bits[0] == row.bits[-1] == 1
            assert all(1 <= i <= row.n - 2 for i in row.change_points)

    def test_propagation_rates_match_binomial_bands(self):
        weights = (0.9, 0.6, 0.2)
        structure = DependencyStructure.from_source_weights(weights)
        boundaries = tuple(5 * j - 1 for j in range(1, 20))  # 19 boundaries
        shared = np.zeros(3)
        n_seeds = 500
        for seed in range(n_seeds):
            _, truth = gen_dependent(boundaries, structure, 1.0, 1.0, seed, n=100)
            for l in range(3):
                shared[l] += len(truth.rows[l + 1].change_points)
        trials = n_seeds * len(boundaries)
        for l, w in enumerate(weights):
            band = 3 * math.sqrt(trials * w * (1 - w))
            assert abs(shared[l] - trials * w) <= band

    def test_successive_segment_means_realize_delta(self):
        structure = DependencyStructure.from_source_weights((1.0,))
        data, truth = gen_dependent(
            (4999,), structure, 2.0, 0.001, seed=3, n=10_000
        )
        for j in range(2):
            left = data.values[j, :5000].mean()
            right = data.values[j, 5000:].mean()
            assert abs(abs(right - left) - 2.0) < 0.01
