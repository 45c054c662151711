import numpy as np
import pytest

from chim import (
    FadingProcess,
    PathComponent,
    SimConfig,
    builtin_profile,
    complex_gain,
    frequency_response,
    generate_dataset,
    generate_grid,
    max_doppler,
    sample_paths,
    single_tap_profile,
    subcarrier_frequencies,
    substream,
)


class TestMaxDoppler:
    def test_zero_speed(self):
        assert max_doppler(0.0, 2.1e9) == 0.0

    def test_50kmh_at_2_1ghz(self):
        # (50/3.6) * 2.1e9 / 299792458, computed by hand
        assert max_doppler(50.0, 2.1e9) == pytest.approx(97.28952776612769, rel=1e-12)

    def test_linear_in_speed(self):
        assert max_doppler(100.0, 2.1e9) == 2.0 * max_doppler(50.0, 2.1e9)

    @pytest.mark.parametrize(
        "speed,carrier",
        [(float("nan"), 2.1e9), (float("inf"), 2.1e9), (50.0, float("nan")),
         (-1.0, 2.1e9), (50.0, 0.0), (50.0, -2.1e9)],
    )
    def test_invalid_inputs(self, speed, carrier):
        with pytest.raises(ValueError):
            max_doppler(speed, carrier)


class TestSamplePaths:
    def test_single_static_path(self):
        rng = substream(1, 0)
        paths = sample_paths(0.0, 1, 0.0, rng)
        (comp,) = list(paths)
        assert comp.gain == pytest.approx(1.0)
        assert comp.doppler == 0.0

    def test_zero_paths_rejected(self):
        with pytest.raises(ValueError):
            sample_paths(0.0, 0, 100.0, substream(1, 0))

    def test_doppler_bounded_and_phase_range(self):
        paths = sample_paths(0.0, 128, 100.0, substream(2, 0))
        assert np.all(np.abs(paths.dopplers) <= 100.0)
        assert np.all((paths.phases >= 0) & (paths.phases < 2 * np.pi))

    def test_time_averaged_power_at_0db(self):
        # Monte Carlo oracle: long time average of |sum|^2 approaches the
        # configured tap power (1.0 at 0 dB)
        paths = sample_paths(0.0, 64, 100.0, substream(3, 0))
        t = np.arange(10_000) * 1e-3  # 1000 coherence times at f_d = 100
        power = np.mean(np.abs(complex_gain(paths, t)) ** 2)
        assert 0.9 <= power <= 1.1

    def test_time_averaged_power_at_minus_3db(self):
        paths = sample_paths(-3.0, 64, 100.0, substream(4, 0))
        t = np.arange(10_000) * 1e-3
        power = np.mean(np.abs(complex_gain(paths, t)) ** 2)
        assert power == pytest.approx(10 ** (-3 / 10), abs=0.05)

    def test_geometry_independent_of_doppler(self):
        # same substream must give the same angles at any speed
        slow = sample_paths(0.0, 32, 10.0, substream(5, 0))
        fast = sample_paths(0.0, 32, 20.0, substream(5, 0))
        assert np.allclose(fast.dopplers, 2.0 * slow.dopplers)
        assert np.array_equal(slow.phases, fast.phases)


class TestComplexGain:
    def test_static_unit_path(self):
        paths = [PathComponent(1.0, 0.0, 0.0)]
        assert complex_gain(paths, 123.456) == pytest.approx(1.0 + 0.0j)

    def test_half_turn_phase(self):
        # 2*pi*f*t = pi at f=10 Hz, t=0.05 s
        paths = [PathComponent(1.0, 10.0, 0.0)]
        assert complex_gain(paths, 0.05) == pytest.approx(-1.0 + 0.0j, abs=1e-12)

    def test_destructive_pair(self):
        paths = [PathComponent(1.0, 0.0, 0.0), PathComponent(1.0, 0.0, np.pi)]
        assert complex_gain(paths, 0.7) == pytest.approx(0.0 + 0.0j, abs=1e-12)

    def test_empty_collection_rejected(self):
        with pytest.raises(ValueError):
            complex_gain([], 0.0)

    def test_vector_time_matches_scalar(self):
        paths = sample_paths(0.0, 64, 97.3, substream(6, 0))
        t = np.linspace(0.0, 0.25, 401)
        vec = complex_gain(paths, t)
        scalars = np.array([complex_gain(paths, ti) for ti in t[::50]])
        assert np.allclose(vec[::50], scalars, rtol=0, atol=1e-12)

    def test_chunked_evaluation_consistent(self):
        # long enough to force several chunks of the work matrix
        paths = sample_paths(0.0, 64, 100.0, substream(7, 0))
        t = np.arange(40_000) * 1e-4
        vec = complex_gain(paths, t)
        idx = [0, 16_383, 16_384, 39_999]
        expect = np.array([complex_gain(paths, t[i]) for i in idx])
        assert np.allclose(vec[idx], expect, rtol=0, atol=1e-12)

    def test_non_finite_time_rejected(self):
        with pytest.raises(ValueError):
            complex_gain([PathComponent(1.0, 0.0, 0.0)], float("nan"))


class TestFrequencyResponse:
    def test_single_zero_delay_tap_is_flat(self):
        freqs = subcarrier_frequencies(16, 15e3)
        g = 0.3 - 0.4j
        h = frequency_response([g], [0.0], freqs)
        assert np.allclose(h, g)

    def test_two_ray_null(self):
        # analytic: H(f) = 1 + exp(-2j*pi*f*tau) vanishes when f*tau = 1/2
        m, spacing, j = 72, 15e3, 9
        freqs = subcarrier_frequencies(m, spacing)
        tau = 1.0 / (2.0 * freqs[j])
        h = frequency_response([1.0, 1.0], [0.0, tau], freqs)
        direct = 1.0 + np.exp(-2j * np.pi * freqs * tau)
        assert np.allclose(h, direct, atol=1e-12)
        assert abs(h[j]) < 1e-12

    def test_zero_gains(self):
        h = frequency_response([0.0, 0.0], [0.0, 1e-6], subcarrier_frequencies(8, 15e3))
        assert np.all(h == 0)

    def test_mismatched_lengths(self):
        with pytest.raises(ValueError):
            frequency_response([1.0], [0.0, 1e-6], subcarrier_frequencies(8, 15e3))

    def test_matrix_gains_equal_columnwise_calls(self):
        rng = substream(8, 0)
        gains = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
        delays = [0.0, 0.3e-6, 1.1e-6]
        freqs = subcarrier_frequencies(12, 15e3)
        full = frequency_response(gains, delays, freqs)
        for col in range(5):
            assert np.allclose(full[:, col], frequency_response(gains[:, col], delays, freqs))


class TestFadingProcess:
    def test_tap_powers_match_profile(self):
        profile = builtin_profile("etu")
        expected = profile.normalized_linear_powers()
        t = np.arange(4000) * 1e-3
        rng = substream(9, 0)
        proc = FadingProcess.sample(profile, 100.0, 64, rng)
        powers = np.mean(np.abs(proc.tap_gains(t)) ** 2, axis=1)
        assert np.allclose(powers, expected, rtol=0.1)

    def test_total_power_is_one(self):
        profile = builtin_profile("eva")
        t = np.arange(4000) * 1e-3
        proc = FadingProcess.sample(profile, 100.0, 64, substream(10, 0))
        total = np.sum(np.mean(np.abs(proc.tap_gains(t)) ** 2, axis=1))
        assert total == pytest.approx(1.0, abs=0.08)


class TestGenerateGrid:
    def test_default_dims(self):
        grid = generate_grid(SimConfig(user_speed=50.0), builtin_profile("etu"))
        assert grid.shape == (72, 14)
        assert np.all(np.isfinite(grid))

    def test_zero_speed_time_invariant(self):
        grid = generate_grid(SimConfig(user_speed=0.0, seed=3), builtin_profile("eva"))
        assert np.allclose(grid, grid[:, [0]], rtol=0, atol=1e-12)

    def test_deterministic(self):
        cfg = SimConfig(user_speed=50.0, seed=42)
        profile = builtin_profile("etu")
        a = generate_grid(cfg, profile)
        b = generate_grid(cfg, profile)
        assert np.array_equal(a, b)

    def test_sample_index_changes_realization(self):
        cfg = SimConfig(user_speed=50.0, seed=42)
        profile = builtin_profile("etu")
        a = generate_grid(cfg, profile, sample_index=0)
        b = generate_grid(cfg, profile, sample_index=1)
        assert np.max(np.abs(a - b)) > 0


class TestGenerateDataset:
    def test_count_and_labels(self):
        cfg = SimConfig(user_speed=3.0, num_subcarriers=16, num_slots=6, seed=1)
        ds = generate_dataset(cfg, builtin_profile("peda"), 7)
        assert ds.sample_count == 7 and ds.m == 16 and ds.n == 6
        assert all(lab.channel_type == "peda" and lab.user_speed == 3.0 for lab in ds.labels)

    def test_zero_count_rejected(self):
        with pytest.raises(ValueError):
            generate_dataset(SimConfig(user_speed=1.0), builtin_profile("etu"), 0)

    def test_singleton_matches_generate_grid(self):
        cfg = SimConfig(user_speed=50.0, num_subcarriers=24, num_slots=8, seed=11)
        profile = builtin_profile("etu")
        ds = generate_dataset(cfg, profile, 1)
        grid = generate_grid(cfg, profile, sample_index=0)
        assert np.array_equal(ds.samples[0, :, :, 0], grid.real.astype(np.float32))
        assert np.array_equal(ds.samples[0, :, :, 1], grid.imag.astype(np.float32))

    def test_prefix_stability(self):
        cfg = SimConfig(user_speed=50.0, num_subcarriers=8, num_slots=4, seed=5)
        profile = single_tap_profile()
        small = generate_dataset(cfg, profile, 3)
        large = generate_dataset(cfg, profile, 6)
        assert np.array_equal(small.samples, large.samples[:3])

    def test_different_seeds_differ(self):
        profile = builtin_profile("etu")
        a = generate_dataset(SimConfig(user_speed=50.0, seed=1), profile, 2)
        b = generate_dataset(SimConfig(user_speed=50.0, seed=2), profile, 2)
        assert np.max(np.abs(a.samples - b.samples)) > 0


class TestSubstream:
    def test_deterministic_and_distinct(self):
        a = substream(123, 0).uniform(size=4)
        b = substream(123, 0).uniform(size=4)
        c = substream(123, 1).uniform(size=4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("seed,index", [(-1, 0), (0, -1), (2**64, 0), (0, 2**64)])
    def test_range_validation(self, seed, index):
        with pytest.raises(ValueError):
            substream(seed, index)


class TestStatisticalShape:
    """Light statistical checks; the acceptance suite runs the strict ones."""

    def test_rayleigh_envelope_small(self):
        from scipy.stats import kstest

        cfg = SimConfig(
            user_speed=50.0, num_subcarriers=1, num_slots=1, seed=17, paths_per_tap=64
        )
        ds = generate_dataset(cfg, single_tap_profile(), 4000)
        env = np.abs(ds.samples[..., 0] + 1j * ds.samples[..., 1]).ravel()
        stat = kstest(env, "rayleigh", args=(0, np.sqrt(0.5)))
        assert stat.pvalue > 0.01

    def test_power_conservation_small(self):
        cfg = SimConfig(user_speed=50.0, seed=23)
        ds = generate_dataset(cfg, builtin_profile("etu"), 200)
        power = float(np.mean(ds.samples[..., 0] ** 2 + ds.samples[..., 1] ** 2))
        assert 0.95 <= power <= 1.05

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SimConfig(user_speed=-1.0)
        with pytest.raises(ValueError):
            SimConfig(user_speed=1.0, num_subcarriers=0)
        with pytest.raises(ValueError):
            SimConfig(user_speed=1.0, carrier_freq=0.0)
        with pytest.raises(ValueError):
            SimConfig(user_speed=1.0, seed=-4)
