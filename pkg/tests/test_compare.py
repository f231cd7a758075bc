from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from earsim import (
    AudioBuffer,
    BinMismatchError,
    ChannelMismatchError,
    ComparisonConfig,
    EmptyInputError,
    InvalidInputError,
    InvalidPathError,
    InvalidRangeError,
    OutOfRangeError,
    PerceptualSpectrogram,
    TooShortError,
    WarpPath,
    aggregate_distance,
    compare_channels,
    dtw_align,
    map_to_mos,
    normalize_pair,
    nsim,
)

from oracles import dtw_path_brute, enumerate_warp_paths, nsim_brute, path_cost
from signals import mixed_reference, tone, with_noise_at_snr


def spec_of(matrix, rate=85):
    return PerceptualSpectrogram(frames=np.asarray(matrix, dtype=float), frame_rate=rate)


def identity_path(n):
    return WarpPath(pairs=np.stack([np.arange(n)] * 2, axis=1))


def frame_distances(ref, deg, exponent):
    diff = ref.frames[:, None, :] - deg.frames[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2)) ** exponent


class TestNormalizePair:
    def test_equal_maxima_leave_both_untouched(self, rng):
        ref = spec_of(rng.uniform(-40, 7, (6, 5)))
        deg_frames = rng.uniform(-40, 0, (4, 5))
        deg_frames[2, 3] = ref.frames.max()
        deg = spec_of(deg_frames)
        out_ref, out_deg = normalize_pair(ref, deg)
        np.testing.assert_array_equal(out_ref.frames, ref.frames)
        np.testing.assert_array_equal(out_deg.frames, deg.frames)

    def test_default_fraction_leaves_18_percent_of_gap(self):
        ref = spec_of(np.array([[0.0, 10.0], [3.0, -2.0]]))
        deg = spec_of(np.array([[0.0, -5.0], [-1.0, -8.0]]))
        out_ref, out_deg = normalize_pair(ref, deg, fraction=0.82)
        assert out_ref.frames.max() - out_deg.frames.max() == pytest.approx(1.8, abs=1e-9)
        # each side moves by half the closed distance, toward the other
        assert out_ref.frames.max() == pytest.approx(10.0 - 4.1, abs=1e-9)
        assert out_deg.frames.max() == pytest.approx(0.0 + 4.1, abs=1e-9)

    def test_full_normalization_equalizes_maxima(self, rng):
        ref = spec_of(rng.uniform(-40, 12, (5, 3)))
        deg = spec_of(rng.uniform(-60, -5, (7, 3)))
        out_ref, out_deg = normalize_pair(ref, deg, fraction=1.0)
        assert out_ref.frames.max() == pytest.approx(out_deg.frames.max(), abs=1e-12)

    def test_relative_structure_unchanged(self, rng):
        ref = spec_of(rng.uniform(-40, 12, (5, 3)))
        deg = spec_of(rng.uniform(-60, -5, (7, 3)))
        out_ref, out_deg = normalize_pair(ref, deg)
        np.testing.assert_allclose(
            out_ref.frames - out_ref.frames[0, 0],
            ref.frames - ref.frames[0, 0],
            rtol=0,
            atol=1e-12,
        )
        np.testing.assert_allclose(
            out_deg.frames - out_deg.frames[0, 0],
            deg.frames - deg.frames[0, 0],
            rtol=0,
            atol=1e-12,
        )

    @pytest.mark.parametrize("fraction", [-0.1, 1.5])
    def test_rejects_fraction_outside_unit_interval(self, fraction):
        ref = spec_of(np.zeros((2, 3)))
        with pytest.raises(InvalidRangeError):
            normalize_pair(ref, ref, fraction=fraction)

    def test_rejects_bin_mismatch(self):
        with pytest.raises(BinMismatchError):
            normalize_pair(spec_of(np.zeros((2, 3))), spec_of(np.zeros((2, 4))))

    def test_rejects_frame_rate_mismatch(self):
        with pytest.raises(InvalidInputError):
            normalize_pair(spec_of(np.zeros((2, 3))), spec_of(np.zeros((2, 3)), rate=90))

    def test_rejects_empty(self):
        with pytest.raises(EmptyInputError):
            normalize_pair(spec_of(np.zeros((0, 3))), spec_of(np.zeros((2, 3))))


class TestDtwAlign:
    def test_identical_inputs_walk_the_diagonal(self, rng):
        spec = spec_of(rng.uniform(-40, 10, (6, 4)))
        path = dtw_align(spec, spec)
        np.testing.assert_array_equal(path.pairs, np.stack([np.arange(6)] * 2, axis=1))

    def test_duplicated_frame_costs_one_side_step(self, rng):
        frames = rng.uniform(-40, 10, (6, 4)) * 3.0
        duplicated = np.insert(frames, 3, frames[2], axis=0)
        path = dtw_align(spec_of(frames), spec_of(duplicated))
        steps = np.diff(path.pairs, axis=0)
        side_steps = np.all(steps == (0, 1), axis=1)
        assert side_steps.sum() == 1
        assert np.all(steps[~side_steps] == (1, 1))
        # the extra degraded frame is absorbed where the duplicate sits
        dup_row = int(np.flatnonzero(side_steps)[0])
        assert path.pairs[dup_row][0] == 2

    def test_exponent_one_matches_textbook_dtw(self, rng):
        for _ in range(50):
            n, m = rng.integers(2, 9, size=2)
            ref = spec_of(rng.uniform(-40, 10, (n, 3)))
            deg = spec_of(rng.uniform(-40, 10, (m, 3)))
            path = dtw_align(ref, deg, exponent=1.0)
            expected = dtw_path_brute(frame_distances(ref, deg, 1.0))
            np.testing.assert_array_equal(path.pairs, np.asarray(expected))

    def test_cost_matches_exhaustive_minimum(self, rng):
        for _ in range(25):
            n, m = rng.integers(1, 6, size=2)
            ref = spec_of(rng.uniform(-40, 10, (n, 3)))
            deg = spec_of(rng.uniform(-40, 10, (m, 3)))
            cost = frame_distances(ref, deg, 0.5)
            found = path_cost(cost, dtw_align(ref, deg, exponent=0.5).pairs)
            best = min(path_cost(cost, p) for p in enumerate_warp_paths(n, m))
            assert found == pytest.approx(best, rel=1e-12)

    def test_optimal_cost_survives_swapping_sides(self, rng):
        ref = spec_of(rng.uniform(-40, 10, (7, 4)))
        deg = spec_of(rng.uniform(-40, 10, (5, 4)))
        cost = frame_distances(ref, deg, 0.5)
        forward = path_cost(cost, dtw_align(ref, deg).pairs)
        backward = path_cost(cost.T, dtw_align(deg, ref).pairs)
        assert forward == pytest.approx(backward, rel=1e-12)

    def test_rejects_empty(self):
        with pytest.raises(EmptyInputError):
            dtw_align(spec_of(np.zeros((0, 3))), spec_of(np.zeros((2, 3))))

    @pytest.mark.parametrize("exponent", [0.0, -0.5, 1.01])
    def test_rejects_exponent_outside_half_open_interval(self, exponent):
        spec = spec_of(np.zeros((2, 3)))
        with pytest.raises(InvalidRangeError):
            dtw_align(spec, spec, exponent=exponent)

    def test_rejects_bin_mismatch(self):
        with pytest.raises(BinMismatchError):
            dtw_align(spec_of(np.zeros((2, 3))), spec_of(np.zeros((2, 4))))


class TestNsim:
    def test_identical_inputs_score_exactly_one(self, rng):
        frames = rng.uniform(-60, 30, (12, 7))
        spec = spec_of(frames)
        assert nsim(spec, spec, identity_path(12)) == 1.0

    def test_constant_degraded_window_reduces_to_luminance(self):
        ref = spec_of(np.array([[0.0, 1.0], [2.0, 3.0]]))
        deg = spec_of(np.full((2, 2), 2.0))
        config = ComparisonConfig(nsim_c1=0.01, nsim_c2=0.01, nsim_exponent=1.0)
        mu_r, mu_d = 1.5, 2.0
        luminance = (2 * mu_r * mu_d + 0.01) / (mu_r**2 + mu_d**2 + 0.01)
        assert nsim(ref, deg, identity_path(2), config) == pytest.approx(luminance, rel=1e-12)

    def test_matches_windowed_statistics_oracle(self, rng):
        for _ in range(20):
            frames_r = rng.uniform(-60, 30, (10, 10))
            frames_d = frames_r + rng.normal(0.0, 6.0, (10, 10))
            got = nsim(spec_of(frames_r), spec_of(frames_d), identity_path(10))
            expected = nsim_brute(frames_r, frames_d, 8, 8, 0.81, 0.81, 1.5)
            assert got == pytest.approx(expected, rel=1e-12)

    def test_matches_oracle_along_a_real_warp(self, rng):
        ref = spec_of(rng.uniform(-40, 10, (10, 6)))
        deg = spec_of(rng.uniform(-40, 10, (13, 6)))
        path = dtw_align(ref, deg)
        got = nsim(ref, deg, path)
        warped_r = ref.frames[path.pairs[:, 0]]
        warped_d = deg.frames[path.pairs[:, 1]]
        expected = nsim_brute(warped_r, warped_d, 8, min(8, 6), 0.81, 0.81, 1.5)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_exponent_one_matches_plain_oracle(self, rng):
        frames_r = rng.uniform(-60, 30, (10, 10))
        frames_d = frames_r + rng.normal(0.0, 2.0, (10, 10))
        config = ComparisonConfig(nsim_exponent=1.0)
        got = nsim(spec_of(frames_r), spec_of(frames_d), identity_path(10), config)
        expected = nsim_brute(frames_r, frames_d, 8, 8, 0.81, 0.81, 1.0)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_scores_stay_in_unit_interval(self, rng):
        ref = spec_of(rng.uniform(-90, 0, (9, 5)))
        deg = spec_of(rng.uniform(-10, 40, (9, 5)))
        assert 0.0 <= nsim(ref, deg, identity_path(9)) <= 1.0

    @pytest.mark.parametrize(
        "pairs",
        [
            [(1, 1), (2, 2)],  # does not start at the origin
            [(0, 0), (1, 1), (2, 2)],  # stops short of the far corner
            [(0, 0), (2, 2), (3, 3)],  # jumps two frames at once
            [(0, 0), (0, 0), (1, 1), (2, 2), (3, 3)],  # fails to advance
            [(0, 0), (1, 1), (0, 2), (1, 3), (2, 3), (3, 3)],  # steps backward
        ],
    )
    def test_rejects_malformed_paths(self, rng, pairs):
        spec = spec_of(rng.uniform(-40, 10, (4, 3)))
        with pytest.raises(InvalidPathError):
            nsim(spec, spec, WarpPath(pairs=np.asarray(pairs)))

    def test_rejects_empty_path_object(self):
        with pytest.raises(InvalidPathError):
            WarpPath(pairs=np.empty((0, 2)))


class TestAggregateDistance:
    def test_two_channel_example(self):
        assert aggregate_distance([0.3, 0.4]) == pytest.approx(0.5, abs=1e-12)

    def test_single_channel_passthrough(self):
        assert aggregate_distance([0.25]) == pytest.approx(0.25, rel=1e-15)

    def test_zero_distances(self):
        assert aggregate_distance([0.0, 0.0]) == 0.0


class TestMapToMos:
    def test_endpoints_are_exact(self):
        assert map_to_mos(0.0) == 1.0
        assert map_to_mos(1.0) == 5.0

    def test_strictly_increasing(self):
        grid = np.linspace(0.0, 1.0, 41)
        values = [map_to_mos(float(s)) for s in grid]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_midpoint_lands_mid_scale(self):
        assert 2.9 < map_to_mos(0.65) < 3.3

    @pytest.mark.parametrize("similarity", [-0.01, 1.01])
    def test_rejects_out_of_range(self, similarity):
        with pytest.raises(OutOfRangeError):
            map_to_mos(similarity)


class TestCompareChannels:
    def test_identity_stereo_is_perfect(self):
        stereo = AudioBuffer(
            samples=np.vstack([tone(440.0, 0.5).channel(0), tone(950.0, 0.5).channel(0)]),
            sample_rate=48000,
        )
        result = compare_channels(stereo, stereo)
        assert result.per_channel_similarity == (1.0, 1.0)
        assert result.per_channel_distance == (0.0, 0.0)
        assert result.aggregate_distance == 0.0
        assert result.mos == 5.0

    def test_single_channel_aggregate_is_its_distance(self):
        ref = mixed_reference(duration=0.5)
        deg = with_noise_at_snr(ref, 20.0)
        result = compare_channels(ref, deg)
        assert len(result.per_channel_distance) == 1
        assert result.aggregate_distance == pytest.approx(
            result.per_channel_distance[0], rel=1e-12
        )

    def test_aggregate_is_l2_over_channels(self):
        base = mixed_reference(duration=0.5)
        noisy = with_noise_at_snr(base, 15.0)
        ref = AudioBuffer(
            samples=np.vstack([base.channel(0), base.channel(0)]), sample_rate=48000
        )
        deg = AudioBuffer(
            samples=np.vstack([base.channel(0), noisy.channel(0)]), sample_rate=48000
        )
        result = compare_channels(ref, deg)
        expected = np.sqrt(sum(d * d for d in result.per_channel_distance))
        assert result.aggregate_distance == pytest.approx(expected, rel=1e-12)
        assert result.per_channel_distance[0] == 0.0
        assert result.per_channel_distance[1] > 0.0

    def test_noise_lowers_score(self):
        ref = mixed_reference(duration=0.5)
        result = compare_channels(ref, with_noise_at_snr(ref, 10.0))
        assert result.per_channel_similarity[0] < 1.0
        assert 1.0 <= result.mos < 5.0

    def test_sample_rates_may_differ(self):
        ref = tone(500.0, duration=0.5, rate=44100)
        deg = tone(500.0, duration=0.5, rate=48000)
        result = compare_channels(ref, deg)
        assert result.mos > 4.0

    def test_rejects_channel_count_mismatch(self):
        mono = tone(440.0, 0.2)
        stereo = AudioBuffer(
            samples=np.vstack([mono.channel(0), mono.channel(0)]), sample_rate=48000
        )
        with pytest.raises(ChannelMismatchError):
            compare_channels(mono, stereo)

    def test_rejects_sub_frame_input(self):
        with pytest.raises(TooShortError):
            compare_channels(tone(440.0, 0.005), tone(440.0, 0.005))


@settings(max_examples=30, deadline=None)
@given(
    gap=st.floats(min_value=-50.0, max_value=50.0, allow_nan=False),
    fraction=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
)
def test_normalized_gap_is_the_retained_fraction(gap, fraction):
    ref = spec_of(np.array([[0.0, gap], [-3.0, -9.0]]))
    deg = spec_of(np.zeros((3, 2)))
    out_ref, out_deg = normalize_pair(ref, deg, fraction=fraction)
    original = ref.frames.max() - deg.frames.max()
    remaining = out_ref.frames.max() - out_deg.frames.max()
    assert remaining == pytest.approx((1.0 - fraction) * original, abs=1e-9)
