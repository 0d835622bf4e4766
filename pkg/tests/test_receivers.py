"""Receive filter construction, filter outputs and the slicer."""

import numpy as np
import pytest

from plnc_sim import (ReceiverKind, SystemConfig, draw_channel, filter_output,
                      generate_codebook, hard_decision, mmse_filter,
                      rake_filter, source_relay_filter_bank)
from plnc_sim.signal_model import complex_gaussian


class TestRakeFilter:
    def test_matched_to_unit_code(self):
        s1 = np.ones(8) / np.sqrt(8)
        filt = rake_filter(s1)
        assert np.allclose(filt.weights, s1)

    def test_recovers_noiseless_symbol(self):
        rng = np.random.default_rng(0)
        h = complex_gaussian(rng, 16)
        for b in (1.0, -1.0):
            out = filter_output(rake_filter(h), h * b)
            assert abs(out - np.vdot(h, h) * b) < 1e-12
            assert hard_decision(out) == b

    def test_scaling_linearity(self):
        rng = np.random.default_rng(1)
        h = complex_gaussian(rng, 8)
        c = 0.3 - 1.7j
        assert np.allclose(rake_filter(c * h).weights, c * rake_filter(h).weights)

    def test_zero_channel_rejected(self):
        with pytest.raises(ValueError):
            rake_filter(np.zeros(8, dtype=complex))


class TestMmseFilter:
    def test_single_basis_stream(self):
        # (e1 e1^H + I)^-1 e1 = e1 / 2
        e1 = np.zeros(4, dtype=complex)
        e1[0] = 1.0
        filt = mmse_filter(e1[None, :], 0, sigma2=1.0)
        assert np.allclose(filt.weights, e1 / 2.0, atol=1e-12)

    def test_normal_equations_residual(self):
        # independent check: the weights must satisfy the linear system
        # solved with a plain dense solve
        rng = np.random.default_rng(2)
        H = complex_gaussian(rng, (5, 16))
        sigma2 = 0.2
        filt = mmse_filter(H, 2, sigma2)
        cov = sum(np.outer(h, h.conj()) for h in H) + sigma2 * np.eye(16)
        assert np.linalg.norm(cov @ filt.weights - H[2]) < 1e-10
        oracle = np.linalg.solve(cov, H[2])
        assert np.allclose(filt.weights, oracle, atol=1e-10)

    def test_high_noise_limit_matches_rake_direction(self):
        rng = np.random.default_rng(3)
        H = complex_gaussian(rng, (4, 16))
        w = mmse_filter(H, 1, sigma2=1e9).weights
        cos = abs(np.vdot(w, H[1])) / (np.linalg.norm(w) * np.linalg.norm(H[1]))
        assert cos > 1.0 - 1e-6

    def test_requires_positive_noise(self):
        with pytest.raises(ValueError):
            mmse_filter(np.ones((1, 4), dtype=complex), 0, sigma2=0.0)


class TestFilterOutput:
    def test_unit_vector_identity(self):
        s1 = np.ones(4) / 2.0
        assert abs(filter_output(rake_filter(s1), s1) - 1.0) < 1e-12

    def test_orthogonal_gives_zero(self):
        w = np.array([1.0, 1.0, 0, 0]) / np.sqrt(2)
        y = np.array([1.0, -1.0, 0, 0]) / np.sqrt(2)
        assert abs(filter_output(rake_filter(w), y)) < 1e-12

    def test_conjugate_linearity(self):
        rng = np.random.default_rng(4)
        w = complex_gaussian(rng, 8)
        y = complex_gaussian(rng, 8)
        c = 1.2 + 0.8j
        a = filter_output(rake_filter(c * w), y)
        b = np.conj(c) * filter_output(rake_filter(w), y)
        assert abs(a - b) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            filter_output(rake_filter(np.ones(4, dtype=complex)), np.ones(5))


class TestSlicer:
    @pytest.mark.parametrize("soft,expected", [
        (0.3 - 2.0j, 1.0),
        (-1e-9, -1.0),
        (0.0, 1.0),          # tie breaks to +1
        (-3.0 + 5.0j, -1.0),
    ])
    def test_cases(self, soft, expected):
        assert hard_decision(soft) == expected

    def test_vectorized(self):
        out = hard_decision(np.array([0.1, -0.1, 0.0]))
        assert np.array_equal(out, [1.0, -1.0, 1.0])


class TestReceiverProperties:
    def test_noiseless_interference_free_detection_exact(self):
        # K = 1, sigma2 -> 0: the slicer recovers every symbol
        cfg = SystemConfig(num_users=1, num_relays=1, group_size=1,
                           spreading_gain=16, packet_length=1000,
                           snr_db=120.0, rng_seed=7)
        book = generate_codebook(cfg)
        rng = np.random.default_rng(8)
        state = draw_channel(cfg, book, [0], rng)
        b = np.where(rng.standard_normal(1000) >= 0, 1.0, -1.0)
        y = state.h_eff_sr[0, 0][:, None] * b
        for kind in (ReceiverKind.RAKE, ReceiverKind.MMSE):
            if kind == ReceiverKind.RAKE:
                w = rake_filter(state.h_eff_sr[0, 0]).weights
            else:
                w = mmse_filter(state.h_eff_sr[0, 0][None, :], 0, 1e-12).weights
            detected = hard_decision(np.conj(w) @ y)
            assert np.array_equal(detected, b), f"{kind} not exact"

    def test_mmse_dominates_rake_output_sinr(self):
        # statistical test over 1000 channel draws with K = 4 users
        cfg = SystemConfig(num_users=4, num_relays=2, group_size=2,
                           spreading_gain=8, snr_db=8.0, rng_seed=9)
        book = generate_codebook(cfg)
        rng = np.random.default_rng(10)
        sigma2 = cfg.noise_var

        def output_sinr(w, H, k):
            gains = np.abs(H.conj() @ w) ** 2
            noise = sigma2 * np.vdot(w, w).real
            return gains[k] / (gains.sum() - gains[k] + noise)

        totals = {ReceiverKind.RAKE: 0.0, ReceiverKind.MMSE: 0.0}
        for _ in range(1000):
            state = draw_channel(cfg, book, [0, 1], rng)
            for kind in totals:
                W = source_relay_filter_bank(state, sigma2, kind)
                totals[kind] += output_sinr(W[0, 0], state.h_eff_sr[:, 0, :], 0)
        assert totals[ReceiverKind.MMSE] >= totals[ReceiverKind.RAKE]

    def test_filters_independent_of_data(self):
        cfg = SystemConfig(num_users=3, num_relays=3, group_size=3,
                           spreading_gain=8, snr_db=5.0, rng_seed=11)
        book = generate_codebook(cfg)
        state = draw_channel(cfg, book, [0, 0, 0], np.random.default_rng(12))
        w1 = source_relay_filter_bank(state, cfg.noise_var, ReceiverKind.MMSE)
        w2 = source_relay_filter_bank(state, cfg.noise_var, ReceiverKind.MMSE)
        assert np.array_equal(w1, w2)
