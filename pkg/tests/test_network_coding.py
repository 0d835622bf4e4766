"""Mappings, NCS generation, matrix designs and destination decoding."""

from itertools import product

import numpy as np
import pytest

from plnc_sim import (CodingMatrix, Role, Scheme, bit_to_symbol, decode_joint,
                      decode_with_direct, design_G_ml, design_G_mmse,
                      design_G_random, detect_ncs, encode_ncs,
                      enumerate_invertible_binary, linear_encode, ncs_levels,
                      select_G_mmse, slice_to_levels, symbol_to_bit,
                      xor_decode, xor_encode)
from plnc_sim.network_coding import (argmin_with_ties, ml_calibration_outputs,
                                     predicted_chain_error)
from plnc_sim.signal_model import complex_gaussian


def all_patterns(m=2):
    return [np.array(p) for p in product((-1.0, 1.0), repeat=m)]


class TestMappings:
    def test_bit_to_symbol(self):
        assert bit_to_symbol(0) == 1.0
        assert bit_to_symbol(1) == -1.0

    def test_roundtrip(self):
        for c in (0, 1):
            assert symbol_to_bit(bit_to_symbol(c)) == c

    def test_vectorized(self):
        bits = np.array([0, 1, 1, 0])
        assert np.array_equal(symbol_to_bit(bit_to_symbol(bits)), bits)


class TestXor:
    @pytest.mark.parametrize("bits,expected", [
        ([0, 0], 1.0), ([1, 0], -1.0), ([0, 1], -1.0), ([1, 1], 1.0),
    ])
    def test_encode(self, bits, expected):
        assert xor_encode(np.array(bits)) == expected

    @pytest.mark.parametrize("ncs_bit,other_bit,expected_bit", [
        (1, 1, 0), (0, 1, 1), (0, 0, 0), (1, 0, 1),
    ])
    def test_decode(self, ncs_bit, other_bit, expected_bit):
        ncs = bit_to_symbol(ncs_bit)
        direct = np.array([np.nan, bit_to_symbol(other_bit)])
        direct[0] = 1.0  # target user's own slot is ignored
        out = xor_decode(np.array([ncs]), direct[:, None], target=0)
        assert symbol_to_bit(float(out[0])) == expected_bit

    def test_encode_decode_identity(self):
        # brute force over all four input patterns
        for b in all_patterns():
            bits = np.array([symbol_to_bit(x) for x in b])
            ncs = xor_encode(bits)
            for k in (0, 1):
                got = xor_decode(np.array([ncs]), b[:, None], target=k)
                assert float(got[0]) == b[k]


class TestLinearEncode:
    def test_identity_passthrough(self):
        G = np.eye(2)
        b = np.array([1.0, -1.0])
        for l in (0, 1):
            assert linear_encode(G, b, l) == b[l]

    def test_worked_example(self):
        G = np.array([[1.0, 1.0], [1.0, 0.0]])
        b = np.array([1.0, -1.0])
        assert linear_encode(G, b, 0) == 0.0
        assert linear_encode(G, b, 1) == 1.0

    def test_all_ones_gives_column_sum(self):
        G = np.array([[1.0, 0.0], [1.0, 1.0]])
        b = np.ones(2)
        for l in (0, 1):
            assert linear_encode(G, b, l) == G[:, l].sum()

    def test_encode_ncs_uses_each_relays_own_detections(self):
        G = np.array([[1.0, 1.0], [0.0, 1.0]])
        det = np.zeros((2, 2, 3))
        det[0] = [[1, 1, 1], [-1, -1, -1]]       # relay 0 detections
        det[1] = [[1, -1, 1], [1, 1, -1]]        # relay 1 detections
        ncs = encode_ncs(G, det)
        assert np.array_equal(ncs[0], G[:, 0] @ det[0])
        assert np.array_equal(ncs[1], G[:, 1] @ det[1])


class TestEnumerationAndRandomDesign:
    def test_exactly_six_invertible_for_m2(self):
        # exhaustive oracle: count |det| > 0 over all 2^4 binary matrices
        count = 0
        for bits in product((0, 1), repeat=4):
            if abs(np.linalg.det(np.array(bits, float).reshape(2, 2))) > 1e-9:
                count += 1
        assert count == 6
        assert len(enumerate_invertible_binary(2)) == 6

    def test_m1_is_always_one(self):
        cands = enumerate_invertible_binary(1)
        assert len(cands) == 1 and cands[0][0, 0] == 1.0
        G = design_G_random(1, np.random.default_rng(0))
        assert G.entries[0, 0] == 1.0

    def test_random_design_invertible_and_covers_pool(self):
        rng = np.random.default_rng(1)
        seen = set()
        for _ in range(200):
            G = design_G_random(2, rng)
            assert abs(np.linalg.det(G.entries)) >= 1.0 - 1e-9
            seen.add(tuple(G.entries.ravel().astype(int)))
        assert len(seen) == 6   # all pool members appear

    def test_encoder_invariants_enforced(self):
        with pytest.raises(ValueError):
            CodingMatrix(entries=np.array([[1.0, 1.0], [1.0, 1.0]]),
                         design=Scheme.RANDOM, role=Role.ENCODER)
        with pytest.raises(ValueError):
            CodingMatrix(entries=np.array([[2.0, 0.0], [0.0, 1.0]]),
                         design=Scheme.RANDOM, role=Role.ENCODER)


class TestMlDesign:
    def _calibrate(self, rng, sigma2=1e-30, gains=None):
        h = np.ones((2, 4), dtype=complex) / 2.0
        if gains is not None:
            h = h * np.asarray(gains)[:, None]
        w = np.ones((2, 4), dtype=complex) / 2.0
        training = np.where(rng.standard_normal((2, 50)) >= 0, 1.0, -1.0)
        g, outs = ml_calibration_outputs(h, w, training, sigma2, rng)
        return g, outs, training

    def test_six_candidates_evaluated(self):
        rng = np.random.default_rng(2)
        gains, outs, training = self._calibrate(rng)
        _, costs = design_G_ml(outs, gains, training)
        assert costs.shape == (6,)

    def test_noiseless_cost_zero_everywhere(self):
        # with perfect equalization each candidate decodes its own
        # calibration block exactly
        rng = np.random.default_rng(3)
        gains, outs, training = self._calibrate(rng, sigma2=1e-30)
        G, costs = design_G_ml(outs, gains, training)
        assert np.all(costs < 1e-20)
        # deterministic tie-break: lowest candidate index wins
        assert np.array_equal(G.entries, enumerate_invertible_binary(2)[0])

    def test_returned_cost_not_above_identity(self):
        rng = np.random.default_rng(4)
        gains, outs, training = self._calibrate(rng, sigma2=0.5)
        _, costs = design_G_ml(outs, gains, training)
        identity_idx = next(i for i, c in enumerate(enumerate_invertible_binary(2))
                            if np.array_equal(c, np.eye(2)))
        assert costs.min() <= costs[identity_idx]

    def test_rejects_empty_block(self):
        with pytest.raises(ValueError):
            design_G_ml(np.zeros((6, 2, 0)), np.ones(2), np.zeros((2, 0)))

    def test_matches_bruteforce_argmin(self):
        # independent oracle: recompute every cost with plain loops
        rng = np.random.default_rng(5)
        for _ in range(25):
            gains, outs, training = self._calibrate(rng, sigma2=0.4,
                                                    gains=rng.uniform(0.5, 2.0, 2))
            G, costs = design_G_ml(outs, gains, training)
            cands = enumerate_invertible_binary(2)
            oracle_costs = []
            for j, cand in enumerate(cands):
                total = 0.0
                for t in range(training.shape[1]):
                    z = outs[j][:, t] / gains
                    rec = np.linalg.solve(cand.T.astype(complex), z)
                    total += np.sum(np.abs(training[:, t] - rec) ** 2)
                oracle_costs.append(total)
            oracle_best = argmin_with_ties(oracle_costs)
            assert oracle_best == argmin_with_ties(costs), \
                "argmin disagrees with brute force"
            assert np.array_equal(G.entries, cands[oracle_best])


class TestMmseDesign:
    def _scenario(self, rng, sigma2=0.1):
        h = complex_gaussian(rng, (2, 8))
        w = h / (sigma2 + np.sum(np.abs(h) ** 2, axis=1))[:, None]
        G = design_G_random(2, rng)
        return h, w, G

    def test_normal_equations(self):
        # G_mmse R_b = P_ab must hold to high relative accuracy
        from plnc_sim.network_coding import _second_order_stats
        rng = np.random.default_rng(6)
        h, w, G = self._scenario(rng)
        dec = design_G_mmse(h, w, G, 0.1)
        _, _, P_ab, R_b = _second_order_stats(G, h, w, 0.1)
        residual = np.linalg.norm(dec.entries @ R_b - P_ab)
        assert residual < 1e-9 * max(np.linalg.norm(P_ab), 1.0)

    def test_noiseless_perfect_equalization_recovers_ncs(self):
        h = np.ones((2, 4), dtype=complex) / 2.0
        w = np.ones((2, 4), dtype=complex) / 2.0   # w^H h = 1 exactly
        G = CodingMatrix(np.array([[1.0, 1.0], [1.0, 0.0]]),
                         Scheme.RANDOM, Role.ENCODER)
        dec = design_G_mmse(h, w, G, sigma2=1e-30)
        for b in all_patterns():
            ncs = G.entries.T @ b
            assert np.allclose((dec.entries @ ncs).real, ncs, atol=1e-9)

    def test_sample_ls_oracle(self):
        # the closed form must match the least-squares minimizer fitted
        # on simulated (a, b) sample pairs
        rng = np.random.default_rng(7)
        sigma2 = 0.15
        h, w, G = self._scenario(rng, sigma2)
        gains = np.sum(w.conj() * h, axis=1)
        nvar = sigma2 * np.sum(np.abs(w) ** 2, axis=1)
        T = 100_000
        b = np.where(rng.standard_normal((2, T)) >= 0, 1.0, -1.0)
        a = G.entries.T @ b
        eta = complex_gaussian(rng, (2, T)) * np.sqrt(nvar)[:, None]
        z = gains[:, None] * a + eta
        ls = np.linalg.solve((z @ z.conj().T).T, (a @ z.conj().T).T).T
        dec = design_G_mmse(h, w, G, sigma2)
        rel = np.linalg.norm(dec.entries - ls) / np.linalg.norm(dec.entries)
        assert rel < 1e-2

    def test_mse_not_worse_than_plain_inversion(self):
        rng = np.random.default_rng(8)
        sigma2 = 0.3
        h, w, G = self._scenario(rng, sigma2)
        gains = np.sum(w.conj() * h, axis=1)
        nvar = sigma2 * np.sum(np.abs(w) ** 2, axis=1)
        T = 50_000
        b = np.where(rng.standard_normal((2, T)) >= 0, 1.0, -1.0)
        a = G.entries.T @ b
        z = gains[:, None] * a + complex_gaussian(rng, (2, T)) * np.sqrt(nvar)[:, None]
        dec = design_G_mmse(h, w, G, sigma2)
        mse_mmse = np.mean(np.abs(a - dec.entries @ z) ** 2)
        mse_plain = np.mean(np.abs(a - z / gains[:, None]) ** 2)
        assert mse_mmse <= mse_plain + 1e-12

    def test_literal_cross_term_flag_changes_offdiagonal(self):
        rng = np.random.default_rng(9)
        h, w, _ = self._scenario(rng)
        G = CodingMatrix(np.array([[1.0, 1.0], [1.0, 0.0]]),
                         Scheme.RANDOM, Role.ENCODER)
        derived = design_G_mmse(h, w, G, 0.1)
        literal = design_G_mmse(h, w, G, 0.1, literal_cross_terms=True)
        assert not np.allclose(derived.entries, literal.entries)

    def test_selection_prefers_reliable_detections(self):
        # user 0 badly detected at relay 0: the chosen encoder must not
        # route that detection into relay 0's stream
        h = np.ones((2, 8), dtype=complex) / np.sqrt(8)
        w = h.copy()
        flips = np.array([[0.4, 1e-4], [1e-4, 1e-4]])
        G, scores = select_G_mmse(h, w, 0.05, flip_probs=flips)
        assert G.entries[0, 0] == 0.0
        assert scores.shape == (6,)

    def test_chain_error_in_unit_interval(self):
        rng = np.random.default_rng(10)
        h, w, G = self._scenario(rng)
        p = predicted_chain_error(G, h, w, 0.1,
                                  flip_probs=np.full((2, 2), 0.01))
        assert 0.0 <= p <= 1.0

    def test_predicted_user_mse_closed_form(self):
        from plnc_sim import predicted_user_mse
        # perfect equalization, vanishing noise: zero residual MSE
        h = np.ones((2, 4), dtype=complex) / 2.0
        w = np.ones((2, 4), dtype=complex) / 2.0
        G = np.eye(2)
        assert predicted_user_mse(G, h, w, sigma2=1e-12) < 1e-9
        # identity encoder, equal gains: m * s||w||^2 / (|mu|^2 + s||w||^2)
        s = 0.25
        expected = 2 * s / (1.0 + s)
        assert abs(predicted_user_mse(G, h, w, s) - expected) < 1e-12


class TestJointDecoding:
    def test_identity_passthrough(self):
        z = np.array([1.0, -1.0], dtype=complex)
        out = decode_joint(np.eye(2), z, gains=np.ones(2))
        assert np.array_equal(out, [1.0, -1.0])

    def test_worked_example(self):
        # NCS [0, 1] produced by G = [[1,1],[1,0]] from b = [+1, -1]
        G = np.array([[1.0, 1.0], [1.0, 0.0]])
        out = decode_joint(G, np.array([0.0, 1.0], dtype=complex), np.ones(2))
        assert np.array_equal(out, [1.0, -1.0])

    def test_bruteforce_all_encoders_and_patterns(self):
        # noiseless exact recovery for all 6 encoders x 4 patterns
        for cand in enumerate_invertible_binary(2):
            for b in all_patterns():
                ncs = cand.T @ b
                out = decode_joint(cand, ncs.astype(complex), np.ones(2))
                assert np.array_equal(out, b), f"failed for {cand} {b}"

    def test_gain_normalization(self):
        G = np.array([[1.0, 0.0], [1.0, 1.0]])
        gains = np.array([2.0 + 0j, 0.5 + 0j])
        for b in all_patterns():
            z = gains * (G.T @ b)
            out = decode_joint(G, z, gains)
            assert np.array_equal(out, b)


class TestDirectAidedDecoding:
    def test_worked_example(self):
        G = np.array([[1.0, 1.0], [1.0, 0.0]])
        ncs = np.array([0.0, 1.0])
        direct = np.array([123.0, -1.0])   # target slot is ignored
        out = decode_with_direct(G, ncs, direct, target=0, relay_pos=0)
        assert out == 1.0

    def test_zero_coefficient_falls_back_to_other_relay(self):
        G = np.array([[0.0, 1.0], [1.0, 0.0]])   # user 0 absent from relay 0
        b = np.array([-1.0, 1.0])
        ncs = G.T @ b
        out = decode_with_direct(G, ncs, np.array([0.0, b[1]]), target=0,
                                 relay_pos=0)
        assert out == b[0]

    def test_bruteforce_all_encoders_and_patterns(self):
        for cand in enumerate_invertible_binary(2):
            for b in all_patterns():
                ncs = cand.T @ b
                for k in (0, 1):
                    out = decode_with_direct(cand, ncs, b, target=k)
                    assert out == b[k], f"failed for {cand} {b} user {k}"

    def test_levels_and_slicing(self):
        G = np.array([[1.0, 1.0], [1.0, 0.0]])
        assert np.array_equal(ncs_levels(G, 0), [-2.0, 0.0, 2.0])
        assert np.array_equal(ncs_levels(G, 1), [-1.0, 1.0])
        levels = ncs_levels(G, 0)
        assert slice_to_levels(0.9, levels) == 0.0
        assert slice_to_levels(1.1, levels) == 2.0
        assert slice_to_levels(1.0, levels) == 0.0   # tie goes to lower level
        assert slice_to_levels(-5.0, levels) == -2.0

    def test_detect_ncs_slices_to_admissible_values(self):
        G = np.array([[1.0, 1.0], [0.0, 1.0]])
        z = np.array([1.8 + 0.2j, -0.7 - 0.1j])
        est = detect_ncs(G, z, gains=np.ones(2))
        assert est[0] in ncs_levels(G, 0)
        assert est[1] in ncs_levels(G, 1)


class TestRandomizedRoundtrips:
    def test_noiseless_roundtrip_property(self):
        # randomized property: any invertible encoder, any +-1 packet,
        # unequal complex gains, both decoders recover exactly
        rng = np.random.default_rng(11)
        for _ in range(50):
            G = design_G_random(2, rng)
            b = np.where(rng.standard_normal((2, 64)) >= 0, 1.0, -1.0)
            gains = (0.5 + rng.random(2)) * np.exp(2j * np.pi * rng.random(2))
            z = gains[:, None] * (G.entries.T @ b)
            joint = decode_joint(G, z, gains)
            assert np.array_equal(joint, b)
            est = detect_ncs(G, z, gains)
            for k in (0, 1):
                direct_aided = decode_with_direct(G, est, b, target=k)
                assert np.array_equal(direct_aided, b[k])
