"""Max-log detection against brute force, and incremental-LLR cache algebra."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lctsim.channel import sample_channel
from lctsim.detector import advance_cache, approx_llrs, max_log_detect
from lctsim.modem import QAM16, QPSK, build_vector_alphabet, modulate


def brute_force_llrs(y, h, noise_var, scheme, n_tx):
    """Direct bit-metric evaluation: enumerate every bit string."""
    k = scheme.bits_per_symbol
    n_bits = k * n_tx
    best = {0: np.full(n_bits, np.inf), 1: np.full(n_bits, np.inf)}
    for word in range(2**n_bits):
        bits = [(word >> (n_bits - 1 - t)) & 1 for t in range(n_bits)]
        x = modulate(bits, scheme, n_tx)[:, 0]
        d = float(np.linalg.norm(y - h @ x) ** 2)
        for t, bit in enumerate(bits):
            if d < best[bit][t]:
                best[bit][t] = d
    return (best[1] - best[0]) / noise_var


def random_instance(rng, scheme, n_tx, n_rx, n_d=1):
    h = sample_channel(rng, n_rx, n_tx)
    y = sample_channel(rng, n_rx, n_d)
    return y, h


class TestMaxLogDetect:
    def test_scalar_qpsk_anchor(self):
        va = build_vector_alphabet(QPSK, 1)
        llrs, _ = max_log_detect(np.array([[0.5 + 0j]]), np.array([[1.0 + 0j]]), 1.0, va)
        assert llrs[0] == pytest.approx(np.sqrt(2.0), abs=1e-12)
        assert llrs[1] == pytest.approx(0.0, abs=1e-12)

    def test_zero_observation_symmetry(self):
        va = build_vector_alphabet(QPSK, 2)
        llrs, _ = max_log_detect(np.zeros((2, 3), complex), np.eye(2, dtype=complex), 1.0, va)
        assert np.allclose(llrs, 0.0, atol=1e-12)

    @pytest.mark.parametrize("scheme,n_draws", [(QPSK, 60), (QAM16, 20)])
    def test_matches_brute_force(self, scheme, n_draws):
        va = build_vector_alphabet(scheme, 2)
        rng = np.random.default_rng(17)
        for _ in range(n_draws):
            y, h = random_instance(rng, scheme, 2, 2)
            llrs, _ = max_log_detect(y, h, 0.5, va)
            expect = brute_force_llrs(y[:, 0], h, 0.5, scheme, 2)
            assert np.allclose(llrs, expect, atol=1e-9)

    def test_cache_residual_consistency(self):
        va = build_vector_alphabet(QPSK, 2)
        rng = np.random.default_rng(23)
        y, h = random_instance(rng, QPSK, 2, 2, n_d=4)
        llrs, cache = max_log_detect(y, h, 0.7, va)
        n_bpu = va.n_bits_per_use
        for i in range(llrs.size):
            t = i // n_bpu
            assert np.allclose(cache.p[i], y[:, t] - h @ cache.x0[i], atol=1e-12)
            assert np.allclose(cache.q[i], y[:, t] - h @ cache.x1[i], atol=1e-12)
            expect = (np.linalg.norm(cache.q[i]) ** 2 - np.linalg.norm(cache.p[i]) ** 2) / 0.7
            assert cache.base_llrs[i] == pytest.approx(expect, abs=1e-9)

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_joint_negation_invariance(self, seed):
        va = build_vector_alphabet(QPSK, 2)
        rng = np.random.default_rng(seed)
        y, h = random_instance(rng, QPSK, 2, 2, n_d=2)
        base, _ = max_log_detect(y, h, 1.0, va)
        neg, _ = max_log_detect(-y, -h, 1.0, va)
        assert np.allclose(base, neg, atol=1e-9)

    @given(st.integers(0, 2**31 - 1), st.floats(0, 2 * np.pi))
    @settings(max_examples=25, deadline=None)
    def test_common_phase_invariance(self, seed, phi):
        va = build_vector_alphabet(QPSK, 2)
        rng = np.random.default_rng(seed)
        y, h = random_instance(rng, QPSK, 2, 2, n_d=2)
        rot = np.exp(1j * phi)
        base, _ = max_log_detect(y, h, 1.0, va)
        spun, _ = max_log_detect(rot * y, rot * h, 1.0, va)
        assert np.allclose(base, spun, atol=1e-8)


def pinned_recompute(y, h_eff, cache, n_bpu, noise_var):
    """Re-evaluate the bit metrics with argmin vectors frozen to the cache."""
    out = np.empty_like(cache.base_llrs)
    for i in range(out.size):
        t = i // n_bpu
        d0 = np.linalg.norm(y[:, t] - h_eff @ cache.x0[i]) ** 2
        d1 = np.linalg.norm(y[:, t] - h_eff @ cache.x1[i]) ** 2
        out[i] = (d1 - d0) / noise_var
    return out


class TestApproxLlrs:
    def setup_method(self):
        self.va = build_vector_alphabet(QPSK, 2)
        rng = np.random.default_rng(31)
        self.y, self.h = random_instance(rng, QPSK, 2, 2, n_d=4)
        self.nv = 0.4
        _, self.cache = max_log_detect(self.y, self.h, self.nv, self.va)

    def test_zero_offset_identity(self):
        out = approx_llrs(self.cache, 0.0, 1, 0)
        assert np.array_equal(out, self.cache.base_llrs)

    def test_exact_under_pinned_argmins(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            h_off = complex(*rng.normal(0, 0.05, 2))
            r, c = rng.integers(0, 2, 2)
            got = approx_llrs(self.cache, h_off, r, c)
            h_pert = self.h.copy()
            h_pert[r, c] += h_off
            expect = pinned_recompute(self.y, h_pert, self.cache, 4, self.nv)
            assert np.allclose(got, expect, atol=1e-9)

    def test_constant_modulus_drops_quadratic_term(self):
        # QPSK: |x0_c| == |x1_c|, so the |h|^2 term cancels and the update is linear in Re/Im
        h_off = 0.03 + 0.07j
        lin_a = approx_llrs(self.cache, h_off, 0, 1) - self.cache.base_llrs
        lin_b = approx_llrs(self.cache, 2 * h_off, 0, 1) - self.cache.base_llrs
        assert np.allclose(2 * lin_a, lin_b, atol=1e-9)


class TestAdvanceCache:
    def setup_method(self):
        self.va = build_vector_alphabet(QPSK, 2)
        rng = np.random.default_rng(37)
        self.y, self.h = random_instance(rng, QPSK, 2, 2, n_d=4)
        self.nv = 0.4

    def test_zero_offset_no_change(self):
        _, cache = max_log_detect(self.y, self.h, self.nv, self.va)
        p0, q0, b0 = cache.p.copy(), cache.q.copy(), cache.base_llrs.copy()
        advance_cache(cache, 0.0, 0, 0)
        assert np.array_equal(cache.p, p0)
        assert np.array_equal(cache.q, q0)
        assert np.array_equal(cache.base_llrs, b0)

    def test_residuals_track_channel(self):
        _, cache = max_log_detect(self.y, self.h, self.nv, self.va)
        h_off = 0.05 - 0.02j
        advance_cache(cache, h_off, 1, 1)
        h_new = self.h.copy()
        h_new[1, 1] += h_off
        for i in range(cache.base_llrs.size):
            t = i // 4
            assert np.allclose(cache.p[i], self.y[:, t] - h_new @ cache.x0[i], atol=1e-12)
            assert np.allclose(cache.q[i], self.y[:, t] - h_new @ cache.x1[i], atol=1e-12)
        expect = pinned_recompute(self.y, h_new, cache, 4, self.nv)
        assert np.allclose(cache.base_llrs, expect, atol=1e-9)

    def test_two_advances_compose(self):
        _, cache_a = max_log_detect(self.y, self.h, self.nv, self.va)
        _, cache_b = max_log_detect(self.y, self.h, self.nv, self.va)
        advance_cache(cache_a, 0.02 + 0.01j, 0, 1)
        advance_cache(cache_a, -0.05j, 0, 1)
        advance_cache(cache_b, 0.02 + 0.01j - 0.05j, 0, 1)
        assert np.allclose(cache_a.p, cache_b.p, atol=1e-12)
        assert np.allclose(cache_a.q, cache_b.q, atol=1e-12)
        assert np.allclose(cache_a.base_llrs, cache_b.base_llrs, atol=1e-9)
