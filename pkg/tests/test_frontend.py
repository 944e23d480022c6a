import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pimcancel.basis import BasisTerm, raw_index_set, ModelSpec
from pimcancel.frontend import (
    FrontEndError,
    FrontEndModel,
    PimKernel,
    TxChainModel,
    apply_tx_chain,
    generate_pim,
    pim_memoryless,
    pim_tx_memory,
    random_pim_kernel,
    random_tx_chain,
    simulate_components,
    simulate_rx,
)
from pimcancel.signal import IqSequence, SignalError, mean_power_db

from conftest import FS, random_seq
from oracles import convolve_taps, pim_triple_loop


def impulse(n, at):
    x = np.zeros(n, dtype=complex)
    x[at] = 1
    return IqSequence(x, FS)


class TestTxChain:
    def test_identity(self, pair):
        s1, _ = pair
        out = apply_tx_chain(s1, TxChainModel())
        assert np.array_equal(out.samples, s1.samples)

    def test_centre_tap(self):
        out = apply_tx_chain(impulse(12, 5), TxChainModel((0, 1, 0), 1, 1))
        assert np.argmax(np.abs(out.samples)) == 5 and np.sum(np.abs(out.samples)) == 1

    def test_post_cursor_tap_delays(self):
        out = apply_tx_chain(impulse(12, 5), TxChainModel((0, 0, 1), 1, 1))
        np.testing.assert_array_equal(out.samples, convolve_taps(impulse(12, 5).samples, [0, 0, 1], 1))
        assert np.argmax(np.abs(out.samples)) == 6

    def test_matches_direct_convolution(self, pair):
        s1, _ = pair
        ch = random_tx_chain(3, 2, 1, 0.7)
        np.testing.assert_allclose(apply_tx_chain(s1, ch).samples,
                                   convolve_taps(s1.samples, ch.taps, ch.M1), atol=1e-13)

    def test_linearity(self, pair):
        s1, s2 = pair
        ch = random_tx_chain(4, 1, 1, 0.5)
        a, b = 0.3 - 2j, 1.7 + 0.1j
        lhs = apply_tx_chain(s1.replace(a * s1.samples + b * s2.samples), ch).samples
        rhs = a * apply_tx_chain(s1, ch).samples + b * apply_tx_chain(s2, ch).samples
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_validation(self):
        with pytest.raises(FrontEndError):
            TxChainModel((1, 0), 1, 1)
        with pytest.raises(FrontEndError):
            TxChainModel((0, 0, 0), 1, 1)
        with pytest.raises(SignalError):
            apply_tx_chain(IqSequence(np.zeros(0), FS), TxChainModel())

    def test_round_trip(self):
        ch = random_tx_chain(9, 1, 2)
        assert TxChainModel.from_dict(ch.to_dict()) == ch


class TestGeneratePim:
    def test_constant_inputs(self):
        s1 = IqSequence(np.ones(8), FS)
        s2 = IqSequence(1j * np.ones(8), FS)
        out = generate_pim(s1, s2, PimKernel({(0, 0, 0): 1.0}, 0, 0))
        np.testing.assert_allclose(out.samples, -1j)

    def test_s1_scaling(self, pair):
        s1, s2 = pair
        k = PimKernel({(0, 0, 0): 1.0}, 0, 0)
        base = generate_pim(s1, s2, k).samples
        np.testing.assert_allclose(generate_pim(s1.replace(2 * s1.samples), s2, k).samples, 4 * base, rtol=1e-14)

    def test_matches_triple_loop_diagonal(self):
        s1, s2 = random_seq(21, 300), random_seq(22, 300)
        k = random_pim_kernel(5, 3, 4)
        ref = pim_triple_loop(s1.samples, s2.samples, [(tuple(t), g) for t, g in k.coefficients.items()])
        got = generate_pim(s1, s2, k).samples
        assert np.max(np.abs(got - ref)) <= 1e-12 * np.max(np.abs(ref))

    def test_matches_triple_loop_general_kernel(self):
        s1, s2 = random_seq(23, 200), random_seq(24, 200)
        coeffs = {(-2, 1, 0): 0.5j, (0, 0, 3): -0.2, (1, 2, -3): 0.1 + 0.1j}
        k = PimKernel(coeffs, 3, 3)
        ref = pim_triple_loop(s1.samples, s2.samples, coeffs.items())
        assert np.max(np.abs(generate_pim(s1, s2, k).samples - ref)) <= 1e-12 * np.max(np.abs(ref))

    def test_mismatch(self):
        with pytest.raises(SignalError):
            generate_pim(random_seq(1, 10), random_seq(2, 11), PimKernel({(0, 0, 0): 1}, 0, 0))
        with pytest.raises(SignalError):
            generate_pim(random_seq(1, 10), random_seq(2, 10, fs=1e6), PimKernel({(0, 0, 0): 1}, 0, 0))

    def test_kernel_validation(self):
        with pytest.raises(FrontEndError):
            PimKernel({(0, 0, 5): 1.0}, 3, 4)
        with pytest.raises(FrontEndError):
            PimKernel({(0, 0, 0): 0.0}, 3, 4)
        # terms written against raw carriers may use the TX window too
        PimKernel({(0, 0, 5): 1.0}, 3, 4, 0, 1)

    def test_kernel_canonicalises_keys(self):
        k = PimKernel({(1, -1, 0): 1.0, (-1, 1, 0): 2.0}, 1, 1)
        assert k.coefficients == {BasisTerm(-1, 1, 0): 3.0}

    def test_kernel_round_trip(self):
        k = random_pim_kernel(8, 3, 4)
        assert PimKernel.from_dict(k.to_dict()) == k


class TestDirectForms:
    def test_memoryless_direct_form_equals_kernel(self):
        s1, s2 = random_seq(31, 1000), random_seq(32, 1000)
        g = random_pim_kernel(6, 3, 4).values
        direct = pim_memoryless(s1, s2, g, 3).samples
        general = generate_pim(s1, s2, PimKernel.diagonal(g, 3)).samples
        assert np.max(np.abs(direct - general)) <= 1e-12 * np.max(np.abs(direct))

    def test_tx_memory_direct_form_matches_triple_loop(self):
        s1, s2 = random_seq(33, 150), random_seq(34, 150)
        spec = ModelSpec("txmemory", 1, 1, 1, 1)
        idx = raw_index_set(spec)
        coef = dict(zip(idx, random_seq(35, len(idx)).samples))
        got = pim_tx_memory(s1, s2, coef, 1, 1).samples
        flat = []
        for (l, k1, k2), g in coef.items():
            d1 = [l - 1 + i for i, k in enumerate(k1) for _ in range(k)]
            (d2,) = [l - 1 + i for i, k in enumerate(k2) if k]
            flat.append(((d1[0], d1[1], d2), g))
        ref = pim_triple_loop(s1.samples, s2.samples, flat)
        assert np.max(np.abs(got - ref)) <= 1e-12 * np.max(np.abs(ref))

    def test_bad_exponents(self):
        s = random_seq(1, 10)
        with pytest.raises(FrontEndError):
            pim_tx_memory(s, s, {(0, (1, 0), (1, 0)): 1.0}, 0, 1)


def _model(**kw):
    base = dict(pim=random_pim_kernel(1, 3, 4), noise_floor_dbfs=float("-inf"), ota_isolation_db=0.0, rng_seed=5)
    base.update(kw)
    return FrontEndModel(**base)


class TestSimulateRx:
    def test_noiseless_identity_chains_is_generate_pim(self, pair):
        s1, s2 = pair
        m = _model()
        assert np.array_equal(simulate_rx(m, s1, s2).samples, generate_pim(s1, s2, m.pim).samples)

    def test_diversity_attenuation(self, pair):
        s1, s2 = pair
        m = _model(ota_isolation_db=10.0)
        main = mean_power_db(simulate_rx(m, s1, s2, False))
        div = mean_power_db(simulate_rx(m, s1, s2, True))
        assert main - div == pytest.approx(10.0, abs=1e-9)

    def test_memory_changes_output(self, pair):
        s1, s2 = pair
        a = simulate_rx(_model(), s1, s2).samples
        b = simulate_rx(_model(tx1=random_tx_chain(2, 1, 1), tx2=random_tx_chain(3, 1, 1)), s1, s2).samples
        assert np.mean(np.abs(a - b) ** 2) > 0

    def test_memory_chains_expand_on_raw_carriers(self):
        # with TX memory the PIM equals the cascade evaluated with raw-carrier zero padding
        s1, s2 = random_seq(41, 120), random_seq(42, 120)
        t1, t2 = random_tx_chain(2, 1, 1, 0.5), random_tx_chain(3, 1, 1, 0.5)
        k = random_pim_kernel(4, 1, 2)
        m = _model(tx1=t1, tx2=t2, pim=k)
        pad = 10
        z = np.zeros(pad)
        x1 = convolve_taps(np.concatenate([z, s1.samples, z]), t1.taps, 1)
        x2 = convolve_taps(np.concatenate([z, s2.samples, z]), t2.taps, 1)
        ref = pim_triple_loop(x1, x2, [(tuple(t), g) for t, g in k.coefficients.items()])[pad:-pad]
        np.testing.assert_allclose(simulate_rx(m, s1, s2).samples, ref, atol=1e-13)

    def test_noise_calibration(self):
        s = IqSequence(np.zeros(90000), FS)
        m = _model(noise_floor_dbfs=-90.0)
        _, noise = simulate_components(m, s, s)
        assert abs(mean_power_db(noise) + 90.0) <= 0.1

    def test_noise_is_seeded(self, pair):
        s1, s2 = pair
        m = _model(noise_floor_dbfs=-60.0)
        assert np.array_equal(simulate_rx(m, s1, s2).samples, simulate_rx(m, s1, s2).samples)
        other = _model(noise_floor_dbfs=-60.0, rng_seed=6)
        assert not np.array_equal(simulate_rx(m, s1, s2).samples, simulate_rx(other, s1, s2).samples)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.05, 20.0))
    def test_third_order_power_law(self, g):
        s1, s2 = random_seq(51, 256), random_seq(52, 256)
        m = _model()
        p0 = mean_power_db(simulate_rx(m, s1, s2))
        p1 = mean_power_db(simulate_rx(m, s1.replace(g * s1.samples), s2.replace(g * s2.samples)))
        assert (p1 - p0) == pytest.approx(3 * 20 * np.log10(g), abs=1e-9)

    def test_model_round_trip(self):
        m = _model(tx1=random_tx_chain(2, 1, 1), noise_floor_dbfs=-70.0)
        assert FrontEndModel.from_dict(m.to_dict()) == m

    def test_isolation_must_be_non_negative(self):
        with pytest.raises(FrontEndError):
            _model(ota_isolation_db=-1.0)
