import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pimcancel.basis import BasisTerm, ModelKind, ModelSpec, build_data_matrix, enumerate_basis
from pimcancel.canceller import CancellerError, StreamingState, cancel, cancel_block, cancel_streaming
from pimcancel.estimator import CoefficientVector, fit_block_ls
from pimcancel.frontend import FrontEndModel, random_pim_kernel, random_tx_chain, simulate_rx
from pimcancel.signal import CarrierConfig, IqSequence, generate_cc, mean_power_db

from conftest import FS, random_seq

MODEL_A = ModelSpec(ModelKind.MEMORYLESS, 3, 4)
MODEL_B = ModelSpec(ModelKind.TX_MEMORY, 3, 4, 1, 1)


def carriers(n, seeds=(1, 2)):
    return [generate_cc(CarrierConfig(seed=s), n, FS) for s in seeds]


def rand_theta(terms, seed=0):
    return CoefficientVector(random_seq(seed, len(terms)).samples * 0.1, terms)


class TestBlock:
    def test_zero_theta_is_identity(self, pair):
        s1, s2 = pair
        terms = enumerate_basis(MODEL_A)
        y = random_seq(3, len(s1))
        out = cancel(y, s1, s2, CoefficientVector(np.zeros(len(terms)), terms))
        assert np.array_equal(out.samples, y.samples)

    def test_noiseless_matched_cancels(self):
        s1, s2 = carriers(20000)
        m = FrontEndModel(pim=random_pim_kernel(5, 3, 4), noise_floor_dbfs=None)
        y = simulate_rx(m, s1, s2)
        terms = enumerate_basis(MODEL_A)
        a = build_data_matrix(s1, s2, terms)
        theta, _ = fit_block_ls(a, y)
        out = cancel_block(y, a, theta)
        assert np.mean(np.abs(out.samples) ** 2) <= 1e-16 * np.mean(np.abs(y.samples) ** 2)

    def test_noise_limited(self):
        s1, s2 = carriers(30000)
        m = FrontEndModel(pim=random_pim_kernel(5, 3, 4), noise_floor_dbfs=-90.0, rng_seed=3)
        y = simulate_rx(m, s1, s2)
        terms = enumerate_basis(MODEL_A)
        theta, _ = fit_block_ls(build_data_matrix(s1, s2, terms), y)
        out = cancel(y, s1, s2, theta)
        assert abs(mean_power_db(out) + 90.0) <= 0.5

    def test_term_mismatch(self, pair):
        s1, s2 = pair
        a = build_data_matrix(s1, s2, enumerate_basis(MODEL_A))
        bad = CoefficientVector(np.zeros(8), enumerate_basis(ModelSpec(ModelKind.MEMORYLESS, 4, 3)))
        with pytest.raises(CancellerError):
            cancel_block(random_seq(1, len(s1)), a, bad)
        with pytest.raises(CancellerError):
            cancel_block(random_seq(1, 10), a, rand_theta(enumerate_basis(MODEL_A)))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32))
    def test_fitted_canceller_never_amplifies_training_data(self, seed):
        s1, s2, y = random_seq(seed, 300), random_seq(seed + 1, 300), random_seq(seed + 2, 300)
        a = build_data_matrix(s1, s2, enumerate_basis(MODEL_A))
        theta, _ = fit_block_ls(a, y)
        assert mean_power_db(cancel_block(y, a, theta)) <= mean_power_db(y) + 1e-9

    def test_richer_model_fits_memory_better(self):
        s1, s2 = carriers(20000)
        m = FrontEndModel(tx1=random_tx_chain(6, 1, 1, 0.3), tx2=random_tx_chain(7, 1, 1, 0.3),
                          pim=random_pim_kernel(5, 3, 4), noise_floor_dbfs=None)
        y = simulate_rx(m, s1, s2)
        res = {}
        for name, spec in (("A", MODEL_A), ("B", MODEL_B)):
            theta, _ = fit_block_ls(build_data_matrix(s1, s2, enumerate_basis(spec)), y)
            res[name] = mean_power_db(cancel(y, s1, s2, theta))
        assert res["B"] < res["A"]


class TestStreaming:
    def test_latency(self):
        assert StreamingState([BasisTerm(0, 0, 0)], [1.0]).latency == 0
        terms = enumerate_basis(MODEL_A)
        assert StreamingState(terms, np.zeros(len(terms))).latency == 3
        assert StreamingState(terms, np.zeros(len(terms)), latency=4).latency == 4
        with pytest.raises(CancellerError):
            StreamingState(terms, np.zeros(len(terms)), latency=2)

    def test_latency_shifts_output(self, backend):
        terms = enumerate_basis(MODEL_A)
        s1, s2, y = random_seq(1, 50), random_seq(2, 50), random_seq(3, 50)
        theta = rand_theta(terms)
        st_ = StreamingState(terms, theta)
        first = st_.process(s1.samples, s2.samples, y.samples)
        assert first.shape == (47,) and st_.emitted == 47
        assert st_.flush().shape == (3,)

    def test_long_model_b_matches_block(self, backend):
        s1, s2 = carriers(90000)
        terms = enumerate_basis(MODEL_B)
        theta = rand_theta(terms, 4)
        y = random_seq(5, 90000)
        block = cancel(y, s1, s2, theta).samples
        stream = cancel_streaming(s1, s2, y, terms, theta).samples
        assert np.max(np.abs(block - stream)) <= 1e-12

    @pytest.mark.parametrize("chunk", [1, 2, 7, 64, 333])
    def test_chunking_invariant(self, backend, chunk):
        terms = enumerate_basis(MODEL_B)
        theta = rand_theta(terms, 4)
        s1, s2, y = random_seq(1, 400), random_seq(2, 400), random_seq(3, 400)
        ref = cancel(y, s1, s2, theta).samples
        got = cancel_streaming(s1, s2, y, terms, theta, chunk_size=chunk).samples
        assert np.max(np.abs(ref - got)) <= 1e-12

    def test_extra_latency_same_output(self, backend):
        terms = enumerate_basis(MODEL_A)
        theta = rand_theta(terms)
        s1, s2, y = random_seq(1, 200), random_seq(2, 200), random_seq(3, 200)
        ref = cancel(y, s1, s2, theta).samples
        got = cancel_streaming(s1, s2, y, terms, theta, state=StreamingState(terms, theta, latency=6))
        assert np.max(np.abs(ref - got.samples)) <= 1e-12

    def test_shorter_than_latency(self, backend):
        terms = enumerate_basis(MODEL_B)
        theta = rand_theta(terms)
        s1, s2, y = random_seq(1, 2), random_seq(2, 2), random_seq(3, 2)
        ref = cancel(y, s1, s2, theta).samples
        assert np.max(np.abs(ref - cancel_streaming(s1, s2, y, terms, theta).samples)) <= 1e-12

    def test_chunk_shape_errors(self):
        terms = [BasisTerm(0, 0, 0)]
        st_ = StreamingState(terms, [1.0])
        with pytest.raises(CancellerError):
            st_.process(np.ones(3), np.ones(2), np.ones(3))
        with pytest.raises(CancellerError):
            StreamingState(terms, [1.0, 2.0])
        with pytest.raises(CancellerError):
            StreamingState([], [])
