"""Quick invariant checks on small instances, for ``pimcancel selftest``."""
import numpy as np

from .basis import ModelKind, ModelSpec, build_data_matrix, enumerate_basis, raw_count, raw_index_set
from .canceller import cancel_block, cancel_streaming
from .estimator import fit_block_ls
from .frontend import PimKernel, apply_tx_chain, generate_pim, random_pim_kernel, random_tx_chain
from .metrics import welch_psd
from .rng import SplitMix64
from .signal import IqSequence, mean_power_db

FS = 30.72e6


def _random(seed, n):
    return IqSequence(SplitMix64(seed).complex_normal(n), FS)


def _checks():
    s1, s2 = _random(1, 2048), _random(2, 2048)

    def basis_counts():
        a = len(enumerate_basis(ModelSpec(ModelKind.MEMORYLESS, 1, 1)))
        b = len(enumerate_basis(ModelSpec(ModelKind.TX_MEMORY, 1, 1, 1, 1)))
        return a == 3 and b == 42

    def counting_law():
        spec = ModelSpec(ModelKind.TX_MEMORY, 2, 1, 1, 2)
        return len(raw_index_set(spec)) == raw_count(spec)

    def subset_law():
        a = set(enumerate_basis(ModelSpec(ModelKind.MEMORYLESS, 2, 3)))
        b = set(enumerate_basis(ModelSpec(ModelKind.TX_MEMORY, 2, 3, 1, 0)))
        return a <= b

    def power_law():
        k = random_pim_kernel(3, 1, 1)
        p0 = mean_power_db(generate_pim(s1, s2, k))
        g = 10 ** (1.5 / 20)
        p1 = mean_power_db(generate_pim(s1.replace(s1.samples * g), s2.replace(s2.samples * g), k))
        return abs((p1 - p0) - 4.5) < 1e-9

    def chain_linearity():
        ch = random_tx_chain(4, 1, 2, 0.5)
        lhs = apply_tx_chain(s1.replace(2 * s1.samples + 1j * s2.samples), ch).samples
        rhs = 2 * apply_tx_chain(s1, ch).samples + 1j * apply_tx_chain(s2, ch).samples
        return np.max(np.abs(lhs - rhs)) < 1e-12

    def exact_recovery():
        terms = enumerate_basis(ModelSpec(ModelKind.TX_MEMORY, 1, 1, 1, 1))
        truth = SplitMix64(5).complex_normal(len(terms))
        a = build_data_matrix(s1, s2, terms)
        y = s1.replace(a.values @ truth)
        theta, _ = fit_block_ls(a, y)
        return np.linalg.norm(theta.values - truth) < 1e-8 * np.linalg.norm(truth)

    def streaming_matches_block():
        terms = enumerate_basis(ModelSpec(ModelKind.TX_MEMORY, 2, 1, 1, 1))
        theta = SplitMix64(6).complex_normal(len(terms))
        y = _random(7, len(s1))
        blk = cancel_block(y, build_data_matrix(s1, s2, terms), theta).samples
        st = cancel_streaming(s1, s2, y, terms, theta, chunk_size=100).samples
        return np.max(np.abs(blk - st)) < 1e-12

    def parseval():
        x = _random(8, 64 * 256)
        psd = welch_psd(x, 256)
        return abs(10 * np.log10(psd.integrated_power()) - mean_power_db(x)) < 0.3

    def kernel_window():
        try:
            PimKernel({(0, 0, 5): 1.0}, 1, 1)
        except ValueError:
            return True
        return False

    return [
        ("basis counts 3 / 42", basis_counts),
        ("raw index counting law", counting_law),
        ("memoryless basis subset of tx-memory basis", subset_law),
        ("third-order power law", power_law),
        ("tx chain linearity", chain_linearity),
        ("noiseless coefficient recovery", exact_recovery),
        ("streaming equals block", streaming_matches_block),
        ("Welch Parseval", parseval),
        ("kernel window validation", kernel_window),
    ]


def run_selftest(verbose=False):
    ok = True
    for name, check in _checks():
        try:
            passed = bool(check())
        except Exception as exc:  # report and carry on
            passed = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
