"""Ground-truth transceiver simulator: TX chains, PIM source, RX noise, OTA path.

The RX local oscillator is assumed to sit exactly on the upper IM3 sub-band
(2*f1 - f2), so the simulated PIM is centred at DC with no residual mixing
term. Sample reads outside the sequence are zero, both here and in the
canceller's data matrix.
"""
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisTerm, build_data_matrix
from .rng import SplitMix64, derive_seed
from .signal import IqSequence, SignalError, check_aligned

NOISE_LABEL_MAIN = 0x6E6F6973
NOISE_LABEL_DIVERSITY = 0x64697673


class FrontEndError(ValueError):
    pass


def _complex_list(values):
    return [[float(np.real(v)), float(np.imag(v))] for v in values]


def _parse_complex(v):
    if isinstance(v, (list, tuple)):
        re, im = v
        return complex(re, im)
    return complex(v)


@dataclass(frozen=True)
class TxChainModel:
    """Linear TX chain ``out[n] = sum_m taps[m + M1] * in[n - m]``, m in [-M1, M2]."""

    taps: tuple = (1.0 + 0j,)
    M1: int = 0
    M2: int = 0

    def __post_init__(self):
        taps = tuple(complex(t) for t in np.atleast_1d(np.asarray(self.taps, dtype=np.complex128)))
        object.__setattr__(self, "taps", taps)
        if self.M1 < 0 or self.M2 < 0:
            raise FrontEndError("M1 and M2 must be non-negative")
        if len(taps) != self.M1 + self.M2 + 1:
            raise FrontEndError(f"need {self.M1 + self.M2 + 1} taps for M1={self.M1}, M2={self.M2}, got {len(taps)}")
        if not any(taps):
            raise FrontEndError("TX chain needs at least one nonzero tap")

    @classmethod
    def gain(cls, g):
        return cls((complex(g),), 0, 0)

    def to_dict(self):
        return {"M1": self.M1, "M2": self.M2, "taps": _complex_list(self.taps)}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(_parse_complex(t) for t in d["taps"]), int(d.get("M1", 0)), int(d.get("M2", 0)))


@dataclass(frozen=True)
class PimKernel:
    """PIM-stage coefficients keyed by basis term.

    Delays must lie in ``[-(L1 + M1), L2 + M2]``; ``M1``/``M2`` are non-zero
    only for kernels written directly against the raw carriers.
    """

    coefficients: dict
    L1: int = 3
    L2: int = 4
    M1: int = 0
    M2: int = 0

    def __post_init__(self):
        coeffs = {}
        for key, val in dict(self.coefficients).items():
            t = key if isinstance(key, BasisTerm) else BasisTerm(*key)
            coeffs[t] = coeffs.get(t, 0j) + complex(val)
        lo, hi = -(self.L1 + self.M1), self.L2 + self.M2
        for t in coeffs:
            if min(t) < lo or max(t) > hi:
                raise FrontEndError(f"kernel term {tuple(t)} outside delay window [{lo}, {hi}]")
        if not any(coeffs.values()):
            raise FrontEndError("PIM kernel needs at least one nonzero coefficient")
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items())))

    @classmethod
    def diagonal(cls, gammas, L1):
        """Memoryless-TX kernel: ``gammas[i]`` weights ``s1[n-l]^2 conj(s2[n-l])``, l = i - L1."""
        gammas = list(gammas)
        L2 = len(gammas) - L1 - 1
        if L2 < 0:
            raise FrontEndError("need at least L1 + 1 coefficients")
        return cls({BasisTerm(i - L1, i - L1, i - L1): g for i, g in enumerate(gammas)}, L1, L2)

    @property
    def terms(self):
        return list(self.coefficients)

    @property
    def values(self):
        return np.array(list(self.coefficients.values()), dtype=np.complex128)

    def to_dict(self):
        return {
            "L1": self.L1, "L2": self.L2, "M1": self.M1, "M2": self.M2,
            "terms": [[t.d_a, t.d_b, t.d_c, v.real, v.imag] for t, v in self.coefficients.items()],
        }

    @classmethod
    def from_dict(cls, d):
        coeffs = {BasisTerm(int(a), int(b), int(c)): complex(re, im) for a, b, c, re, im in d["terms"]}
        return cls(coeffs, int(d.get("L1", 3)), int(d.get("L2", 4)), int(d.get("M1", 0)), int(d.get("M2", 0)))


@dataclass(frozen=True)
class FrontEndModel:
    tx1: TxChainModel = field(default_factory=TxChainModel)
    tx2: TxChainModel = field(default_factory=TxChainModel)
    pim: PimKernel = None
    noise_floor_dbfs: float = -65.0
    ota_isolation_db: float = 10.0
    rng_seed: int = 0
    tx_gain_db: float = 0.0

    def __post_init__(self):
        if self.pim is None:
            raise FrontEndError("FrontEndModel needs a PIM kernel")
        if not self.ota_isolation_db >= 0:
            raise FrontEndError("ota_isolation_db must be >= 0")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise FrontEndError("rng_seed must be an unsigned 64-bit integer")

    @property
    def noise_enabled(self):
        return self.noise_floor_dbfs is not None and np.isfinite(self.noise_floor_dbfs)

    def to_dict(self):
        return {
            "noise_floor_dbfs": None if not self.noise_enabled else float(self.noise_floor_dbfs),
            "ota_isolation_db": float(self.ota_isolation_db),
            "rng_seed": int(self.rng_seed),
            "tx_gain_db": float(self.tx_gain_db),
            "tx1": self.tx1.to_dict(),
            "tx2": self.tx2.to_dict(),
            "pim": self.pim.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        noise = d.get("noise_floor_dbfs")
        return cls(
            tx1=TxChainModel.from_dict(d["tx1"]),
            tx2=TxChainModel.from_dict(d["tx2"]),
            pim=PimKernel.from_dict(d["pim"]),
            noise_floor_dbfs=float("-inf") if noise is None else float(noise),
            ota_isolation_db=float(d.get("ota_isolation_db", 10.0)),
            rng_seed=int(d.get("rng_seed", 0)),
            tx_gain_db=float(d.get("tx_gain_db", 0.0)),
        )


def random_pim_kernel(seed, L1=3, L2=4, decay=0.5):
    """Diagonal kernel with random phases and magnitude ``decay**|l|``."""
    phases = SplitMix64(seed).phases(L1 + L2 + 1)
    lags = np.arange(-L1, L2 + 1)
    return PimKernel.diagonal(decay ** np.abs(lags) * phases, L1)


def random_tx_chain(seed, M1=1, M2=1, decay=0.5):
    """Unit centre tap; side taps with random phase and magnitude ``decay**|m|``."""
    m = np.arange(-M1, M2 + 1)
    taps = decay ** np.abs(m) * SplitMix64(seed).phases(m.size)
    taps[M1] = 1.0
    return TxChainModel(tuple(taps), M1, M2)


def apply_tx_chain(seq, chain):
    if len(seq) == 0:
        raise SignalError("empty input")
    full = np.convolve(seq.samples, np.asarray(chain.taps))
    return seq.replace(full[chain.M1:chain.M1 + len(seq)])


def generate_pim(s1, s2, pim):
    """``sum_t gamma_t s1[n-d_a] s1[n-d_b] conj(s2[n-d_c])`` over the kernel terms."""
    check_aligned(s1, s2)
    a = build_data_matrix(s1, s2, pim.terms)
    return s1.replace(a.values @ pim.values)


def _delayed(x, d):
    """``x[n - d]`` with zero fill."""
    out = np.zeros_like(x)
    n = x.shape[0]
    if abs(d) >= n:
        return out
    if d >= 0:
        out[d:] = x[:n - d]
    else:
        out[:n + d] = x[-d:]
    return out


def pim_memoryless(s1, s2, gammas, L1):
    """Direct form of the memoryless-TX PIM model: ``sum_l g_l s1[n-l]^2 conj(s2[n-l])``."""
    check_aligned(s1, s2)
    x1, x2 = s1.samples, s2.samples
    y = np.zeros(len(s1), dtype=np.complex128)
    for i, g in enumerate(gammas):
        l = i - L1
        y += g * _delayed(x1, l) ** 2 * np.conj(_delayed(x2, l))
    return s1.replace(y)


def pim_tx_memory(s1, s2, coefficients, M1, M2):
    """Direct form of the TX-memory PIM model.

    ``coefficients`` maps ``(l, k1, k2)`` to a complex weight, where ``k1`` /
    ``k2`` hold the exponents of ``s1`` / ``conj(s2)`` at TX tap positions
    ``i = 0..M1+M2`` (sample ``n - l + M1 - i``); each ``k1`` sums to 2 and
    each ``k2`` to 1.
    """
    check_aligned(s1, s2)
    x1, x2c = s1.samples, np.conj(s2.samples)
    taps = M1 + M2 + 1
    y = np.zeros(len(s1), dtype=np.complex128)
    for (l, k1, k2), g in coefficients.items():
        if len(k1) != taps or len(k2) != taps or sum(k1) != 2 or sum(k2) != 1:
            raise FrontEndError(f"bad exponent vectors {k1}, {k2}")
        term = np.full(len(s1), complex(g))
        for i in range(taps):
            d = l - M1 + i
            if k1[i]:
                term = term * _delayed(x1, d) ** k1[i]
            if k2[i]:
                term = term * _delayed(x2c, d) ** k2[i]
        y += term
    return s1.replace(y)


def _tx_scaled(seq, chain, gain_db):
    out = apply_tx_chain(seq, chain)
    if gain_db:
        out = out.replace(out.samples * 10.0 ** (gain_db / 20.0))
    return out


def simulate_components(model, s1, s2, diversity=False):
    """Return ``(pim, noise)`` as seen by the main or diversity receiver."""
    check_aligned(s1, s2)
    # Chain outputs just outside [0, N) are nonzero when the chains have
    # memory; evaluate on a zero-extended copy so that only the raw carriers
    # are zero padded, as in the canceller's data matrix.
    pad = max(model.tx1.M1 + model.tx1.M2, model.tx2.M1 + model.tx2.M2)
    if pad:
        t = model.pim.terms
        pad += max(0, -min(min(x) for x in t)) + max(0, max(max(x) for x in t))
        z = np.zeros(pad, dtype=np.complex128)
        s1e = s1.replace(np.concatenate([z, s1.samples, z]))
        s2e = s2.replace(np.concatenate([z, s2.samples, z]))
    else:
        s1e, s2e = s1, s2
    x1 = _tx_scaled(s1e, model.tx1, model.tx_gain_db)
    x2 = _tx_scaled(s2e, model.tx2, model.tx_gain_db)
    pim = generate_pim(x1, x2, model.pim)
    if pad:
        pim = s1.replace(pim.samples[pad:pad + len(s1)])
    if diversity:
        pim = pim.replace(pim.samples * 10.0 ** (-model.ota_isolation_db / 20.0))
    if model.noise_enabled:
        label = NOISE_LABEL_DIVERSITY if diversity else NOISE_LABEL_MAIN
        rng = SplitMix64(derive_seed(model.rng_seed, label))
        noise = rng.complex_normal(len(s1), 10.0 ** (model.noise_floor_dbfs / 10.0))
    else:
        noise = np.zeros(len(s1), dtype=np.complex128)
    return pim, s1.replace(noise)


def simulate_rx(model, s1, s2, diversity=False):
    pim, noise = simulate_components(model, s1, s2, diversity)
    if not model.noise_enabled:
        return pim
    return pim + noise


__all__ = [
    "FrontEndError", "TxChainModel", "PimKernel", "FrontEndModel",
    "apply_tx_chain", "generate_pim", "simulate_rx", "simulate_components",
    "pim_memoryless", "pim_tx_memory", "random_pim_kernel", "random_tx_chain",
    "IqSequence",
]
