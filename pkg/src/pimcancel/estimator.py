"""Coefficient estimation: block least squares plus RLS/LMS adaptation.

Block LS is solved through a QR factorisation of the data matrix (stacked
with ``sqrt(ridge) * I`` when a ridge is requested); the normal equations
are never formed. Conditioning is read off the triangular factor.
"""
import enum
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import kernels
from .basis import BasisTerm, DataMatrix
from .kernels import DivergenceError
from .signal import IqSequence

# relative singular-value threshold below which A is treated as rank deficient
RANK_RTOL = 1e-13


class EstimatorError(ValueError):
    pass


class RankDeficientError(EstimatorError):
    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class Method(str, enum.Enum):
    BLOCK_LS = "block_ls"
    RLS = "rls"
    LMS = "lms"


@dataclass(frozen=True)
class EstimatorConfig:
    method: Method = Method.BLOCK_LS
    ridge_lambda: float = 0.0
    forgetting_factor: float = 0.999
    # None -> 0.1 / mean row energy of the data matrix
    step_size: float = None
    rls_delta: float = 1e-6
    divergence_bound: float = 1e6

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.ridge_lambda >= 0:
            raise EstimatorError("ridge_lambda must be >= 0")
        if not 0 < self.forgetting_factor <= 1:
            raise EstimatorError("forgetting_factor must be in (0, 1]")
        if self.step_size is not None and not self.step_size >= 0:
            raise EstimatorError("step_size must be non-negative")
        if not self.rls_delta > 0:
            raise EstimatorError("rls_delta must be positive")


@dataclass(frozen=True)
class CoefficientVector:
    values: np.ndarray
    terms: tuple

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, copy=True).reshape(-1)
        terms = tuple(t if isinstance(t, BasisTerm) else BasisTerm(*t) for t in self.terms)
        if v.shape[0] != len(terms):
            raise EstimatorError(f"{v.shape[0]} coefficients for {len(terms)} terms")
        if not np.all(np.isfinite(v)):
            raise EstimatorError("coefficients must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "terms", terms)

    def __len__(self):
        return self.values.shape[0]

    def to_json(self):
        rows = [{"d_a": t.d_a, "d_b": t.d_b, "d_c": t.d_c, "re": float(v.real), "im": float(v.imag)}
                for t, v in zip(self.terms, self.values)]
        return json.dumps({"terms": rows}, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        rows = json.loads(text)["terms"]
        return cls([complex(r["re"], r["im"]) for r in rows],
                   [BasisTerm(r["d_a"], r["d_b"], r["d_c"]) for r in rows])


@dataclass(frozen=True)
class FitDiagnostics:
    condition_number: float
    rank: int
    num_rows: int
    num_cols: int
    residual_power: float
    signal_power: float
    ridge_lambda: float = 0.0
    singular_values: tuple = field(default=(), repr=False)

    @property
    def residual_power_db(self):
        with np.errstate(divide="ignore"):
            return float(10 * np.log10(self.residual_power))

    def to_dict(self):
        return {
            "condition_number": self.condition_number,
            "rank": self.rank,
            "num_rows": self.num_rows,
            "num_cols": self.num_cols,
            "residual_power": self.residual_power,
            "residual_power_db": self.residual_power_db,
            "signal_power": self.signal_power,
            "ridge_lambda": self.ridge_lambda,
        }


def _matrix_and_target(a, y):
    values = a.values if isinstance(a, DataMatrix) else np.asarray(a, dtype=np.complex128)
    target = y.samples if isinstance(y, IqSequence) else np.asarray(y, dtype=np.complex128).reshape(-1)
    if values.ndim != 2 or values.shape[0] != target.shape[0]:
        raise EstimatorError(f"dimension mismatch: A is {values.shape}, y has {target.shape[0]} samples")
    return values, target


def _terms_of(a, k):
    if isinstance(a, DataMatrix):
        return a.column_terms
    return tuple(BasisTerm(0, 0, j) for j in range(k))


def fit_block_ls(a, y, ridge_lambda=0.0):
    """Minimise ``||y - A theta||^2 + ridge * ||theta||^2``.

    Returns ``(CoefficientVector, FitDiagnostics)``. With ``ridge_lambda=0`` a
    numerically rank-deficient ``A`` raises :class:`RankDeficientError`
    rather than being regularised behind the caller's back.
    """
    values, target = _matrix_and_target(a, y)
    n, k = values.shape
    if ridge_lambda < 0:
        raise EstimatorError("ridge_lambda must be >= 0")
    if n < k and ridge_lambda == 0:
        raise EstimatorError(f"need rows >= cols, got {n} x {k}")

    if ridge_lambda > 0:
        stacked = np.vstack([values, np.sqrt(ridge_lambda) * np.eye(k)])
        rhs = np.concatenate([target, np.zeros(k, dtype=np.complex128)])
    else:
        stacked, rhs = values, target
    q, r = np.linalg.qr(stacked, mode="reduced")
    sv = np.linalg.svd(r, compute_uv=False)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > RANK_RTOL * smax)) if smax > 0 else 0
    cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else float("inf")

    def diag(residual_power):
        return FitDiagnostics(cond, rank, n, k, residual_power, float(np.mean(np.abs(target) ** 2)),
                              float(ridge_lambda), tuple(float(s) for s in sv))

    if rank < k:
        raise RankDeficientError(
            f"data matrix is rank deficient (rank {rank} < {k}, cond {cond:.3g}); pass ridge_lambda > 0",
            diag(float("nan")),
        )
    theta = solve_triangular(r, q.conj().T @ rhs)
    resid = target - values @ theta
    return CoefficientVector(theta, _terms_of(a, k)), diag(float(np.mean(np.abs(resid) ** 2)))


def default_step_size(values):
    energy = float(np.mean(np.sum(np.abs(values) ** 2, axis=1)))
    if energy == 0:
        raise EstimatorError("cannot derive an LMS step size from an all-zero data matrix")
    return 0.1 / energy


def fit_adaptive(a, y, config, theta0=None, record=True):
    """Sample-by-sample RLS or LMS over the rows of ``a``.

    Returns the coefficient trajectory with one row per input sample (only
    the final row when ``record=False``). Raises
    :class:`~pimcancel.kernels.DivergenceError` once the coefficient norm
    exceeds ``config.divergence_bound``.
    """
    values, target = _matrix_and_target(a, y)
    k = values.shape[1]
    theta0 = np.zeros(k, dtype=np.complex128) if theta0 is None else np.asarray(theta0, dtype=np.complex128)
    if theta0.shape != (k,):
        raise EstimatorError(f"theta0 must have {k} entries")
    values = np.ascontiguousarray(values)
    target = np.ascontiguousarray(target)
    if config.method is Method.RLS:
        return kernels.rls(values, target, float(config.forgetting_factor), float(config.rls_delta),
                           theta0, float(config.divergence_bound), bool(record))
    if config.method is Method.LMS:
        mu = default_step_size(values) if config.step_size is None else float(config.step_size)
        return kernels.lms(values, target, mu, theta0, float(config.divergence_bound), bool(record))
    raise EstimatorError(f"fit_adaptive needs method rls or lms, got {config.method.value}")


def fit(a, y, config):
    """Estimate with whichever method ``config`` names; returns ``(theta, diagnostics)``."""
    if config.method is Method.BLOCK_LS:
        return fit_block_ls(a, y, config.ridge_lambda)
    values, target = _matrix_and_target(a, y)
    traj = fit_adaptive(a, y, config, record=False)
    theta = CoefficientVector(traj[-1], _terms_of(a, values.shape[1]))
    resid = target - values @ theta.values
    sv = np.linalg.svd(values, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    rank = int(np.sum(sv > RANK_RTOL * sv[0]))
    return theta, FitDiagnostics(cond, rank, *values.shape, float(np.mean(np.abs(resid) ** 2)),
                                 float(np.mean(np.abs(target) ** 2)), 0.0, tuple(float(s) for s in sv))


__all__ = [
    "EstimatorError", "RankDeficientError", "DivergenceError", "Method", "EstimatorConfig",
    "CoefficientVector", "FitDiagnostics", "fit_block_ls", "fit_adaptive", "fit", "default_step_size",
]
