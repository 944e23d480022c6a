"""Third-order PIM basis functions and the data matrix.

A basis function is the monomial ``s1[n-d_a] * s1[n-d_b] * conj(s2[n-d_c])``.
Both canceller structures reduce to a set of such delay triples:

* memoryless TX chains: one diagonal term ``(l, l, l)`` per PIM tap
  ``l in [-L1, L2]``;
* TX chains with memory: for each PIM tap ``l`` the two ``s1`` factors and
  the single ``conj(s2)`` factor may each sit on any of the ``M1 + M2 + 1``
  TX-chain tap positions ``l - M1 .. l + M2``.

Different taps ``l`` produce overlapping monomials, so terms are reduced to a
canonical triple (``d_a <= d_b``) and deduplicated.
"""
import enum
from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels
from .signal import check_aligned


class BasisError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class BasisTerm:
    d_a: int
    d_b: int
    d_c: int

    def __post_init__(self):
        a, b = sorted((int(self.d_a), int(self.d_b)))
        object.__setattr__(self, "d_a", a)
        object.__setattr__(self, "d_b", b)
        object.__setattr__(self, "d_c", int(self.d_c))

    def __iter__(self):
        return iter((self.d_a, self.d_b, self.d_c))

    def label(self):
        def f(sym, d):
            return f"{sym}[n]" if d == 0 else f"{sym}[n{-d:+d}]"
        if self.d_a == self.d_b:
            s1 = f("s1", self.d_a) + "^2"
        else:
            s1 = f("s1", self.d_b) + " " + f("s1", self.d_a)
        return f"{s1} {f('s2*', self.d_c)}"


class ModelKind(str, enum.Enum):
    MEMORYLESS = "memoryless"
    TX_MEMORY = "txmemory"


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind = ModelKind.MEMORYLESS
    L1: int = 3
    L2: int = 4
    M1: int = 0
    M2: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        for name in ("L1", "L2", "M1", "M2"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise BasisError(f"{name} must be a non-negative integer, got {v}")
            object.__setattr__(self, name, int(v))
        if self.kind is ModelKind.MEMORYLESS and (self.M1 or self.M2):
            raise BasisError("memoryless TX model requires M1 = M2 = 0")

    @property
    def window(self):
        return -(self.L1 + self.M1), self.L2 + self.M2


def _compositions(total, parts):
    """All non-negative integer vectors of length ``parts`` summing to ``total``,
    in the nesting order of the k-index sums (first index outermost)."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def raw_index_set(spec):
    """Every ``(l, k1, k2)`` index tuple of the multi-index PIM sum.

    ``k1[i]`` / ``k2[i]`` are the exponents of ``s1`` / ``conj(s2)`` at TX tap
    position ``i``, which carries delay ``l - M1 + i``. The memoryless model
    is the ``M1 = M2 = 0`` case.
    """
    taps = spec.M1 + spec.M2 + 1
    out = []
    for k1 in _compositions(2, taps):
        for k2 in _compositions(1, taps):
            for l in range(-spec.L1, spec.L2 + 1):
                out.append((l, k1, k2))
    return out


def raw_count(spec):
    m = spec.M1 + spec.M2
    return (spec.L1 + spec.L2 + 1) * comb(m + 2, 2) * (m + 1)


def term_from_indices(l, k1, k2, M1):
    s1 = [l - M1 + i for i, k in enumerate(k1) for _ in range(k)]
    (c,) = [l - M1 + i for i, k in enumerate(k2) if k]
    return BasisTerm(s1[0], s1[1], c)


def enumerate_basis(spec):
    """Deduplicated basis terms for ``spec``, sorted by ``(d_a, d_b, d_c)``."""
    if spec.kind is ModelKind.MEMORYLESS:
        return [BasisTerm(l, l, l) for l in range(-spec.L1, spec.L2 + 1)]
    return sorted({term_from_indices(l, k1, k2, spec.M1) for l, k1, k2 in raw_index_set(spec)})


def terms_to_text(terms):
    return "".join(f"{t.d_a} {t.d_b} {t.d_c}\n" for t in terms)


def terms_from_text(text):
    terms = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 3:
            raise BasisError(f"expected three delays per line, got {line!r}")
        terms.append(BasisTerm(*map(int, parts)))
    return terms


def delay_arrays(terms):
    da = np.array([t.d_a for t in terms], dtype=np.int64)
    db = np.array([t.d_b for t in terms], dtype=np.int64)
    dc = np.array([t.d_c for t in terms], dtype=np.int64)
    return da, db, dc


def lookahead(terms):
    """Future samples a term list reads: ``max(0, -min delay)``."""
    return max(0, -min(min(t) for t in terms)) if terms else 0


def history(terms):
    """Past samples a term list reads: ``max(0, max delay)``."""
    return max(0, max(max(t) for t in terms)) if terms else 0


@dataclass(frozen=True)
class DataMatrix:
    """Basis-function samples: row ``r`` is time ``row_start + r``."""

    values: np.ndarray
    column_terms: tuple
    row_start: int = 0

    @property
    def shape(self):
        return self.values.shape

    def columns(self, order):
        """Column-permuted copy (``order`` indexes the current columns)."""
        order = list(order)
        return DataMatrix(self.values[:, order], tuple(self.column_terms[i] for i in order), self.row_start)


def build_data_matrix(s1, s2, terms, row_range=None):
    """Data matrix over ``row_range = (n_start, n_end)`` (end exclusive).

    Reads outside ``[0, len)`` are zero, the same convention the simulator uses.
    """
    check_aligned(s1, s2)
    n = len(s1)
    n0, n1 = (0, n) if row_range is None else (int(row_range[0]), int(row_range[1]))
    if not 0 <= n0 <= n1 <= n:
        raise BasisError(f"row range {(n0, n1)} outside [0, {n}]")
    if n1 == n0:
        raise BasisError("empty row range")
    terms = tuple(terms)
    if not terms:
        raise BasisError("empty term list")
    da, db, dc = delay_arrays(terms)
    values = kernels.data_matrix(s1.samples, s2.samples, da, db, dc, n0, n1)
    return DataMatrix(values, terms, n0)


__all__ = [
    "BasisError", "BasisTerm", "ModelKind", "ModelSpec", "DataMatrix",
    "enumerate_basis", "raw_index_set", "raw_count", "term_from_indices",
    "build_data_matrix", "terms_to_text", "terms_from_text",
    "lookahead", "history", "delay_arrays",
]
