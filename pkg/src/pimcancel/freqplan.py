"""IM3 product arithmetic and receiver band overlap checks.

Intervals are closed-open ``[lo, hi)``: a product that only touches a band
edge does not overlap it.
"""
import csv
import enum
import io
from dataclasses import dataclass
from importlib import resources


class PlanError(ValueError):
    pass


class ImKind(str, enum.Enum):
    IM3_UPPER = "IM3_upper"  # 2 f1 - f2
    IM3_LOWER = "IM3_lower"  # 2 f2 - f1


class Overlap(str, enum.Enum):
    NONE = "none"
    PARTIAL = "partial"
    FULL = "full"


@dataclass(frozen=True)
class BandSpec:
    name: str
    uplink_mhz: tuple = None
    downlink_mhz: tuple = None

    def __post_init__(self):
        for label in ("uplink_mhz", "downlink_mhz"):
            rng = getattr(self, label)
            if rng is None:
                continue
            lo, hi = float(rng[0]), float(rng[1])
            if not lo < hi:
                raise PlanError(f"{self.name} {label}: need lo < hi, got {rng}")
            object.__setattr__(self, label, (lo, hi))

    @property
    def has_ranges(self):
        return self.uplink_mhz is not None and self.downlink_mhz is not None


@dataclass(frozen=True)
class ImProduct:
    kind: ImKind
    center_mhz: float
    bandwidth_mhz: float

    @property
    def interval(self):
        half = self.bandwidth_mhz / 2
        return self.center_mhz - half, self.center_mhz + half


@dataclass(frozen=True)
class OverlapResult:
    overlap: Overlap
    range_mhz: tuple = None

    def __bool__(self):
        return self.overlap is not Overlap.NONE


# Band pairs known to put IM products in an own receiver band.
RISKY_COMBINATIONS = (("B1", "B3"), ("B3", "B8"), ("B2", "B4"), ("B5", "B7"))


def im3_products(f1_mhz, bw1_mhz, f2_mhz, bw2_mhz):
    """Upper (2f1 - f2) and lower (2f2 - f1) IM3 products of two carriers."""
    if not (f1_mhz > 0 and f2_mhz > 0):
        raise PlanError("carrier frequencies must be positive")
    if bw1_mhz < 0 or bw2_mhz < 0:
        raise PlanError("bandwidths must be non-negative")
    return [
        ImProduct(ImKind.IM3_UPPER, 2 * f1_mhz - f2_mhz, 2 * bw1_mhz + bw2_mhz),
        ImProduct(ImKind.IM3_LOWER, 2 * f2_mhz - f1_mhz, 2 * bw2_mhz + bw1_mhz),
    ]


def interval_overlap(a, b):
    """Intersection of closed-open intervals ``a`` and ``b`` as seen from ``a``.

    A zero-width ``a`` is treated as the point ``a[0]``, which overlaps
    ``[lo, hi)`` when ``lo <= a[0] < hi``.
    """
    a_lo, a_hi = a
    b_lo, b_hi = b
    if a_lo == a_hi:
        if b_lo <= a_lo < b_hi:
            return OverlapResult(Overlap.FULL, (a_lo, a_hi))
        return OverlapResult(Overlap.NONE)
    lo, hi = max(a_lo, b_lo), min(a_hi, b_hi)
    if lo >= hi:
        return OverlapResult(Overlap.NONE)
    kind = Overlap.FULL if (lo, hi) == (a_lo, a_hi) else Overlap.PARTIAL
    return OverlapResult(kind, (lo, hi))


def hits_band(product, band):
    """Overlap of ``product`` with the downlink (receive) range of ``band``."""
    if band.downlink_mhz is None:
        raise PlanError(f"band {band.name} has no downlink range in the band table")
    return interval_overlap(product.interval, band.downlink_mhz)


def _num(s):
    s = s.strip()
    return float(s) if s else None


def parse_band_table(text):
    """``name,ul_lo,ul_hi,dl_lo,dl_hi`` records in MHz; ``#`` starts a comment.

    Records with empty range fields are kept as bands without data.
    """
    bands = {}
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    for rec in csv.reader(io.StringIO("\n".join(lines))):
        if len(rec) != 5:
            raise PlanError(f"band record needs 5 fields, got {rec}")
        name = rec[0].strip()
        ul_lo, ul_hi, dl_lo, dl_hi = (_num(x) for x in rec[1:])
        ul = None if ul_lo is None or ul_hi is None else (ul_lo, ul_hi)
        dl = None if dl_lo is None or dl_hi is None else (dl_lo, dl_hi)
        bands[name] = BandSpec(name, ul, dl)
    return bands


def load_band_table(path=None):
    if path is None:
        text = resources.files("pimcancel").joinpath("data/bands.csv").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return parse_band_table(text)


def plan(f1_mhz, bw1_mhz, f2_mhz, bw2_mhz, band_names, table):
    """Overlap summary of both IM3 products against each named band."""
    unknown = [b for b in band_names if b not in table]
    if unknown:
        raise PlanError(f"unknown band(s) {', '.join(unknown)}; available: {', '.join(sorted(table))}")
    products = im3_products(f1_mhz, bw1_mhz, f2_mhz, bw2_mhz)
    hits = []
    for p in products:
        for name in band_names:
            res = hits_band(p, table[name])
            hits.append({
                "product": p.kind.value,
                "center_mhz": p.center_mhz,
                "bandwidth_mhz": p.bandwidth_mhz,
                "band": name,
                "overlap": res.overlap.value,
                "overlap_mhz": list(res.range_mhz) if res.range_mhz else None,
            })
    verdicts = [
        f"{'upper' if h['product'] == ImKind.IM3_UPPER.value else 'lower'} IM3 hits {h['band']} downlink"
        for h in hits if h["overlap"] != Overlap.NONE.value
    ]
    return {"results": hits, "verdict": verdicts or ["no IM3 product hits the selected bands"]}


__all__ = [
    "PlanError", "ImKind", "Overlap", "BandSpec", "ImProduct", "OverlapResult",
    "RISKY_COMBINATIONS", "im3_products", "hits_band", "interval_overlap",
    "parse_band_table", "load_band_table", "plan",
]
