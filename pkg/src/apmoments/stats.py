"""Distribution diagnostics: normal CDF, KS distance, normality reports.

The headline statistic everywhere is the Kolmogorov-Smirnov sup-norm gap
between an empirical CDF and the standard normal, measured after
centering and scaling by either (mean, deviation) or (mean, sqrt(mean)).
Raw distances only; no p-values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .arith_fn import Extension, PrimeFunction, collect_values
from .config import CDF_GRID_HI, CDF_GRID_LO, CDF_GRID_POINTS, MEMBER_BLOCK
from .moments import read_spill
from .sieve import Progression

NORMALIZATIONS = ("sigma", "sqrt_mean")


def phi(x: float) -> float:
    """Standard normal CDF via the complementary error integral."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def phi_inv(q: float, tol: float = 1e-12) -> float:
    """Inverse normal CDF by bisection (phi is strictly increasing)."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile must be in (0, 1), got {q}")
    lo, hi = -13.0, 13.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if phi(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ks_distance(values: np.ndarray, center: float, scale: float) -> float:
    """KS statistic of (values - center)/scale against the standard normal."""
    if scale <= 0.0:
        raise ValueError(f"scale must be positive, got {scale}")
    v = np.sort((np.asarray(values, dtype=np.float64) - center) / scale)
    if v.size == 0:
        raise ValueError("values must be non-empty")
    m = v.size
    cdf = 0.5 * np.vectorize(math.erfc)(-v / math.sqrt(2.0))
    grid = np.arange(1, m + 1) / m
    d_plus = float(np.max(grid - cdf))
    d_minus = float(np.max(cdf - (grid - 1.0 / m)))
    return max(d_plus, d_minus)


@dataclass(frozen=True)
class NormalityReport:
    n: int
    count: int
    normalization: str
    center: float
    scale: float
    ks: float
    grid: tuple[tuple[float, float, float], ...]  # (x, empirical, normal cdf)


def _cdf_grid(normalized: np.ndarray) -> tuple[tuple[float, float, float], ...]:
    qs = np.linspace(CDF_GRID_LO, CDF_GRID_HI, CDF_GRID_POINTS)
    xs = [phi_inv(float(q)) for q in qs]
    v = np.sort(normalized)
    rows = []
    for x in xs:
        emp = float(np.searchsorted(v, x, side="right")) / v.size
        rows.append((x, emp, phi(x)))
    return tuple(rows)


def erdos_kac_report(
    fn: PrimeFunction,
    ext: Extension,
    progression: Progression,
    n: int,
    normalization: str = "sqrt_mean",
    spill: str | Path | None = None,
    block_members: int = MEMBER_BLOCK,
) -> NormalityReport:
    """KS distance of normalized f values against the standard normal.

    normalization="sigma" centers at the mean and scales by the
    deviation; "sqrt_mean" scales by sqrt(mean) and is only offered for
    nonnegative functions bounded by 1 at primes, the regime where that
    scaling has a normal limit.  Values come from an existing spill file
    when given, otherwise from a fresh streaming evaluation.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    if normalization == "sqrt_mean" and not (fn.nonnegative and fn.bounded_by_one):
        raise ValueError(
            "sqrt_mean normalization requires 0 <= f(p) <= 1; use sigma instead"
        )
    values = read_spill(spill) if spill is not None else collect_values(
        fn, ext, progression, n, block_members
    )
    count = progression.count(n)
    if values.size != count:
        raise ValueError(f"expected {count} values, got {values.size}")
    if count < 2:
        raise ValueError("degenerate progression: need at least 2 members")
    center = float(values.mean())
    if normalization == "sigma":
        scale = float(values.std())
        if scale <= 0.0:
            raise ValueError("degenerate normalization: deviation is 0")
    else:
        if center <= 0.0:
            raise ValueError("degenerate normalization: mean is not positive")
        scale = math.sqrt(center)
    ks = ks_distance(values, center, scale)
    grid = _cdf_grid((values - center) / scale)
    return NormalityReport(n, count, normalization, center, scale, ks, grid)
