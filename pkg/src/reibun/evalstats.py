"""Inter-rater reliability statistics.

ICC(3,1): two-way mixed-effects, single-rater, consistency definition, with
95% confidence intervals from the F distribution.  The ANOVA decomposition
runs in exact rational arithmetic so structurally perfect agreement (zero
residual mean square) is detected exactly, not within an epsilon.  F-tail
probabilities and quantiles come from an in-house regularized incomplete
beta evaluation, so no statistics dependency is required.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .corpus import Level

__all__ = [
    "RatingMatrix",
    "IccResult",
    "PairCell",
    "DegenerateRatings",
    "labels_to_numeric",
    "icc31",
    "pairwise_agreement",
    "rank_first_counts",
    "filter_raters",
    "f_cdf",
    "f_sf",
    "f_ppf",
    "betainc_reg",
    "LEVEL_SCALE_TAGS",
]

LEVEL_SCALE_TAGS = ("N5", "N4", "N3", "N2", "N1")

_BETA_TOL = 1e-10
_BETA_MAX_ITER = 400


class DegenerateRatings(ValueError):
    """The rating matrix has no variance to apportion; ICC is undefined."""


@dataclass(frozen=True, slots=True)
class RatingMatrix:
    """Targets x raters rating grid; NaN marks a missing rating."""

    values: np.ndarray
    target_ids: tuple[str, ...] = ()
    rater_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("rating matrix must be 2-dimensional")
        object.__setattr__(self, "values", v)
        if self.target_ids and len(self.target_ids) != v.shape[0]:
            raise ValueError("target_ids length does not match row count")
        if self.rater_ids and len(self.rater_ids) != v.shape[1]:
            raise ValueError("rater_ids length does not match column count")

    def complete_cases(self) -> np.ndarray:
        """Rows with no missing entries (listwise deletion)."""
        mask = ~np.isnan(self.values).any(axis=1)
        return self.values[mask]


@dataclass(frozen=True, slots=True)
class IccResult:
    estimate: float
    ci_low: float
    ci_high: float
    p_value: float
    df: tuple[int, int]
    n_targets: int
    k_raters: int

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "p_value": self.p_value,
            "df": list(self.df),
            "n_targets": self.n_targets,
            "k_raters": self.k_raters,
        }


def labels_to_numeric(labels: Sequence[str], scale: Sequence[str]) -> list[float]:
    """Ordinal tags to 1-based equidistant numbers by scale position."""
    pos = {tag: i + 1 for i, tag in enumerate(scale)}
    out = []
    for lab in labels:
        if lab not in pos:
            raise ValueError(f"label {lab!r} not on scale {list(scale)}")
        out.append(float(pos[lab]))
    return out


def filter_raters(m: RatingMatrix, threshold: float = 0.5) -> RatingMatrix:
    """Drop rater columns that completed less than the given fraction of targets."""
    v = m.values
    keep = []
    for j in range(v.shape[1]):
        done = float(np.count_nonzero(~np.isnan(v[:, j])))
        if done / v.shape[0] >= threshold:
            keep.append(j)
    rater_ids = tuple(m.rater_ids[j] for j in keep) if m.rater_ids else ()
    return RatingMatrix(values=v[:, keep], target_ids=m.target_ids, rater_ids=rater_ids)


def _anova_fractions(data: np.ndarray) -> tuple[Fraction, Fraction, int, int]:
    """Between-target and residual mean squares, computed exactly.

    Floats convert losslessly to rationals, so a matrix whose residuals
    vanish algebraically yields an EMS of exactly zero.
    """
    n, k = data.shape
    cells = [[Fraction(float(x)) for x in row] for row in data]
    grand = sum(sum(row, Fraction(0)) for row in cells) / (n * k)
    row_means = [sum(row, Fraction(0)) / k for row in cells]
    col_means = [sum(cells[i][j] for i in range(n)) / n for j in range(k)]
    ssb = k * sum((rm - grand) ** 2 for rm in row_means)
    sse = Fraction(0)
    for i in range(n):
        for j in range(k):
            resid = cells[i][j] - row_means[i] - col_means[j] + grand
            sse += resid * resid
    bms = ssb / (n - 1)
    ems = sse / ((n - 1) * (k - 1))
    return bms, ems, n, k


def icc31(m: RatingMatrix) -> IccResult:
    """ICC(3,1) with Shrout-Fleiss 95% confidence interval and F-test p-value."""
    data = m.complete_cases()
    n, k = data.shape
    if n < 2 or k < 2:
        raise ValueError(f"need at least 2 targets and 2 raters, got {n}x{k}")
    bms, ems, n, k = _anova_fractions(data)
    df1 = n - 1
    df2 = (n - 1) * (k - 1)

    if bms == 0 and ems == 0:
        raise DegenerateRatings("constant rating matrix: no variance between targets")
    if ems == 0:
        return IccResult(
            estimate=1.0,
            ci_low=1.0,
            ci_high=1.0,
            p_value=0.0,
            df=(df1, df2),
            n_targets=n,
            k_raters=k,
        )

    estimate = float((bms - ems) / (bms + (k - 1) * ems))
    fstat = float(bms / ems)
    p_value = f_sf(fstat, df1, df2)
    fl = fstat / f_ppf(0.975, df1, df2)
    fu = fstat * f_ppf(0.975, df2, df1)
    ci_low = (fl - 1.0) / (fl + k - 1.0)
    ci_high = (fu - 1.0) / (fu + k - 1.0)
    return IccResult(
        estimate=estimate,
        ci_low=ci_low,
        ci_high=ci_high,
        p_value=p_value,
        df=(df1, df2),
        n_targets=n,
        k_raters=k,
    )


@dataclass(frozen=True, slots=True)
class PairCell:
    available: bool
    estimate: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None
    p_value: float | None = None
    significant: bool = False
    n_shared: int = 0
    reason: str = ""

    def as_dict(self) -> dict:
        return {
            "available": self.available,
            "estimate": self.estimate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "p_value": self.p_value,
            "significant": self.significant,
            "n_shared": self.n_shared,
            "reason": self.reason,
        }


def pairwise_agreement(raters: Sequence[np.ndarray]) -> list[list[PairCell]]:
    """Rater-by-rater ICC(3,1) matrix over pairwise-complete targets.

    Symmetric with a fixed perfect diagonal; a star-worthy cell carries
    ``significant`` (p < .05).  Pairs sharing fewer than two targets, or
    with no rateable variance, are marked unavailable.
    """
    vecs = [np.asarray(v, dtype=np.float64) for v in raters]
    if len({v.shape[0] for v in vecs}) > 1:
        raise ValueError("all rater vectors must cover the same target list")
    r = len(vecs)
    out: list[list[PairCell]] = [
        [PairCell(available=False) for _ in range(r)] for _ in range(r)
    ]
    for i in range(r):
        out[i][i] = PairCell(
            available=True,
            estimate=1.0,
            ci_low=1.0,
            ci_high=1.0,
            p_value=0.0,
            significant=True,
            n_shared=int(np.count_nonzero(~np.isnan(vecs[i]))),
        )
        for j in range(i + 1, r):
            shared = ~np.isnan(vecs[i]) & ~np.isnan(vecs[j])
            n_shared = int(np.count_nonzero(shared))
            if n_shared < 2:
                cell = PairCell(
                    available=False, n_shared=n_shared, reason="fewer than 2 shared targets"
                )
            else:
                sub = RatingMatrix(np.column_stack([vecs[i][shared], vecs[j][shared]]))
                try:
                    res = icc31(sub)
                except DegenerateRatings as err:
                    cell = PairCell(available=False, n_shared=n_shared, reason=str(err))
                else:
                    cell = PairCell(
                        available=True,
                        estimate=res.estimate,
                        ci_low=res.ci_low,
                        ci_high=res.ci_high,
                        p_value=res.p_value,
                        significant=res.p_value < 0.05,
                        n_shared=n_shared,
                    )
            out[i][j] = cell
            out[j][i] = cell
    return out


def rank_first_counts(
    blocks: Sequence[Mapping],
) -> dict[str, dict[str, dict[str, int]]]:
    """First-place tallies per rater and target level.

    Each block record holds ``level``, ``rater_id`` and ``ranking`` (a
    permutation of system names, best first).  Result maps rater -> level
    -> system -> count; the ``"all"`` rater aggregates everyone.
    """
    out: dict[str, dict[str, dict[str, int]]] = {}
    for rec in blocks:
        ranking = list(rec["ranking"])
        if len(set(ranking)) != len(ranking) or not ranking:
            raise ValueError(f"ranking {ranking!r} is not a permutation")
        level = rec["level"]
        level_name = level.name if isinstance(level, Level) else str(level)
        rater = str(rec["rater_id"])
        first = str(ranking[0])
        for bucket in (rater, "all"):
            out.setdefault(bucket, {}).setdefault(level_name, {})
            out[bucket][level_name][first] = out[bucket][level_name].get(first, 0) + 1
    return out


# ---------------------------------------------------------------------------
# F distribution via the regularized incomplete beta function


def _betacf(a: float, b: float, x: float) -> float:
    """Lentz continued fraction for the incomplete beta integral."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_TOL:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def f_cdf(x: float, d1: int, d2: int) -> float:
    if x <= 0.0:
        return 0.0
    t = d1 * x / (d1 * x + d2)
    return betainc_reg(d1 / 2.0, d2 / 2.0, t)


def f_sf(x: float, d1: int, d2: int) -> float:
    if x <= 0.0:
        return 1.0
    t = d2 / (d2 + d1 * x)
    return betainc_reg(d2 / 2.0, d1 / 2.0, t)


def f_ppf(p: float, d1: int, d2: int) -> float:
    """Inverse F CDF by bisection on a bracketed quantile."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    lo, hi = 0.0, 1.0
    while f_cdf(hi, d1, d2) < p:
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("quantile bracket overflow")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if f_cdf(mid, d1, d2) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
