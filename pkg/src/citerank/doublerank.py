"""Double-rank analysis against a two-anchor power-law reference.

Each group paper has two ranks: its global rank g and its rank l inside
the group (1..P).  Under the ideal model the pairs (g, l) lie on the
curve l = C * g**alpha.  The reference curve is anchored exactly at two
percentile points (e.g. (100%, P) and (10%, P_top10%)); deviations of the
most-cited papers from it are what the indicators cannot see.

Residuals are measured in log space along the global-rank axis:
r_i = ln(g_actual) - ln(g_expected(l)).  Negative means the group's top
papers sit at smaller global ranks than the reference predicts, i.e. the
percentile indicators undervalue the group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import RankedCorpus
from .errors import DegenerateAnchorError, DomainError, InsufficientDataError
from .percentile import PercentileSet

VERDICT_CONFORMING = "conforming"
VERDICT_UNDERVALUED = "undervalued"
VERDICT_OVERVALUED = "overvalued"

DEFAULT_WINDOW = 0.02
DEFAULT_TOLERANCE = 0.10

#: Anchor pairs runnable from config: P with P_top10%, or P_top10% with P_top1%.
ANCHOR_CHOICES = ("p:top10", "top10:top1")


@dataclass(frozen=True, eq=False)
class DoubleRankSeries:
    """(global rank, local rank) pairs for one group, most cited first.

    Local ranks are the plain positions 1..P.  Global ranks follow the
    corpus tie policy, so they are non-decreasing and may repeat when two
    group papers share a citation count (fractional under mean-of-ties).
    """

    group: str
    global_ranks: np.ndarray
    local_ranks: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.global_ranks.tolist(), self.local_ranks.tolist()))


@dataclass(frozen=True)
class PowerLawReference:
    """l(g) = coeff * g**alpha through two percentile anchors.

    Anchors are (fraction of G, paper count) pairs; the curve passes
    through both exactly.
    """

    alpha: float
    coeff: float
    anchor_hi: tuple[float, float]
    anchor_lo: tuple[float, float]
    G: int


@dataclass(frozen=True)
class RatioGaps:
    """Signed relative departures from ratio equality, (R1-Rk)/R1."""

    gap_12: float | None
    gap_13: float | None


@dataclass(frozen=True)
class DeviationReport:
    group: str
    window: float
    n_points: int
    mean_log_residual: float
    max_abs_log_residual: float
    verdict: str


@dataclass(frozen=True)
class BreakthroughEstimate:
    """Reference-curve extrapolation to a breakthrough percentile band."""

    x_b: float
    expected_count: float
    extrapolated: bool = True


def double_rank_series(corpus: RankedCorpus, group: str) -> DoubleRankSeries:
    """Pair each group paper's global rank with its local rank 1..P."""
    positions = corpus.group_positions(group)
    if positions.size < 2:
        raise InsufficientDataError(
            f"group {group!r} has {positions.size} paper(s); need at least 2"
        )
    g = corpus.ranks[positions].copy()
    g.setflags(write=False)
    l = np.arange(1, positions.size + 1, dtype=float)
    l.setflags(write=False)
    return DoubleRankSeries(group, g, l)


def power_law_reference(
    anchor_hi: tuple[float, float], anchor_lo: tuple[float, float], G: int
) -> PowerLawReference:
    """Fit l = C*g**alpha exactly through two (fraction, count) anchors."""
    x_hi, count_hi = anchor_hi
    x_lo, count_lo = anchor_lo
    if not 0 < x_lo <= x_hi <= 1:
        raise DomainError(f"anchor fractions must satisfy 0 < x_lo <= x_hi <= 1")
    if x_lo == x_hi:
        raise DegenerateAnchorError("anchor fractions coincide")
    if count_hi <= 0 or count_lo <= 0:
        raise DomainError("anchor counts must be positive")
    if count_lo >= count_hi:
        raise DomainError(
            f"lower anchor count must be below the upper ({count_lo} >= {count_hi})"
        )
    alpha = math.log(count_hi / count_lo) / math.log(x_hi / x_lo)
    coeff = count_hi / (x_hi * G) ** alpha
    return PowerLawReference(alpha, coeff, (x_hi, count_hi), (x_lo, count_lo), G)


def reference_for_group(
    corpus: RankedCorpus, ps: PercentileSet, anchors: str = "p:top10"
) -> PowerLawReference:
    """Build the reference from a group's own indicators.

    ``p:top10`` anchors at (100%, P) and (10%, P_top10%); ``top10:top1``
    at (10%, P_top10%) and (1%, P_top1%).
    """
    if anchors == "p:top10":
        hi, lo = (1.0, float(ps.P)), (0.10, ps.p_top[10])
    elif anchors == "top10:top1":
        hi, lo = (0.10, ps.p_top[10]), (0.01, ps.p_top[1])
    else:
        raise DomainError(f"anchors must be one of {ANCHOR_CHOICES}, got {anchors!r}")
    return power_law_reference(hi, lo, corpus.global_size)


def expected_local_rank(ref: PowerLawReference, g) -> float | np.ndarray:
    """Reference local rank C*g**alpha at global rank g (scalar or array)."""
    garr = np.asarray(g, dtype=float)
    if np.any(garr < 1) or np.any(garr > ref.G):
        raise DomainError(f"global rank out of range [1, {ref.G}]")
    out = ref.coeff * garr ** ref.alpha
    return float(out) if np.isscalar(g) or garr.ndim == 0 else out


def expected_global_rank(ref: PowerLawReference, l) -> np.ndarray:
    """Inverse of the reference curve: the global rank where local rank l sits."""
    larr = np.asarray(l, dtype=float)
    return (larr / ref.coeff) ** (1.0 / ref.alpha)


def ratio_equality_gap(ps: PercentileSet) -> RatioGaps:
    """(R1-R2)/R1 and (R1-R3)/R1; zero means the ideal-model equality holds.

    Not-calculable ratios propagate as None.
    """
    if ps.R1 is None or ps.R1 == 0:
        return RatioGaps(None, None)
    gap_12 = None if ps.R2 is None else (ps.R1 - ps.R2) / ps.R1
    gap_13 = None if ps.R3 is None else (ps.R1 - ps.R3) / ps.R1
    return RatioGaps(gap_12, gap_13)


def upper_tail_deviation(
    series: DoubleRankSeries,
    ref: PowerLawReference,
    window: float = DEFAULT_WINDOW,
    tolerance: float = DEFAULT_TOLERANCE,
) -> DeviationReport:
    """Judge the extreme upper tail against the reference curve.

    Only points with global rank <= window*G enter; at least 3 are
    required.  Mean log residual below -tolerance: the group's top papers
    are better-placed than the reference (undervalued by indicators);
    above +tolerance: overvalued; otherwise conforming.
    """
    if not 0 < window <= ref.anchor_lo[0]:
        raise DomainError(
            f"window must be in (0, {ref.anchor_lo[0]}] (the fitted range), got {window}"
        )
    cutoff = window * ref.G
    mask = series.global_ranks <= cutoff
    n = int(mask.sum())
    if n < 3:
        raise InsufficientDataError(
            f"only {n} point(s) of {series.group!r} inside the top {window:.2%} window"
        )
    g = series.global_ranks[mask]
    l = series.local_ranks[mask]
    residuals = np.log(g) - np.log(expected_global_rank(ref, l))
    mean = float(residuals.mean())
    if mean < -tolerance:
        verdict = VERDICT_UNDERVALUED
    elif mean > tolerance:
        verdict = VERDICT_OVERVALUED
    else:
        verdict = VERDICT_CONFORMING
    return DeviationReport(
        series.group, window, n, mean, float(np.abs(residuals).max()), verdict
    )


def extrapolate_breakthrough(ref: PowerLawReference, x_b: float) -> BreakthroughEstimate:
    """Extend the reference curve below its fitted range.

    Returns the expected fractional paper count at the top x_b of the
    global list (x_b as a fraction, e.g. 0.0001 for the top 0.01%).
    Values below 1 are expectations, reported as-is.
    """
    if not 0 < x_b < ref.anchor_lo[0]:
        raise DomainError(
            f"x_b must be in (0, {ref.anchor_lo[0]}) below the fitted anchors, got {x_b}"
        )
    return BreakthroughEstimate(x_b, ref.coeff * (x_b * ref.G) ** ref.alpha)
