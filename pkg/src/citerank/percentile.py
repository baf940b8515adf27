"""Tie-corrected top-percentile indicators.

The global list is cut at a citation value c* so that the papers above c*
plus a fractional share of the papers exactly at c* carry a combined
weight of exactly x/100 * G.  A group's P_top x% is then the sum of its
papers' weights: 1 above the boundary, ``tie_fraction`` at it, 0 below.
This fractional scheme is what makes group counts add up exactly across a
partition and the global ratios come out at 0.1 by construction.

A ``strict`` counting mode (every paper at c* counted in full, i.e.
min-rank tie handling) is kept for sensitivity checks; it does not
conserve mass and is never the default.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .corpus import GLOBAL, RankedCorpus
from .errors import DomainError

#: Percentile levels used throughout the indicator set.
INDICATOR_LEVELS = (50, 10, 5, 1)

#: Flag strings attached to a PercentileSet when a ratio is not calculable.
FLAG_R1 = "R1:not-calculable"
FLAG_R2 = "R2:not-calculable"
FLAG_R3 = "R3:not-calculable"

#: R3 is reported not-calculable when P_top1% falls below this count.
MIN_CALCULABLE_TOP1 = 1.0


@dataclass(frozen=True)
class PercentileThreshold:
    """Citation boundary of the global top x%.

    ``full_weight_above`` papers lie strictly above ``c_star``; each of the
    ``n_at_threshold`` papers at ``c_star`` carries ``tie_fraction`` weight,
    so the weighted top-x% mass is exactly x/100 of the pool size.
    """

    level_x: float
    c_star: int
    full_weight_above: int
    tie_fraction: float
    n_at_threshold: int


@dataclass(frozen=True)
class PercentileSet:
    """P and fractional P_top x% for one group, with the diagnostic ratios.

    R1 = P_top10%/P, R2 = P_top5%/P_top50%, R3 = P_top1%/P_top10%.
    A ratio is None when its denominator is zero or, for R3, when
    P_top1% < 1; the reason is recorded in ``flags``.
    """

    group: str
    P: int
    p_top: Mapping[int, float]
    R1: float | None
    R2: float | None
    R3: float | None
    flags: tuple[str, ...] = ()


def percentile_threshold(corpus: RankedCorpus, x: float) -> PercentileThreshold:
    """Find the boundary citation count and tie weight for the top x%.

    When the corpus carries a frozen ``threshold_pool`` the boundary is
    computed from that pool instead of the corpus's own papers.
    """
    if not 0 < x < 100:
        raise DomainError(f"percentile level must be in (0, 100), got {x}")
    pool = corpus.threshold_pool if corpus.threshold_pool is not None else corpus.citations
    g = pool.size
    target = x / 100.0 * g
    # pool is sorted descending; walk distinct values until the cumulative
    # paper count first reaches the target mass
    values, counts = np.unique(pool, return_counts=True)
    values, counts = values[::-1], counts[::-1]
    cum = np.cumsum(counts)
    k = int(np.searchsorted(cum, target, side="left"))
    above = int(cum[k - 1]) if k > 0 else 0
    n_at = int(counts[k])
    tie_fraction = (target - above) / n_at
    return PercentileThreshold(x, int(values[k]), above, tie_fraction, n_at)


def top_percentile_count(
    corpus: RankedCorpus,
    group: str,
    x: float,
    threshold: PercentileThreshold | None = None,
    mode: str = "fractional",
) -> float:
    """Fractional number of the group's papers inside the global top x%.

    ``threshold`` can be supplied to evaluate a group against boundaries
    computed elsewhere (e.g. pre-injection).  ``mode='strict'`` counts
    every paper at the boundary in full instead of fractionally.
    """
    t = threshold if threshold is not None else percentile_threshold(corpus, x)
    c = corpus.group_citations(group)
    if mode == "fractional":
        return float((c > t.c_star).sum() + t.tie_fraction * (c == t.c_star).sum())
    if mode == "strict":
        return float((c >= t.c_star).sum())
    raise ValueError(f"unknown counting mode {mode!r}")


def indicator_set(
    corpus: RankedCorpus,
    group: str,
    thresholds: Mapping[int, PercentileThreshold] | None = None,
) -> PercentileSet:
    """Compute P, P_top{50,10,5,1}% and the ratios R1, R2, R3 for a group."""
    positions = corpus.group_positions(group)
    p = positions.size
    if p < 1:
        raise DomainError(f"group {group!r} has no papers")
    p_top = {
        x: top_percentile_count(
            corpus, group, x, threshold=thresholds.get(x) if thresholds else None
        )
        for x in INDICATOR_LEVELS
    }
    flags: list[str] = []
    r1 = p_top[10] / p
    r2 = None
    if p_top[50] > 0:
        r2 = p_top[5] / p_top[50]
    else:
        flags.append(FLAG_R2)
    r3 = None
    if p_top[10] <= 0 or p_top[1] < MIN_CALCULABLE_TOP1:
        flags.append(FLAG_R3)
    else:
        r3 = p_top[1] / p_top[10]
    return PercentileSet(group, int(p), p_top, r1, r2, r3, tuple(flags))


def global_thresholds(
    corpus: RankedCorpus, levels=INDICATOR_LEVELS
) -> dict[int, PercentileThreshold]:
    """Precompute the thresholds for a set of levels (reused across groups)."""
    return {x: percentile_threshold(corpus, x) for x in levels}
