"""Institution classification from Leiden-Ranking-style indicator tables.

Input rows carry per-period P and P_top{50,10,5,1}% for an institution in
one field under one counting method.  Institutions are kept only if their
fractional P_top1% reaches 10 in every required period, their three
diagnostic ratios are averaged across periods (mean of per-period ratios,
not ratio of means), and the triple is typed:

  A - stable: spread between highest and lowest ratio within threshold;
  B - decreasing ratios (deflated lower part of the distribution);
  C - increasing ratios (inflated lower tail).

The spread denominator is configurable ({min, max, mean}); min is the
strictest reading and the default.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, InsufficientDataError, RowParseError, SchemaError

logger = logging.getLogger(__name__)

TYPE_A = "A"
TYPE_B = "B"
TYPE_C = "C"

FRACTIONAL = "fractional"
FULL = "full"

#: The four evaluation periods averaged in the university analysis.
DEFAULT_PERIODS = ("2015-2018", "2016-2019", "2017-2020", "2018-2021")

DEFAULT_MIN_TOP1 = 10.0
DEFAULT_STABILITY = 0.15
SPREAD_DENOMINATORS = ("min", "max", "mean")

REQUIRED_MAPPING_KEYS = (
    "institution",
    "country",
    "field",
    "period",
    "counting",
    "P",
    "p_top50",
    "p_top10",
    "p_top5",
    "p_top1",
)

_COUNTING_VALUES = {
    "fractional": FRACTIONAL,
    "frac": FRACTIONAL,
    "1": FRACTIONAL,
    "true": FRACTIONAL,
    "full": FULL,
    "0": FULL,
    "false": FULL,
}


@dataclass(frozen=True)
class InstitutionPeriodRow:
    institution: str
    country: str
    field: str
    period: str
    counting: str
    P: float
    p_top: Mapping[int, float]


@dataclass(frozen=True)
class InstitutionAssessment:
    institution: str
    country: str
    field: str
    R1: float
    R2: float
    R3: float
    spread: float
    type: str
    periods_used: int
    bottom50_mean: float | None = None
    bottom50_halfrange: float | None = None


@dataclass(frozen=True)
class MeanRatios:
    R1: float
    R2: float
    R3: float
    periods_used: int


def _normalize_period(value: str) -> str:
    # Leiden exports write periods with an en dash
    return value.strip().replace("–", "-").replace("—", "-")


def load_institution_table(source, mapping: Mapping[str, str]) -> list[InstitutionPeriodRow]:
    """Parse an institution indicator CSV using a column-name mapping.

    ``mapping`` must name a column for every key in REQUIRED_MAPPING_KEYS;
    unknown fields and periods pass through untouched.
    """
    missing_keys = [k for k in REQUIRED_MAPPING_KEYS if k not in mapping]
    if missing_keys:
        raise SchemaError(f"mapping lacks key(s): {', '.join(missing_keys)}")
    close = False
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        source = open(source, "r", encoding="utf-8", newline="")
        close = True
    try:
        reader = csv.DictReader(line for line in source if not line.startswith("#"))
        header = reader.fieldnames or []
        missing = [mapping[k] for k in REQUIRED_MAPPING_KEYS if mapping[k] not in header]
        if missing:
            raise SchemaError(f"missing column(s) in header: {', '.join(missing)}")
        rows = []
        for rownum, raw in enumerate(reader, start=1):
            counting_raw = (raw[mapping["counting"]] or "").strip().lower()
            counting = _COUNTING_VALUES.get(counting_raw)
            if counting is None:
                raise RowParseError(
                    f"counting value {counting_raw!r} not recognized", row=rownum
                )
            try:
                P = float(raw[mapping["P"]])
                p_top = {
                    level: float(raw[mapping[f"p_top{level}"]]) for level in (50, 10, 5, 1)
                }
            except (TypeError, ValueError):
                raise RowParseError("non-numeric indicator value", row=rownum) from None
            if P < 0 or any(v < 0 for v in p_top.values()):
                raise RowParseError("negative paper count", row=rownum)
            rows.append(
                InstitutionPeriodRow(
                    institution=(raw[mapping["institution"]] or "").strip(),
                    country=(raw[mapping["country"]] or "").strip(),
                    field=(raw[mapping["field"]] or "").strip(),
                    period=_normalize_period(raw[mapping["period"]] or ""),
                    counting=counting,
                    P=P,
                    p_top=p_top,
                )
            )
        return rows
    finally:
        if close:
            source.close()


def filter_eligible(
    rows: Iterable[InstitutionPeriodRow],
    min_top1: float = DEFAULT_MIN_TOP1,
    required_periods: Sequence[str] = DEFAULT_PERIODS,
) -> dict[tuple[str, str, str], list[InstitutionPeriodRow]]:
    """Keep institutions with P_top1% >= min_top1 in every required period.

    Only fractional-counting rows are considered.  Institutions missing a
    period are excluded and logged.  Returns the surviving rows grouped by
    (institution, country, field), period-ordered.
    """
    wanted = [_normalize_period(p) for p in required_periods]
    by_key: dict[tuple[str, str, str], dict[str, InstitutionPeriodRow]] = {}
    for row in rows:
        if row.counting != FRACTIONAL or row.period not in wanted:
            continue
        by_key.setdefault((row.institution, row.country, row.field), {})[row.period] = row
    eligible: dict[tuple[str, str, str], list[InstitutionPeriodRow]] = {}
    for key, periods in sorted(by_key.items()):
        absent = [p for p in wanted if p not in periods]
        if absent:
            logger.warning("%s excluded: missing period(s) %s", key[0], ", ".join(absent))
            continue
        if all(periods[p].p_top[1] >= min_top1 for p in wanted):
            eligible[key] = [periods[p] for p in wanted]
    return eligible


def mean_ratios(rows: Sequence[InstitutionPeriodRow]) -> MeanRatios:
    """Average the per-period ratio triples (mean of ratios, not of counts).

    Periods with a zero denominator are dropped with a warning.
    """
    triples = []
    for row in rows:
        if row.P <= 0 or row.p_top[50] <= 0 or row.p_top[10] <= 0:
            logger.warning(
                "%s %s: zero denominator in period %s, dropped",
                row.institution,
                row.field,
                row.period,
            )
            continue
        triples.append(
            (
                row.p_top[10] / row.P,
                row.p_top[5] / row.p_top[50],
                row.p_top[1] / row.p_top[10],
            )
        )
    if not triples:
        raise InsufficientDataError("no period with positive denominators")
    n = len(triples)
    r1 = sum(t[0] for t in triples) / n
    r2 = sum(t[1] for t in triples) / n
    r3 = sum(t[2] for t in triples) / n
    return MeanRatios(r1, r2, r3, n)


def ratio_spread(
    R1: float, R2: float, R3: float, spread_denominator: str = "min"
) -> float:
    """Relative spread (max-min)/denominator of the three ratios."""
    if spread_denominator not in SPREAD_DENOMINATORS:
        raise DomainError(
            f"spread denominator must be one of {SPREAD_DENOMINATORS}, "
            f"got {spread_denominator!r}"
        )
    lo, hi = min(R1, R2, R3), max(R1, R2, R3)
    denom = {"min": lo, "max": hi, "mean": (R1 + R2 + R3) / 3}[spread_denominator]
    return (hi - lo) / denom


def classify(
    R1: float,
    R2: float,
    R3: float,
    stability_threshold: float = DEFAULT_STABILITY,
    spread_denominator: str = "min",
) -> str:
    """Type A if the ratios are stable within the threshold, else B/C by trend.

    B when R1 > R3 (ratios decrease toward the top percentiles), C when
    they increase.  The middle ratio does not decide B/C: observed triples
    can be non-monotone while the end-to-end trend is clear.
    """
    if min(R1, R2, R3) <= 0:
        raise DomainError(f"ratios must be positive, got ({R1}, {R2}, {R3})")
    if ratio_spread(R1, R2, R3, spread_denominator) <= stability_threshold:
        return TYPE_A
    return TYPE_B if R1 > R3 else TYPE_C


def assess(
    eligible: Mapping[tuple[str, str, str], Sequence[InstitutionPeriodRow]],
    stability_threshold: float = DEFAULT_STABILITY,
    spread_denominator: str = "min",
) -> list[InstitutionAssessment]:
    """Classify every eligible institution and attach its bottom-50% share."""
    out = []
    for (institution, country, field), rows in eligible.items():
        ratios = mean_ratios(rows)
        shares = [1.0 - r.p_top[50] / r.P for r in rows if r.P > 0]
        out.append(
            InstitutionAssessment(
                institution=institution,
                country=country,
                field=field,
                R1=ratios.R1,
                R2=ratios.R2,
                R3=ratios.R3,
                spread=ratio_spread(ratios.R1, ratios.R2, ratios.R3, spread_denominator),
                type=classify(
                    ratios.R1, ratios.R2, ratios.R3, stability_threshold, spread_denominator
                ),
                periods_used=ratios.periods_used,
                bottom50_mean=sum(shares) / len(shares) if shares else None,
                bottom50_halfrange=(max(shares) - min(shares)) / 2 if shares else None,
            )
        )
    return out


@dataclass(frozen=True)
class CountryTypeCounts:
    country: str
    field: str
    n_type_a: int
    n_type_b: int
    n_type_c: int


def country_summary(assessments: Iterable[InstitutionAssessment]) -> list[CountryTypeCounts]:
    """Per-country Type A/B/C counts with a Total row per field."""
    counts: dict[tuple[str, str], dict[str, int]] = {}
    for a in assessments:
        slot = counts.setdefault((a.field, a.country), {TYPE_A: 0, TYPE_B: 0, TYPE_C: 0})
        slot[a.type] += 1
    rows = []
    totals: dict[str, dict[str, int]] = {}
    for (field, country), slot in sorted(counts.items()):
        rows.append(CountryTypeCounts(country, field, slot[TYPE_A], slot[TYPE_B], slot[TYPE_C]))
        agg = totals.setdefault(field, {TYPE_A: 0, TYPE_B: 0, TYPE_C: 0})
        for t in (TYPE_A, TYPE_B, TYPE_C):
            agg[t] += slot[t]
    for field, agg in sorted(totals.items()):
        rows.append(CountryTypeCounts("Total", field, agg[TYPE_A], agg[TYPE_B], agg[TYPE_C]))
    return rows
