"""citerank: citation-rank indicators, double-rank power laws, and
deviation diagnostics for research-evaluation corpora."""

__version__ = "0.1.0"

from .corpus import (
    GLOBAL,
    MEAN_OF_TIES,
    MIN_OF_TIES,
    CorpusSchema,
    PaperRecord,
    RankedCorpus,
    load_corpus,
    rank_global,
    write_corpus_csv,
)
from .percentile import (
    PercentileSet,
    PercentileThreshold,
    global_thresholds,
    indicator_set,
    percentile_threshold,
    top_percentile_count,
)
from .doublerank import (
    BreakthroughEstimate,
    DeviationReport,
    DoubleRankSeries,
    PowerLawReference,
    double_rank_series,
    expected_local_rank,
    extrapolate_breakthrough,
    power_law_reference,
    ratio_equality_gap,
    reference_for_group,
    upper_tail_deviation,
)
from .tails import (
    LogBinHistogram,
    LogBinSpec,
    LognormalParams,
    bottom50_share,
    estimate_lognormal,
    expected_bin_weights,
    log_binned_histogram,
    lower_tail_excess,
    scale_to_reference,
    synth_lognormal,
)
from .synth import (
    SyntheticSpec,
    inject_deflated_lower_tail,
    inject_inflated_lower_tail,
    inject_upper_tail_shift,
    make_mean_shift_corpus,
    make_power_law_corpus,
)
from .classify import (
    InstitutionAssessment,
    InstitutionPeriodRow,
    assess,
    classify,
    country_summary,
    filter_eligible,
    load_institution_table,
    mean_ratios,
)

__all__ = [name for name in dir() if not name.startswith("_")]
