"""Lower-tail diagnostics: log-binned histograms and lognormal baselines.

Citation histograms use five-per-decade geometric bins with dedicated
singleton bins for 0, 1 and 2 citations, so the uncited/barely-cited mass
is visible instead of being swallowed by a wide first bin.  Bin lower
edges are b_k = round(10**(0.5 + 0.2k)): 3, 5, 8, 13, 20, 32, 50, 79, ...
giving the integer bins 3-4, 5-7, 8-12, 13-19, 20-31, 32-49, 50-78, ...

The lognormal baseline is fitted on the log scale over citations >= 1
(zeros are excluded and their count reported), and synthetic counts are
drawn as exp(mu + sigma*Z) rounded to the nearest integer.  Expected bin
masses integrate that rounded variable over each bin's range, so the
baseline and the generator agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .errors import (
    DomainError,
    InsufficientDataError,
    InsufficientVarianceError,
    ScalingError,
)
from .percentile import PercentileSet

_SPECIAL_BINS = ("0", "1", "2")


def geometric_boundaries(max_citation: int) -> tuple[int, ...]:
    """Lower edges round(10**(0.5+0.2k)) until the bins cover max_citation."""
    edges = []
    k = 0
    while True:
        edge = round(10 ** (0.5 + 0.2 * k))
        if not edges or edge > edges[-1]:
            edges.append(edge)
        k += 1
        if len(edges) >= 2 and edges[-1] > max_citation:
            break
    return tuple(edges)


@dataclass(frozen=True)
class LogBinSpec:
    """Bin layout: singletons {0},{1},{2} then geometric bins [b_k, b_{k+1}-1]."""

    boundaries: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        b = self.boundaries
        if len(b) < 2:
            raise DomainError("need at least two geometric boundaries")
        if b[0] != 3:
            raise DomainError(f"first geometric bin must start at 3, got {b[0]}")
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise DomainError("boundaries must be strictly increasing")

    @classmethod
    def default(cls, max_citation: int = 100_000) -> "LogBinSpec":
        return cls(geometric_boundaries(max_citation))

    @property
    def max_covered(self) -> int:
        """Largest citation count that falls inside a bin."""
        return self.boundaries[-1] - 1

    def bins(self) -> list[tuple[str, int, int]]:
        """(label, lower, upper) for every bin, in order."""
        out = [(lab, int(lab), int(lab)) for lab in _SPECIAL_BINS]
        b = self.boundaries
        for lo, nxt in zip(b[:-1], b[1:]):
            hi = nxt - 1
            label = str(lo) if lo == hi else f"{lo}-{hi}"
            out.append((label, lo, hi))
        return out

    def labels(self) -> list[str]:
        return [lab for lab, _, _ in self.bins()]

    def bin_index(self, citation: int) -> int:
        if citation < 0:
            raise DomainError(f"citation count must be >= 0, got {citation}")
        if citation <= 2:
            return citation
        if citation > self.max_covered:
            raise DomainError(
                f"citation count {citation} beyond the last bin "
                f"(spec covers up to {self.max_covered})"
            )
        k = int(np.searchsorted(self.boundaries, citation, side="right")) - 1
        return 3 + k


@dataclass(frozen=True, eq=False)
class LogBinHistogram:
    spec: LogBinSpec
    weights: np.ndarray
    total: float = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size != len(self.spec.labels()):
            raise DomainError("weight vector does not match the bin spec")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "total", float(w.sum()))

    @property
    def labels(self) -> list[str]:
        return self.spec.labels()

    def weight(self, label: str) -> float:
        try:
            return float(self.weights[self.labels.index(label)])
        except ValueError:
            raise DomainError(f"no bin labelled {label!r}") from None


def log_binned_histogram(
    citations: Sequence[int], spec: LogBinSpec | None = None
) -> LogBinHistogram:
    """Count citations into the spec's bins (each value lands in exactly one)."""
    c = np.asarray(citations, dtype=np.int64)
    if c.size == 0:
        raise DomainError("citations must be non-empty")
    if c.min() < 0:
        raise DomainError("citation counts must be non-negative")
    if spec is None:
        spec = LogBinSpec.default(max(int(c.max()), 10))
    edges = _bin_edges(spec)
    counts, _ = np.histogram(c, bins=edges)
    return LogBinHistogram(spec, counts.astype(float))


def _bin_edges(spec: LogBinSpec) -> np.ndarray:
    """Half-open numeric edges matching spec.bins() for np.histogram."""
    lows = [lo for _, lo, _ in spec.bins()]
    return np.array(lows + [spec.boundaries[-1]], dtype=float) - 0.5


def scale_to_reference(
    hist: LogBinHistogram, reference: LogBinHistogram, anchor_bin: str
) -> LogBinHistogram:
    """Rescale hist so its anchor-bin weight equals the reference's."""
    if hist.spec != reference.spec:
        raise DomainError("histograms must share the same bin spec")
    own = hist.weight(anchor_bin)
    target = reference.weight(anchor_bin)
    if own <= 0 or target <= 0:
        raise ScalingError(
            f"anchor bin {anchor_bin!r} has zero weight (hist={own}, reference={target})"
        )
    return LogBinHistogram(hist.spec, hist.weights * (target / own))


@dataclass(frozen=True)
class LognormalParams:
    """Log-scale mean/sd of a citation distribution, with sample counts."""

    mu: float
    sigma: float
    n: int = 0
    n_zero: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")


def synth_lognormal(n: int, params: LognormalParams, seed: int) -> np.ndarray:
    """Seeded lognormal citation counts: rint(exp(mu + sigma*Z)), n draws."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return np.rint(rng.lognormal(params.mu, params.sigma, n)).astype(np.int64)


def estimate_lognormal(citations: Sequence[int]) -> LognormalParams:
    """Fit mu, sigma as mean/sd of ln(c) over c >= 1; zeros are excluded.

    Requires at least 10 positive values; identical values raise an
    insufficient-variance error since sigma = 0 is rejected.
    """
    c = np.asarray(citations)
    positive = c[c >= 1].astype(float)
    n_zero = int(c.size - positive.size)
    if positive.size < 10:
        raise InsufficientDataError(
            f"need at least 10 citations >= 1, got {positive.size}"
        )
    logs = np.log(positive)
    mu = float(logs.mean())
    sigma = float(logs.std(ddof=1))
    if sigma == 0.0:
        raise InsufficientVarianceError(
            f"all positive citation counts identical (mu={mu:.6g}); sigma=0 rejected"
        )
    return LognormalParams(mu, sigma, int(positive.size), n_zero)


def expected_bin_weights(spec: LogBinSpec, params: LognormalParams) -> np.ndarray:
    """Probability mass of rint(exp(mu+sigma*Z)) in each bin of the spec.

    rint(X) lands in integer bin [lo, hi] iff X is in [lo-0.5, hi+0.5);
    the {0} bin collects X < 0.5.
    """
    bins = spec.bins()
    upper = np.array([hi + 0.5 for _, _, hi in bins])
    lower = np.array([lo - 0.5 for _, lo, _ in bins])
    hi_cdf = ndtr((np.log(upper) - params.mu) / params.sigma)
    lo_cdf = np.where(
        lower <= 0, 0.0, ndtr((np.log(np.maximum(lower, 1e-300)) - params.mu) / params.sigma)
    )
    return hi_cdf - lo_cdf


@dataclass(frozen=True, eq=False)
class ExcessReport:
    """Observed-minus-expected weight in the bins at/left of the model mode."""

    mode_bin: str
    mode_undefined: bool
    labels: tuple[str, ...]
    excess: np.ndarray
    total_excess_fraction: float
    scale: float


def lower_tail_excess(observed: LogBinHistogram, model: LognormalParams) -> ExcessReport:
    """Quantify surplus papers left of the model's modal bin.

    Expected weights are scaled so the bins strictly right of the mode
    match the observed mass there -- injected lower-tail papers therefore
    cannot contaminate the baseline.  The total excess fraction is the
    signed surplus divided by the observed total.
    """
    probs = expected_bin_weights(observed.spec, model)
    labels = observed.labels
    mode_idx = int(np.argmax(probs))
    first_geometric = len(_SPECIAL_BINS)
    mode_undefined = mode_idx < first_geometric
    if mode_undefined:
        mode_idx = first_geometric
    right = slice(mode_idx + 1, None)
    right_prob = probs[right].sum()
    right_obs = observed.weights[right].sum()
    if right_prob <= 0 or right_obs <= 0:
        raise InsufficientDataError("no usable mass right of the mode bin")
    scale = right_obs / right_prob
    expected = probs * scale
    left = slice(0, mode_idx + 1)
    excess = observed.weights[left] - expected[left]
    excess.setflags(write=False)
    return ExcessReport(
        labels[mode_idx],
        mode_undefined,
        tuple(labels[left]),
        excess,
        float(excess.sum() / observed.total),
        scale,
    )


def bottom50_share(ps: PercentileSet) -> float:
    """Share of a group's papers in the globally 50% less cited: 1 - P_top50%/P."""
    if ps.P <= 0:
        raise DomainError("group has no papers")
    if 50 not in ps.p_top:
        raise DomainError("indicator set lacks the 50% level")
    return 1.0 - ps.p_top[50] / ps.P
