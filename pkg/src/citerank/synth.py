"""Synthetic corpora: exact power-law oracles and deviation injectors.

``make_power_law_corpus`` builds a corpus whose one group lies on a
chosen double-rank power law by construction (membership decided by when
floor(C*g**alpha) increments along the sorted global list), so the ideal
model holds to within one local rank and detector tests have an exact
oracle.  The three injectors then reproduce the deviation families:
extra barely-cited papers (inflated lower tail), removal of a group's
below-median papers (deflated lower part), and a citation boost or cut
of the group's most-cited papers (extreme-upper-tail shifts).

Everything here is seed-deterministic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .corpus import MEAN_OF_TIES, RankedCorpus
from .errors import ConstructionError, DomainError
from .percentile import percentile_threshold
from .tails import LognormalParams, synth_lognormal

DEFAULT_GROUP = "SYNTH"


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a power-law oracle corpus."""

    G: int
    group_P: int
    alpha: float
    lognormal: LognormalParams
    seed: int
    group_label: str = DEFAULT_GROUP

    def __post_init__(self):
        if not 1 <= self.group_P <= self.G:
            raise DomainError(f"need 1 <= group_P <= G, got {self.group_P}/{self.G}")
        if self.alpha <= 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")


#: Percentile boundaries adjusted by the generator's interpolation step.
_SNAP_LEVELS = (50, 10, 5, 1)


def make_power_law_corpus(
    spec: SyntheticSpec, policy: str = MEAN_OF_TIES, snap_boundaries: bool = True
) -> RankedCorpus:
    """Corpus whose group's double-rank curve is l(g) = C*g**alpha exactly.

    Citations are drawn lognormally and sorted; the paper at sorted
    position g joins the group whenever floor(C*g**alpha) increments, with
    C = group_P / G**alpha, so the group's local rank tracks the target
    curve with deviation <= 1 everywhere.

    Raw floor-increment membership quantizes the group's weighted count at
    a percentile boundary to whole papers, which at small group sizes
    visibly degrades the top-1% ratio (the theoretical count there can be
    e.g. 2.5 papers).  With ``snap_boundaries`` the member nearest each
    standard boundary is relocated across or into the boundary tie block
    whenever that brings the fractional count closer to the exact curve
    value; moves span less than one member gap, so the <= 1 local-rank
    fidelity is preserved.
    """
    citations = synth_lognormal(spec.G, spec.lognormal, spec.seed)
    # membership is decided on the sorted order, so sort before ranking;
    # from_arrays' stable sort then keeps positions identical
    citations = np.sort(citations)[::-1]
    g = np.arange(1, spec.G + 1, dtype=float)
    coeff = spec.group_P / float(spec.G) ** spec.alpha
    # the epsilon stops floor(C*G**alpha) losing the last member to roundoff
    curve = np.floor(coeff * g ** spec.alpha + 1e-9).astype(np.int64)
    steps = np.diff(curve, prepend=0)
    if np.any(steps > 1):
        raise ConstructionError(
            "target curve climbs faster than one member per global rank; "
            "alpha/group_P combination is unrealizable"
        )
    members = np.flatnonzero(steps == 1)
    if members.size == 0:
        raise ConstructionError("alpha/group_P combination yields an empty group")
    if snap_boundaries:
        members = _snap_members(members, citations, coeff, spec.alpha)
    return RankedCorpus.from_arrays(
        citations,
        group_members={spec.group_label: members},
        policy=policy,
    )


def _snap_members(
    members: np.ndarray, citations: np.ndarray, coeff: float, alpha: float
) -> np.ndarray:
    """Boundary interpolation: nudge one member per percentile cut.

    At each cut the group's fractional count is m + f*k (m members above
    the boundary tie block, k inside it, f the block's tie weight).  A
    single member relocation changes that by +-f, +-(1-f) or +-1; the move
    minimizing the distance to the exact curve count C*(xG/100)**alpha is
    applied when it helps.  Relocations stay within one member gap of the
    block, so the double-rank curve still tracks the target within one
    local rank.
    """
    members = set(int(p) for p in members)
    size = citations.size
    for x in _SNAP_LEVELS:
        target_mass = x / 100.0 * size
        # boundary tie block in position space: papers strictly above it,
        # then n_at papers sharing the threshold citation value
        cut = int(np.ceil(target_mass)) - 1
        c_star = citations[cut]
        above = int(np.searchsorted(-citations, -c_star, side="left"))
        n_at = int(np.searchsorted(-citations, -c_star, side="right")) - above
        f = (target_mass - above) / n_at
        block = range(above, above + n_at)
        t = coeff * target_mass ** alpha
        m = sum(1 for p in members if p < above)
        k = sum(1 for p in members if above <= p < above + n_at)

        def err(mm, kk):
            return abs(t - mm - f * kk)

        best, best_move = err(m, k), None
        in_block = sorted(p for p in block if p in members)
        free_in_block = sorted(p for p in block if p not in members)
        below = sorted(p for p in members if p >= above + n_at)
        above_members = sorted(p for p in members if p < above)
        # candidate single relocations: into the block from either side,
        # out of the block to either side, or across the block entirely
        if free_in_block and below and err(m, k + 1) < best:
            best, best_move = err(m, k + 1), (below[0], free_in_block[0])
        if free_in_block and above_members and err(m - 1, k + 1) < best:
            best, best_move = err(m - 1, k + 1), (above_members[-1], free_in_block[0])
        if in_block and err(m, k - 1) < best:
            best, best_move = err(m, k - 1), (in_block[-1], above + n_at)
        if in_block and err(m + 1, k - 1) < best:
            best, best_move = err(m + 1, k - 1), (in_block[0], above - 1)
        if below and above > 0 and (above - 1) not in members and err(m + 1, k) < best:
            best, best_move = err(m + 1, k), (below[0], above - 1)
        if above_members and (above + n_at) not in members and err(m - 1, k) < best:
            best, best_move = err(m - 1, k), (above_members[-1], above + n_at)
        if best_move is not None:
            src, dst = best_move
            while dst in members:  # land on the nearest free position
                dst += 1
            if 0 <= dst < size:
                members.discard(src)
                members.add(dst)
    return np.array(sorted(members), dtype=np.intp)


def make_mean_shift_corpus(
    G: int,
    group_P: int,
    base: LognormalParams,
    delta_mu: float,
    seed: int,
    group_label: str = DEFAULT_GROUP,
    policy: str = MEAN_OF_TIES,
) -> RankedCorpus:
    """Statistical sibling of the oracle: group drawn at mu + delta_mu.

    No exact power law holds; useful for realism checks with widened
    tolerances.
    """
    if not 1 <= group_P < G:
        raise DomainError(f"need 1 <= group_P < G, got {group_P}/{G}")
    rng = np.random.default_rng(seed)
    rest = np.rint(rng.lognormal(base.mu, base.sigma, G - group_P)).astype(np.int64)
    grp = np.rint(rng.lognormal(base.mu + delta_mu, base.sigma, group_P)).astype(np.int64)
    citations = np.concatenate([rest, grp])
    members = np.arange(G - group_P, G)
    return RankedCorpus.from_arrays(
        citations, group_members={group_label: members}, policy=policy
    )


def _rebuild(
    corpus: RankedCorpus,
    citations: np.ndarray,
    ids: list[str],
    members: dict[str, np.ndarray],
    threshold_pool=None,
) -> RankedCorpus:
    return RankedCorpus.from_arrays(
        citations,
        ids=ids,
        group_members=members,
        policy=corpus.rank_policy,
        threshold_pool=threshold_pool,
    )


def _membership(corpus: RankedCorpus) -> dict[str, np.ndarray]:
    return {label: pos.copy() for label, pos in corpus.group_index.items()}


def inject_inflated_lower_tail(
    corpus: RankedCorpus,
    group: str,
    extra: int,
    seed: int,
    global_pool_fixed: bool = False,
) -> RankedCorpus:
    """Add ``extra`` barely-cited papers (0-2 citations, uniform) to a group.

    The new papers join both the group and the global pool.  With
    ``global_pool_fixed`` the returned corpus keeps the pre-injection
    citation pool for percentile thresholds, isolating the group-structure
    effect from the global-threshold drift.
    """
    if extra < 1:
        raise DomainError(f"extra must be >= 1, got {extra}")
    corpus.group_positions(group)  # raises on unknown label
    rng = np.random.default_rng(seed)
    new_citations = rng.integers(0, 3, size=extra)
    citations = np.concatenate([corpus.citations, new_citations])
    taken = set(corpus.ids)
    ids = list(corpus.ids)
    stem = 0
    for _ in range(extra):
        stem += 1
        while (pid := f"inflate{stem:07d}") in taken:
            stem += 1
        ids.append(pid)
        taken.add(pid)
    members = _membership(corpus)
    members[group] = np.concatenate(
        [members[group], np.arange(corpus.global_size, corpus.global_size + extra)]
    )
    pool = corpus.citations if global_pool_fixed else None
    return _rebuild(corpus, citations, ids, members, threshold_pool=pool)


def inject_deflated_lower_tail(
    corpus: RankedCorpus, group: str, remove_fraction: float, seed: int
) -> RankedCorpus:
    """Drop a fraction of the group's papers lying below the global median.

    Removed papers lose the group label but stay in the corpus, so global
    thresholds are untouched.  A group with nothing below the median is
    returned unchanged with a warning.
    """
    if not 0 < remove_fraction < 1:
        raise DomainError(f"remove_fraction must be in (0, 1), got {remove_fraction}")
    positions = corpus.group_positions(group)
    median = percentile_threshold(corpus, 50).c_star
    below = positions[corpus.citations[positions] < median]
    if below.size == 0:
        warnings.warn(f"group {group!r} has no papers below the global median; no-op")
        return corpus
    n_remove = int(round(remove_fraction * below.size))
    if n_remove == 0:
        warnings.warn(f"remove_fraction {remove_fraction} selects 0 of {below.size} papers")
        return corpus
    rng = np.random.default_rng(seed)
    removed = set(rng.choice(below, size=n_remove, replace=False).tolist())
    members = _membership(corpus)
    members[group] = np.array([p for p in positions if int(p) not in removed], dtype=np.intp)
    return _rebuild(corpus, corpus.citations.copy(), list(corpus.ids), members)


def inject_upper_tail_shift(
    corpus: RankedCorpus, group: str, top_m: int, factor: float
) -> RankedCorpus:
    """Multiply the group's top_m papers' citations by ``factor`` and re-rank."""
    positions = corpus.group_positions(group)
    if top_m > positions.size:
        raise DomainError(f"top_m {top_m} exceeds group size {positions.size}")
    if factor <= 0:
        raise DomainError(f"factor must be positive, got {factor}")
    citations = corpus.citations.copy()
    boosted = positions[:top_m]  # positions are sorted: most cited first
    citations[boosted] = np.rint(citations[boosted] * factor).astype(np.int64)
    return _rebuild(corpus, citations, list(corpus.ids), _membership(corpus))
