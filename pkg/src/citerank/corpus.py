"""Corpus ingestion and tie-aware global ranking.

A corpus is a flat list of papers, each with an integer citation count and
zero or more group labels (country, institution, topic...).  All analysis
starts from a :class:`RankedCorpus`: the papers sorted by citations
descending, with a global rank assigned to each paper and an index from
group label to the positions of that group's papers.

Two tie policies are supported.  Under ``mean-of-ties`` papers with equal
citation counts share the arithmetic mean of the rank range they occupy
(so the sum of all ranks is always G(G+1)/2); under ``min-of-ties`` they
share the smallest rank of the block (competition ranking).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateIdError,
    EmptyCorpusError,
    RowParseError,
    SchemaError,
    UnknownGroupError,
)

#: Reserved label that always refers to the whole corpus.
GLOBAL = "GLOBAL"

MEAN_OF_TIES = "mean-of-ties"
MIN_OF_TIES = "min-of-ties"

_POLICY_ALIASES = {
    "mean": MEAN_OF_TIES,
    "mean-of-ties": MEAN_OF_TIES,
    "min": MIN_OF_TIES,
    "min-of-ties": MIN_OF_TIES,
}


def normalize_policy(policy: str) -> str:
    try:
        return _POLICY_ALIASES[policy]
    except KeyError:
        raise ValueError(f"unknown tie policy {policy!r}; use 'mean' or 'min'") from None


@dataclass(frozen=True)
class PaperRecord:
    """One publication: opaque id, citation count, group labels."""

    id: str
    citations: int
    groups: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.id:
            raise ValueError("paper id must be non-empty")
        if self.citations < 0:
            raise ValueError(f"citations must be >= 0, got {self.citations}")


@dataclass(frozen=True)
class CorpusSchema:
    """Column mapping for corpus CSV files."""

    id_column: str = "id"
    citations_column: str = "citations"
    group_columns: tuple[str, ...] = ("group",)
    delimiter: str = ","

    def __post_init__(self):
        object.__setattr__(self, "group_columns", tuple(self.group_columns))
        names = [self.id_column, self.citations_column, *self.group_columns]
        if len(set(names)) != len(names):
            raise SchemaError(f"schema columns must be distinct, got {names}")
        if len(self.delimiter) != 1:
            raise SchemaError(f"delimiter must be a single character, got {self.delimiter!r}")

    @property
    def columns(self) -> tuple[str, ...]:
        return (self.id_column, self.citations_column, *self.group_columns)


def _as_text_stream(source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if hasattr(source, "read"):
        probe = source.read(0)
        if isinstance(probe, bytes):
            return io.TextIOWrapper(source, encoding="utf-8", newline="")
        return source
    raise TypeError(f"cannot read corpus from {type(source).__name__}")


def _skip_comments(stream: IO[str]):
    for line in stream:
        if not line.startswith("#"):
            yield line


def load_corpus(source, schema: CorpusSchema | None = None) -> list[PaperRecord]:
    """Parse a delimited text stream (or path) into paper records.

    The header row must contain every column named by the schema.  Rows
    with a non-integer or negative citation value raise
    :class:`RowParseError` with the offending data-row number (1-based);
    duplicate ids raise :class:`DuplicateIdError`.  Group labels are the
    union of the non-empty group-column values of the row.  Lines starting
    with ``#`` are metadata comments and ignored.
    """
    schema = schema or CorpusSchema()
    stream = _as_text_stream(source)
    reader = csv.DictReader(_skip_comments(stream), delimiter=schema.delimiter)
    header = reader.fieldnames
    if header is None:
        raise SchemaError("input has no header row")
    missing = [c for c in schema.columns if c not in header]
    if missing:
        raise SchemaError(f"missing column(s) in header: {', '.join(missing)}")

    records: list[PaperRecord] = []
    seen: set[str] = set()
    for rownum, row in enumerate(reader, start=1):
        pid = (row[schema.id_column] or "").strip()
        if not pid:
            raise RowParseError("empty paper id", row=rownum)
        if pid in seen:
            raise DuplicateIdError(f"duplicate paper id {pid!r} at data row {rownum}")
        seen.add(pid)
        raw = (row[schema.citations_column] or "").strip()
        try:
            citations = int(raw)
        except ValueError:
            raise RowParseError(f"citation count {raw!r} is not an integer", row=rownum) from None
        if citations < 0:
            raise RowParseError(f"negative citation count {citations}", row=rownum)
        groups = set()
        for col in schema.group_columns:
            value = (row[col] or "").strip()
            if value:
                if value == GLOBAL:
                    raise RowParseError(
                        f"group label {GLOBAL!r} is reserved for the whole corpus", row=rownum
                    )
                groups.add(value)
        records.append(PaperRecord(pid, citations, frozenset(groups)))
    return records


def _tie_blocks(sorted_citations: np.ndarray):
    """Start/end (exclusive) indices of equal-citation runs in a sorted array."""
    change = np.flatnonzero(np.diff(sorted_citations) != 0)
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change + 1, [sorted_citations.size]))
    return starts, ends


def _assign_ranks(sorted_citations: np.ndarray, policy: str) -> np.ndarray:
    starts, ends = _tie_blocks(sorted_citations)
    if policy == MEAN_OF_TIES:
        block_rank = (starts + 1 + ends) / 2.0
    else:
        block_rank = (starts + 1).astype(float)
    return np.repeat(block_rank, ends - starts)


@dataclass(frozen=True, eq=False)
class RankedCorpus:
    """Citation-sorted corpus with global ranks and a per-group index.

    Immutable after construction; every array is read-only.  ``papers``
    reconstructs the record view lazily.  ``threshold_pool``, when set,
    is an alternative citation pool used for percentile thresholds only
    (injection experiments freeze the global boundaries this way).
    """

    ids: tuple[str, ...]
    citations: np.ndarray
    ranks: np.ndarray
    group_index: Mapping[str, np.ndarray]
    rank_policy: str
    threshold_pool: np.ndarray | None = field(default=None)

    @classmethod
    def from_arrays(
        cls,
        citations,
        *,
        ids: Sequence[str] | None = None,
        group_members: Mapping[str, Sequence[int]] | None = None,
        policy: str = MEAN_OF_TIES,
        threshold_pool=None,
    ) -> "RankedCorpus":
        """Build a ranked corpus from parallel arrays.

        ``group_members`` maps each label to indices in the *input* order;
        they are translated to positions in the sorted order.  The sort is
        stable, so input order breaks citation ties deterministically.
        """
        policy = normalize_policy(policy)
        citations = np.asarray(citations, dtype=np.int64)
        if citations.size == 0:
            raise EmptyCorpusError("cannot rank an empty corpus")
        if citations.min() < 0:
            raise ValueError("citations must be non-negative")
        order = np.argsort(-citations, kind="stable")
        sorted_citations = citations[order]
        position_of = np.empty_like(order)
        position_of[order] = np.arange(order.size)

        if ids is None:
            id_tuple = tuple(f"p{i + 1:07d}" for i in order)
        else:
            if len(ids) != citations.size:
                raise ValueError("ids and citations must have the same length")
            id_tuple = tuple(ids[i] for i in order)

        index: dict[str, np.ndarray] = {}
        for label, members in (group_members or {}).items():
            if label == GLOBAL:
                raise ValueError(f"group label {GLOBAL!r} is reserved")
            positions = np.sort(position_of[np.asarray(members, dtype=np.intp)])
            positions.setflags(write=False)
            index[label] = positions

        ranks = _assign_ranks(sorted_citations, policy)
        sorted_citations.setflags(write=False)
        ranks.setflags(write=False)
        if threshold_pool is not None:
            threshold_pool = np.sort(np.asarray(threshold_pool, dtype=np.int64))[::-1].copy()
            threshold_pool.setflags(write=False)
        return cls(id_tuple, sorted_citations, ranks, index, policy, threshold_pool)

    @property
    def global_size(self) -> int:
        return self.citations.size

    @property
    def groups(self) -> list[str]:
        return sorted(self.group_index)

    def has_group(self, label: str) -> bool:
        return label == GLOBAL or label in self.group_index

    def group_positions(self, label: str) -> np.ndarray:
        if label == GLOBAL:
            return np.arange(self.global_size)
        try:
            return self.group_index[label]
        except KeyError:
            raise UnknownGroupError(f"unknown group {label!r}") from None

    def group_citations(self, label: str) -> np.ndarray:
        return self.citations[self.group_positions(label)]

    def group_size(self, label: str) -> int:
        return self.group_positions(label).size

    @cached_property
    def papers(self) -> tuple[PaperRecord, ...]:
        labels_at: dict[int, set[str]] = {}
        for label, positions in self.group_index.items():
            for pos in positions:
                labels_at.setdefault(int(pos), set()).add(label)
        return tuple(
            PaperRecord(self.ids[i], int(self.citations[i]), frozenset(labels_at.get(i, ())))
            for i in range(self.global_size)
        )


def rank_global(records: Iterable[PaperRecord], policy: str = MEAN_OF_TIES) -> RankedCorpus:
    """Sort records by citations descending (stable) and assign global ranks."""
    records = list(records)
    if not records:
        raise EmptyCorpusError("cannot rank an empty corpus")
    citations = np.fromiter((r.citations for r in records), dtype=np.int64, count=len(records))
    ids = [r.id for r in records]
    members: dict[str, list[int]] = {}
    for i, rec in enumerate(records):
        for label in rec.groups:
            members.setdefault(label, []).append(i)
    return RankedCorpus.from_arrays(citations, ids=ids, group_members=members, policy=policy)


def write_corpus_csv(corpus: RankedCorpus, dest, schema: CorpusSchema | None = None) -> None:
    """Serialize a corpus to the same CSV layout :func:`load_corpus` ingests.

    The schema must provide at least as many group columns as the most
    multiply-labelled paper needs; labels are written sorted.
    """
    papers = corpus.papers
    width = max((len(p.groups) for p in papers), default=0)
    if schema is None:
        cols = tuple(f"group_{i + 1}" for i in range(width)) if width > 1 else ("group",)
        schema = CorpusSchema(group_columns=cols)
    if len(schema.group_columns) < width:
        raise SchemaError(
            f"schema has {len(schema.group_columns)} group column(s) "
            f"but a paper carries {width} labels"
        )
    close = False
    if isinstance(dest, (str, Path)):
        dest = open(dest, "w", encoding="utf-8", newline="")
        close = True
    try:
        writer = csv.writer(dest, delimiter=schema.delimiter, lineterminator="\n")
        writer.writerow(schema.columns)
        pad = [""] * len(schema.group_columns)
        for paper in papers:
            labels = sorted(paper.groups)
            labels += pad[len(labels):]
            writer.writerow([paper.id, paper.citations, *labels])
    finally:
        if close:
            dest.close()
