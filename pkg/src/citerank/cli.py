"""Command-line front end: batch analyses emitting CSV/JSON reports.

Every output file starts with a metadata header (tool version, digest of
the resolved configuration, tie policy, thresholds) so results are
auditable; the timestamp line can be suppressed for byte-reproducible
runs.  Exit codes: 0 ok, 2 usage error, 3 parse error, 4 insufficient
data, 5 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import re
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .corpus import (
    GLOBAL,
    CorpusSchema,
    RankedCorpus,
    load_corpus,
    normalize_policy,
    rank_global,
    write_corpus_csv,
)
from .classify import (
    DEFAULT_MIN_TOP1,
    DEFAULT_PERIODS,
    DEFAULT_STABILITY,
    SPREAD_DENOMINATORS,
    assess,
    country_summary,
    filter_eligible,
    load_institution_table,
)
from .doublerank import (
    ANCHOR_CHOICES,
    DEFAULT_TOLERANCE,
    DEFAULT_WINDOW,
    double_rank_series,
    expected_local_rank,
    reference_for_group,
    upper_tail_deviation,
)
from .errors import (
    CiterankError,
    DomainError,
    DuplicateIdError,
    EmptyCorpusError,
    InsufficientDataError,
    RowParseError,
    ScalingError,
    SchemaError,
    UnknownGroupError,
)
from .percentile import global_thresholds, indicator_set
from .synth import SyntheticSpec, make_power_law_corpus
from .tails import (
    LogBinSpec,
    LognormalParams,
    bottom50_share,
    estimate_lognormal,
    expected_bin_weights,
    log_binned_histogram,
    scale_to_reference,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INSUFFICIENT_DATA = 4
EXIT_INTERNAL = 5

COMMANDS = ("indicators", "doublerank", "histogram", "classify", "summary", "synth")


@dataclass(frozen=True)
class RunConfig:
    """One resolved CLI invocation: the command plus its option values."""

    command: str
    options: dict

    @property
    def digest(self) -> str:
        blob = json.dumps({"command": self.command, **self.options}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(value, spec: str | None = None) -> str:
    if value is None:
        return "N/C"
    if spec and isinstance(value, float):
        return format(value, spec)
    return str(value)


def _meta_lines(config: RunConfig, thresholds: dict) -> list[str]:
    lines = [
        f"# citerank {__version__}",
        f"# command: {config.command}",
        f"# config_digest: {config.digest}",
        f"# tie_policy: {config.options.get('tie_policy', 'n/a')}",
        "# thresholds: " + " ".join(f"{k}={v}" for k, v in sorted(thresholds.items())),
    ]
    if config.options.get("seed") is not None:
        lines.append(f"# seed: {config.options['seed']}")
    if not config.options.get("no_timestamp"):
        lines.append(f"# generated: {datetime.now(timezone.utc).isoformat()}")
    return lines


def _emit(
    outdir: Path,
    stem: str,
    config: RunConfig,
    thresholds: dict,
    columns: list[str],
    rows: list[dict],
    formats: dict | None = None,
) -> Path:
    """Write one table as CSV or JSON with the metadata header."""
    formats = formats or {}
    outdir.mkdir(parents=True, exist_ok=True)
    if config.options.get("format") == "json":
        path = outdir / f"{stem}.json"
        meta = {
            "tool": f"citerank {__version__}",
            "command": config.command,
            "config_digest": config.digest,
            "tie_policy": config.options.get("tie_policy", "n/a"),
            "thresholds": thresholds,
        }
        if config.options.get("seed") is not None:
            meta["seed"] = config.options["seed"]
        if not config.options.get("no_timestamp"):
            meta["generated"] = datetime.now(timezone.utc).isoformat()
        payload = {"metadata": meta, "columns": columns, "rows": rows}
        path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    else:
        path = outdir / f"{stem}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for line in _meta_lines(config, thresholds):
                fh.write(line + "\n")
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(row[c], formats.get(c)) for c in columns) + "\n")
    return path


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


def _load_schema(args) -> CorpusSchema:
    if args.schema:
        data = json.loads(Path(args.schema).read_text())
        return CorpusSchema(
            id_column=data.get("id_column", "id"),
            citations_column=data.get("citations_column", "citations"),
            group_columns=tuple(data.get("group_columns", ["group"])),
            delimiter=data.get("delimiter", ","),
        )
    return CorpusSchema(
        id_column=args.id_col,
        citations_column=args.citations_col,
        group_columns=tuple(args.group_col) if args.group_col else ("group",),
        delimiter=args.delimiter,
    )


def _load_ranked(args) -> RankedCorpus:
    records = load_corpus(args.input, _load_schema(args))
    if not records:
        raise EmptyCorpusError(f"{args.input} contains no papers")
    return rank_global(records, normalize_policy(args.tie_policy))


def _cmd_indicators(args, config: RunConfig) -> list[Path]:
    corpus = _load_ranked(args)
    thresholds = global_thresholds(corpus)
    groups = list(args.group) if args.group else [GLOBAL, *corpus.groups]
    columns = [
        "group", "P", "P_top50", "P_top10", "P_top5", "P_top1",
        "R1", "R2", "R3", "bottom50_share", "flags",
    ]
    rows = []
    for group in groups:
        ps = indicator_set(corpus, group, thresholds=thresholds)
        rows.append(
            {
                "group": group,
                "P": ps.P,
                "P_top50": ps.p_top[50],
                "P_top10": ps.p_top[10],
                "P_top5": ps.p_top[5],
                "P_top1": ps.p_top[1],
                "R1": ps.R1,
                "R2": ps.R2,
                "R3": ps.R3,
                "bottom50_share": bottom50_share(ps),
                "flags": ";".join(ps.flags),
            }
        )
    fmt = {c: ".3f" for c in ("P_top50", "P_top10", "P_top5", "P_top1")}
    fmt.update({c: ".6f" for c in ("R1", "R2", "R3", "bottom50_share")})
    meta = {"percentiles": args.percentiles}
    return [_emit(Path(args.out), "indicators", config, meta, columns, rows, fmt)]


def _cmd_doublerank(args, config: RunConfig) -> list[Path]:
    corpus = _load_ranked(args)
    ps = indicator_set(corpus, args.group)
    ref = reference_for_group(corpus, ps, anchors=args.anchors)
    series = double_rank_series(corpus, args.group)
    report = upper_tail_deviation(series, ref, window=args.window, tolerance=args.tolerance)
    slug = _slug(args.group)
    columns = ["g", "l_actual", "l_reference"]
    rows = [
        {"g": g, "l_actual": l, "l_reference": float(expected_local_rank(ref, g))}
        for g, l in zip(series.global_ranks.tolist(), series.local_ranks.tolist())
    ]
    meta = {"anchors": args.anchors, "window": args.window, "tolerance": args.tolerance}
    fmt = {c: ".6g" for c in columns}
    paths = [_emit(Path(args.out), f"doublerank_{slug}", config, meta, columns, rows, fmt)]

    outdir = Path(args.out)
    report_path = outdir / f"deviation_{slug}.json"
    payload = {
        "metadata": {
            "tool": f"citerank {__version__}",
            "command": config.command,
            "config_digest": config.digest,
            "tie_policy": args.tie_policy,
            "thresholds": meta,
        },
        "reference": {
            "alpha": ref.alpha,
            "coeff": ref.coeff,
            "anchor_hi": list(ref.anchor_hi),
            "anchor_lo": list(ref.anchor_lo),
            "G": ref.G,
        },
        "report": dataclasses.asdict(report),
    }
    if not args.no_timestamp:
        payload["metadata"]["generated"] = datetime.now(timezone.utc).isoformat()
    report_path.write_text(json.dumps(payload, indent=2) + "\n")
    paths.append(report_path)
    return paths


def _cmd_histogram(args, config: RunConfig) -> list[Path]:
    corpus = _load_ranked(args)
    group = args.group or GLOBAL
    citations = corpus.group_citations(group)
    spec = LogBinSpec.default(max(int(corpus.citations.max()), 10))
    hist = log_binned_histogram(citations, spec)
    scaled_note = ""
    if args.scale_to:
        reference = log_binned_histogram(corpus.group_citations(args.scale_to), spec)
        hist = scale_to_reference(hist, reference, args.anchor_bin)
        scaled_note = f"{args.scale_to}@{args.anchor_bin}"
    expected = None
    if args.fit:
        params = estimate_lognormal(citations)
        expected = expected_bin_weights(spec, params) * hist.total
    columns = ["bin_label", "lower", "upper", "weight"]
    if expected is not None:
        columns.append("expected_weight")
    rows = []
    for i, (label, lo, hi) in enumerate(spec.bins()):
        row = {"bin_label": label, "lower": lo, "upper": hi, "weight": float(hist.weights[i])}
        if expected is not None:
            row["expected_weight"] = float(expected[i])
        rows.append(row)
    meta = {"group": group}
    if scaled_note:
        meta["scaled_to"] = scaled_note
    fmt = {"weight": ".6g", "expected_weight": ".6g"}
    return [_emit(Path(args.out), f"histogram_{_slug(group)}", config, meta, columns, rows, fmt)]


def _institution_pipeline(args):
    mapping = json.loads(Path(args.mapping).read_text())
    rows = load_institution_table(args.input, mapping)
    if args.field:
        rows = [r for r in rows if r.field == args.field]
    periods = args.periods.split(",") if args.periods else DEFAULT_PERIODS
    eligible = filter_eligible(rows, min_top1=args.min_top1, required_periods=periods)
    return assess(eligible, args.stability, args.denominator)


def _cmd_classify(args, config: RunConfig) -> list[Path]:
    assessments = _institution_pipeline(args)
    columns = [
        "institution", "country", "field", "periods_used",
        "R1", "R2", "R3", "spread", "type", "bottom50_mean", "bottom50_halfrange",
    ]
    rows = [
        {c: getattr(a, c) for c in columns}
        for a in sorted(assessments, key=lambda a: (a.field, a.country, a.institution))
    ]
    fmt = {c: ".6f" for c in ("R1", "R2", "R3", "spread", "bottom50_mean", "bottom50_halfrange")}
    meta = {
        "stability": args.stability,
        "denominator": args.denominator,
        "min_top1": args.min_top1,
    }
    return [_emit(Path(args.out), "assessments", config, meta, columns, rows, fmt)]


def _cmd_summary(args, config: RunConfig) -> list[Path]:
    assessments = _institution_pipeline(args)
    columns = ["country", "field", "type_a", "type_b", "type_c"]
    rows = [
        {
            "country": r.country,
            "field": r.field,
            "type_a": r.n_type_a,
            "type_b": r.n_type_b,
            "type_c": r.n_type_c,
        }
        for r in country_summary(assessments)
    ]
    meta = {
        "stability": args.stability,
        "denominator": args.denominator,
        "min_top1": args.min_top1,
    }
    return [_emit(Path(args.out), "country_summary", config, meta, columns, rows)]


def _cmd_synth(args, config: RunConfig) -> list[Path]:
    spec = SyntheticSpec(
        G=args.g,
        group_P=args.group_p,
        alpha=args.alpha,
        lognormal=LognormalParams(args.mu, args.sigma),
        seed=args.seed,
        group_label=args.group_label,
    )
    corpus = make_power_law_corpus(spec, policy=normalize_policy(args.tie_policy))
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "corpus.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        meta = {"G": args.g, "group_P": args.group_p, "alpha": args.alpha,
                "mu": args.mu, "sigma": args.sigma}
        for line in _meta_lines(config, meta):
            fh.write(line + "\n")
        write_corpus_csv(corpus, fh)
    return [path]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citerank",
        description="Tie-corrected percentile indicators, double-rank power laws, "
        "deviation detection, and institution typing for citation corpora.",
    )
    parser.add_argument("--version", action="version", version=f"citerank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--tie-policy", dest="tie_policy", choices=("mean", "min"),
                       default="mean")
        p.add_argument("--no-timestamp", dest="no_timestamp", action="store_true",
                       help="omit the generated-at line for byte-reproducible output")

    def add_corpus_input(p):
        p.add_argument("--input", required=True, help="corpus CSV path")
        p.add_argument("--schema", help="JSON schema mapping file")
        p.add_argument("--id-col", dest="id_col", default="id")
        p.add_argument("--citations-col", dest="citations_col", default="citations")
        p.add_argument("--group-col", dest="group_col", action="append",
                       help="group column (repeatable)")
        p.add_argument("--delimiter", default=",")

    p = sub.add_parser("indicators", help="P, P_top x%% and diagnostic ratios per group")
    add_corpus_input(p)
    p.add_argument("--group", action="append", help="restrict to these groups (repeatable)")
    p.add_argument("--percentiles", default="50,10,5,1",
                   help="indicator levels (fixed set; echoed in metadata)")
    add_common(p)
    p.set_defaults(func=_cmd_indicators)

    p = sub.add_parser("doublerank", help="double-rank series, reference curve, deviation")
    add_corpus_input(p)
    p.add_argument("--group", required=True)
    p.add_argument("--anchors", choices=ANCHOR_CHOICES, default="p:top10")
    p.add_argument("--window", type=float, default=DEFAULT_WINDOW)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    add_common(p)
    p.set_defaults(func=_cmd_doublerank)

    p = sub.add_parser("histogram", help="log-binned citation histogram")
    add_corpus_input(p)
    p.add_argument("--group", help="group to histogram (default: whole corpus)")
    p.add_argument("--fit", action="store_true",
                   help="attach lognormal expected weights")
    p.add_argument("--scale-to", dest="scale_to",
                   help="scale to this group's histogram at --anchor-bin")
    p.add_argument("--anchor-bin", dest="anchor_bin", default="32-49")
    add_common(p)
    p.set_defaults(func=_cmd_histogram)

    def add_institution_input(p):
        p.add_argument("--input", required=True, help="institution indicator CSV")
        p.add_argument("--mapping", required=True, help="JSON column-name mapping")
        p.add_argument("--field", help="restrict to one field value")
        p.add_argument("--periods", help="comma-separated required periods")
        p.add_argument("--min-top1", dest="min_top1", type=float, default=DEFAULT_MIN_TOP1)
        p.add_argument("--stability", type=float, default=DEFAULT_STABILITY)
        p.add_argument("--denominator", choices=SPREAD_DENOMINATORS, default="min")

    p = sub.add_parser("classify", help="type institutions A/B/C from a Leiden-style table")
    add_institution_input(p)
    add_common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("summary", help="per-country Type A/B/C counts")
    add_institution_input(p)
    add_common(p)
    p.set_defaults(func=_cmd_summary)

    p = sub.add_parser("synth", help="generate a power-law oracle corpus CSV")
    p.add_argument("--g", type=int, required=True, help="global corpus size")
    p.add_argument("--group-p", dest="group_p", type=int, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=3.0)
    p.add_argument("--sigma", type=float, default=1.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--group-label", dest="group_label", default="SYNTH")
    add_common(p)
    p.set_defaults(func=_cmd_synth)

    return parser


_DISPATCH = {
    "indicators": _cmd_indicators,
    "doublerank": _cmd_doublerank,
    "histogram": _cmd_histogram,
    "classify": _cmd_classify,
    "summary": _cmd_summary,
    "synth": _cmd_synth,
}


def run(config: RunConfig) -> int:
    """Execute one resolved command, print the emitted paths, return status."""
    args = argparse.Namespace(**config.options)
    paths = _DISPATCH[config.command](args, config)
    for path in paths:
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    options = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    config = RunConfig(args.command, options)
    try:
        return run(config)
    except (SchemaError, RowParseError, DuplicateIdError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"citerank: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InsufficientDataError, EmptyCorpusError, ScalingError) as exc:
        print(f"citerank: insufficient data: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT_DATA
    except (DomainError, UnknownGroupError) as exc:
        print(f"citerank: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CiterankError as exc:
        print(f"citerank: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
