"""Command-line entry point: `coauthnet <subcommand> ...`."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import date
from pathlib import Path

from .config import ConfigError, PipelineConfig, parse_cutoffs

logger = logging.getLogger("coauthnet")

EXIT_OK, EXIT_VALIDATION, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # report bad flags through main() instead of exiting from inside argparse
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from exc


def cmd_ingest(args) -> int:
    from .ingest import filter_by_date, load_corpus, write_records

    parsed = load_corpus(args.metadata, args.topics)
    for lineno, reason in parsed.skipped:
        logger.warning("line %d skipped: %s", lineno, reason)
    for w in parsed.warnings:
        logger.warning("%s", w)
    records = parsed.records
    if args.date_from or args.date_to:
        if not records:
            raise ValueError("no records to filter")
        lo = args.date_from or min(r.date for r in records)
        hi = args.date_to or max(r.date for r in records)
        if lo > hi:
            raise ConfigError(f"--from {lo} is after --to {hi}")
        records = filter_by_date(records, lo, hi)
    write_records(records, args.out)
    print(f"{len(records)} records written to {args.out} ({len(parsed.skipped)} lines skipped)")
    return EXIT_OK


def cmd_disambiguate(args) -> int:
    from .disambig import DisambigConfig, disambiguate, load_pinyin, load_variants, write_audit, write_mapping
    from .ingest import read_records

    cfg = DisambigConfig(args.sim, args.pinyin_sim, args.western_sim, args.jaccard,
                         args.coauthor_weight, args.max_cluster, args.min_papers)
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    records = read_records(args.input)
    res = disambiguate(records, cfg, load_variants(args.variants), load_pinyin(args.pinyin))
    write_mapping(res.mapping, args.out_map)
    if args.audit:
        write_audit(res.audit, args.audit)
    n_raw = len(res.mapping)
    n_prof = len({p.canonical_id for p in res.mapping.values()})
    print(f"{n_raw} raw names -> {n_prof} profiles ({len(res.unparseable)} unparseable)")
    return EXIT_OK


def cmd_build(args) -> int:
    from .disambig import read_mapping
    from .ingest import read_records
    from .netbuild import build_all, write_networks

    nets = build_all(read_records(args.records), read_mapping(args.map))
    write_networks(nets, args.out_dir, graphml=args.graphml)
    print(f"{len(nets)} topic networks written to {args.out_dir}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    from .metrics import compute_all, write_metrics
    from .netbuild import read_networks

    if args.robust_trials < 1 or args.sample_threshold < 1:
        raise ConfigError("--robust-trials and --sample-threshold must be positive")
    nets = read_networks(args.networks)
    vecs = [compute_all(nets[t], args.seed, args.robust_trials, args.sample_threshold) for t in sorted(nets)]
    write_metrics(vecs, args.out)
    print(f"metrics for {len(vecs)} topics written to {args.out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    from .metrics import read_metrics
    from .pipeline import jsonable, write_json
    from .report import render_report
    from .stats import analyze

    cutoffs = parse_cutoffs(args.cutoffs) if args.cutoffs else ()
    PipelineConfig(cutoff=args.cutoff, alpha=args.alpha, bootstrap=args.bootstrap,
                   cutoffs=cutoffs, seed=args.seed).validate()
    report = analyze(read_metrics(args.metrics), args.cutoff, args.alpha, args.bootstrap, args.seed, cutoffs)
    text = render_report(jsonable(report))
    if args.out:
        write_json(report, args.out)
        Path(args.out).with_suffix(".txt").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args) -> int:
    from .pipeline import run_pipeline

    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    cfg = cfg.with_overrides(
        metadata=args.metadata, topics=args.topics, output=args.out_dir, seed=args.seed,
        threads=args.threads, bootstrap=args.bootstrap, cutoff=args.cutoff,
    ).validate()
    if args.save_config:
        cfg.save(args.save_config)
    run_pipeline(cfg, resume=not args.no_resume)
    print(f"pipeline complete; outputs in {cfg.output}")
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synth import SyntheticSpec, generate_synthetic

    spec = SyntheticSpec(
        mode=args.mode, n_topics=args.n_topics, min_authors=args.min_authors, max_authors=args.max_authors,
        communities=args.communities, bridge_papers=args.bridges, core_fraction=args.core_fraction,
        n_identities=args.identities, trap_pairs=args.traps, seed=args.seed,
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    paths = generate_synthetic(spec, args.out_dir)
    for role, p in paths.items():
        print(f"{role}: {p}")
    return EXIT_OK


def cmd_report(args) -> int:
    from .report import render_report

    with open(args.input, encoding="utf-8") as fh:
        report = json.load(fh)
    text = render_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="coauthnet", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="parse metadata and topic assignments")
    s.add_argument("--metadata", required=True)
    s.add_argument("--topics")
    s.add_argument("--from", dest="date_from", type=_date)
    s.add_argument("--to", dest="date_to", type=_date)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("disambiguate", help="resolve raw author strings to profiles")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out-map", required=True)
    s.add_argument("--audit", help="optional merge audit log (JSONL)")
    s.add_argument("--sim", type=float, default=0.95)
    s.add_argument("--pinyin-sim", type=float, default=0.92)
    s.add_argument("--western-sim", type=float, default=0.87)
    s.add_argument("--jaccard", type=float, default=0.5)
    s.add_argument("--coauthor-weight", type=float, default=0.6)
    s.add_argument("--max-cluster", type=int, default=50)
    s.add_argument("--min-papers", type=int, default=2)
    s.add_argument("--variants", help="name,variant file replacing the built-in diminutive list")
    s.add_argument("--pinyin", help="syllable file replacing the built-in pinyin list")
    s.set_defaults(func=cmd_disambiguate)

    s = sub.add_parser("build-networks", help="build per-topic co-authorship networks")
    s.add_argument("--records", required=True)
    s.add_argument("--map", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--graphml", action="store_true")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("metrics", help="compute the ten structural metrics")
    s.add_argument("--networks", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--robust-trials", type=int, default=25)
    s.add_argument("--sample-threshold", type=int, default=200)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("analyze", help="popularity comparison and size-controlled regression")
    s.add_argument("--metrics", required=True)
    s.add_argument("--cutoff", type=float, default=0.20)
    s.add_argument("--alpha", type=float, default=0.005)
    s.add_argument("--bootstrap", type=int, default=10000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--cutoffs", default="0.15,0.20,0.25,0.30")
    s.add_argument("--out", help="report JSON path; a .txt rendering is written beside it")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("run", help="full pipeline from a config file")
    s.add_argument("--config")
    s.add_argument("--metadata")
    s.add_argument("--topics")
    s.add_argument("--out-dir")
    s.add_argument("--seed", type=int)
    s.add_argument("--cutoff", type=float)
    s.add_argument("--bootstrap", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--no-resume", action="store_true", help="ignore an existing manifest")
    s.add_argument("--save-config", help="write the effective config here")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    s.add_argument("--mode", required=True, choices=("planted-modular", "core-periphery", "dichotomy", "name-corpus"))
    s.add_argument("--out-dir", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n-topics", type=int, default=100)
    s.add_argument("--min-authors", type=int, default=30)
    s.add_argument("--max-authors", type=int, default=80)
    s.add_argument("--communities", type=int, default=6)
    s.add_argument("--bridges", type=int, default=2)
    s.add_argument("--core-fraction", type=float, default=0.35)
    s.add_argument("--identities", type=int, default=1000)
    s.add_argument("--traps", type=int, default=50)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("report", help="render a report JSON as text tables")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    from .ingest import IngestError
    from .pipeline import DataError, StageError
    from .stats import SingularDesignError

    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA if exc.data else EXIT_INTERNAL
    except (IngestError, DataError, SingularDesignError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover
        logger.exception("internal error")
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
