"""Command-line entry point: ``tweetatlas <subcommand> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 stage failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import stages
from .analytics import read_native_map
from .config import ConfigError, PipelineConfig, read_config_file
from .geo import GazetteerError, load_gazetteer, read_entries
from .ingest import RateLimitPolicy, replay_source
from .report import build_report

logger = logging.getLogger("tweetatlas")

EXIT_OK, EXIT_USAGE, EXIT_STAGE = 0, 1, 2

_DATA = Path(__file__).parent / "data"


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _stage(name, fn, *args, timings=None, **kwargs):
    t0 = time.perf_counter()
    try:
        result = fn(*args, **kwargs)
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        raise StageError(name, exc) from exc
    if timings is not None:
        timings[name] = round(time.perf_counter() - t0, 4)
    logger.info("stage %s done in %.2fs", name, time.perf_counter() - t0)
    return result


def _lines(cfg: PipelineConfig, seed=None):
    if cfg.input is not None:
        return replay_source(cfg.input), None
    from .polling import poll_source

    src = poll_source(cfg.endpoint, RateLimitPolicy.parse(cfg.rate, cfg.interval), cfg.duration, seed=seed)
    return src, src


def _gazetteer(cfg: PipelineConfig):
    base = load_gazetteer(cfg.gazetteer, cfg.fictional)
    if cfg.patch is None:
        return base, None
    return base.refine(read_entries(cfg.patch)), base


def _native_map(cfg: PipelineConfig):
    return read_native_map(cfg.native_map or _DATA / "native_languages.csv")


# ---- subcommands -------------------------------------------------------------

def cmd_ingest(args) -> int:
    cfg = PipelineConfig(rate=args.rate, interval=args.interval, duration=args.duration)
    cfg.update({"input": args.input, "endpoint": args.endpoint,
                "dedupe_memory_bound": args.dedupe_memory_bound})
    if (cfg.input is None) == (cfg.endpoint is None):
        raise UsageError("give exactly one of --input or --endpoint")
    try:
        RateLimitPolicy.parse(cfg.rate, cfg.interval)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lines, poller = _lines(cfg, args.seed)
    stats = _stage("ingest", stages.ingest_stage, lines, Path(args.output),
                   Path(args.stats) if args.stats else None, cfg.dedupe_memory_bound)
    if poller is not None:
        logger.info("polling: %s", poller.stats.to_dict())
    print(json.dumps(stats.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_resolve(args) -> int:
    cfg = PipelineConfig().update({"gazetteer": args.gazetteer, "patch": args.patch,
                                   "fictional": args.fictional})
    gaz, base = _stage("resolve", _gazetteer, cfg)
    metrics = _stage("resolve", stages.resolve_stage, Path(args.input), gaz, Path(args.output),
                     Path(args.unknowns) if args.unknowns else None,
                     Path(args.labels) if args.labels else None,
                     Path(args.metrics) if args.metrics else None, base)
    print(json.dumps(metrics.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_analyze(args) -> int:
    native = _stage("analyze", read_native_map, args.native_map or _DATA / "native_languages.csv")
    params = stages.AnalyzeParams(top_users=args.top_users, top_words=args.top_words)
    if params.top_users < 1 or params.top_words < 1:
        raise UsageError("--top-users and --top-words must be >= 1")
    _stage("analyze", stages.analyze_stage, Path(args.input), Path(args.out_dir), native, params)
    return EXIT_OK


def cmd_correlate(args) -> int:
    results = _stage("correlate", stages.correlate_stage, Path(args.counts),
                     Path(args.hdi) if args.hdi else None, Path(args.out),
                     args.classic_factor, args.max_rank)
    for r in results:
        print(f"{r.category}\t{'' if r.rs_prime is None else f'{r.rs_prime:.4f}'}\tn={r.n}\tm={r.m}")
    return EXIT_OK


def cmd_report(args) -> int:
    bundle = _stage("report", build_report, Path(args.dir))
    print(f"{len(bundle.manifest)} artifacts written to {args.dir}")
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    from .synth import generate_corpus

    n = generate_corpus(Path(args.output), args.lines, args.seed)
    print(f"{n} lines written to {args.output}")
    return EXIT_OK


def run_pipeline(cfg: PipelineConfig, dry_run: bool = False, seed: int | None = None):
    """ingest -> resolve -> analyze -> correlate -> report into ``cfg.out_dir``.

    Returns the report bundle, or None on a dry run (which only validates).
    """
    try:
        cfg.validate()
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    out = cfg.resolved_out_dir()
    if dry_run:
        return None
    out.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}

    lines, poller = _lines(cfg, seed)
    ingest_stats = _stage("ingest", stages.ingest_stage, lines, out / "clean.csv",
                          out / "ingest_stats.json", cfg.dedupe_memory_bound, timings=timings)
    gaz, base = _stage("load-gazetteer", _gazetteer, cfg, timings=timings)
    metrics = _stage("resolve", stages.resolve_stage, out / "clean.csv", gaz, out / "resolved.csv",
                     out / "unknowns.csv", cfg.labels, out / "resolver_metrics.json", base,
                     timings=timings)
    native = _stage("load-native-map", _native_map, cfg, timings=timings)
    params = stages.AnalyzeParams(top_users=cfg.top_users, top_words=cfg.top_words)
    _stage("analyze", stages.analyze_stage, out / "resolved.csv", out, native, params, timings=timings)
    _stage("correlate", stages.correlate_stage, out / "country_counts.csv", cfg.hdi, out,
           cfg.classic_factor, cfg.max_rank, timings=timings)
    bundle = _stage("report", build_report, out, cfg.echo(), timings=timings)

    log = {"stage_seconds": timings, "ingest": ingest_stats.to_dict(), "resolver": metrics.to_dict()}
    if poller is not None:
        log["polling"] = poller.stats.to_dict()
    stages.write_json(log, out / "run_log.json")
    return bundle


def cmd_run(args) -> int:
    cfg = PipelineConfig()
    try:
        if args.config:
            cfg.update(read_config_file(args.config))
        flags = {k: getattr(args, k) for k in PipelineConfig.keys() if hasattr(args, k)}
        if args.classic_factor:
            flags["classic_factor"] = True
        else:
            flags.pop("classic_factor", None)
        cfg.update(flags)
    except (ConfigError, OSError) as exc:
        raise UsageError(str(exc)) from None
    bundle = run_pipeline(cfg, dry_run=args.dry_run, seed=args.seed)
    if bundle is None:
        print(json.dumps({"valid": True, "config": cfg.echo(),
                          "out_dir": str(cfg.resolved_out_dir())}, sort_keys=True))
    else:
        print(f"{len(bundle.manifest)} report artifacts in {cfg.resolved_out_dir()}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tweetatlas", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="parse, filter and deduplicate raw tweet objects")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="JSON-lines replay file")
    src.add_argument("--endpoint", help="URL to poll")
    s.add_argument("--rate", default="450/15m", help="requests per window, e.g. 450/15m")
    s.add_argument("--interval", default="500-2000ms", help="gap between requests, e.g. 500-2000ms")
    s.add_argument("--duration", type=float, default=60.0, help="polling time in seconds")
    s.add_argument("--output", required=True)
    s.add_argument("--stats")
    s.add_argument("--dedupe-memory-bound", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, help="seed for the polling jitter")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("resolve", help="resolve user locations against a gazetteer")
    s.add_argument("--input", required=True)
    s.add_argument("--gazetteer", help="gazetteer CSV (default: bundled seed)")
    s.add_argument("--patch")
    s.add_argument("--fictional")
    s.add_argument("--output", required=True)
    s.add_argument("--unknowns")
    s.add_argument("--labels")
    s.add_argument("--metrics")
    s.set_defaults(func=cmd_resolve)

    s = sub.add_parser("analyze", help="country, handle, word and language aggregates")
    s.add_argument("--input", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--top-users", type=int, default=500)
    s.add_argument("--top-words", type=int, default=100)
    s.add_argument("--native-map")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("correlate", help="HDI rank vs tweet rank correlations")
    s.add_argument("--counts", required=True)
    s.add_argument("--hdi")
    s.add_argument("--out", required=True)
    s.add_argument("--classic-factor", action="store_true")
    s.add_argument("--max-rank", choices=("present", "all"), default="present")
    s.set_defaults(func=cmd_correlate)

    s = sub.add_parser("report", help="figure/table data files and manifest")
    s.add_argument("--dir", required=True)
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("run", help="run every stage end to end")
    s.add_argument("--config", help="key = value config file; flags override it")
    src = s.add_mutually_exclusive_group()
    src.add_argument("--input")
    src.add_argument("--endpoint")
    s.add_argument("--rate")
    s.add_argument("--interval")
    s.add_argument("--duration", type=float)
    s.add_argument("--gazetteer")
    s.add_argument("--patch")
    s.add_argument("--fictional")
    s.add_argument("--labels")
    s.add_argument("--native-map")
    s.add_argument("--hdi")
    s.add_argument("--top-users", type=int)
    s.add_argument("--top-words", type=int)
    s.add_argument("--out-dir")
    s.add_argument("--classic-factor", action="store_true")
    s.add_argument("--max-rank", choices=("present", "all"))
    s.add_argument("--dedupe-memory-bound", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--dry-run", action="store_true", help="validate the configuration only")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("gen-corpus", help="write a seeded synthetic JSON-lines corpus")
    s.add_argument("--output", required=True)
    s.add_argument("--lines", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=2019)
    s.set_defaults(func=cmd_gen_corpus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tweetatlas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"tweetatlas: error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except GazetteerError as exc:
        print(f"tweetatlas: error: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
