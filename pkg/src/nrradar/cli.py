"""Command-line entry point: ``run``, ``roc`` and ``summarize``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .config import ConfigError, config_hash, dump_config, load_config
from .montecarlo import aggregate, link_budget, roc_sweep, run_campaign
from .results import (SchemaError, format_summary, read_records, summary_to_dict, write_json,
                      write_records, write_roc)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("nrradar")


class OutputError(OSError):
    pass


def _prepare_out(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _resolve(args):
    cfg = load_config(args.config)
    over = {}
    if getattr(args, "seed", None) is not None:
        over["master_seed"] = args.seed
    if getattr(args, "drops", None) is not None:
        over["drops_per_config"] = args.drops
    if getattr(args, "workers", None) is not None:
        over["workers"] = args.workers
    if over:
        try:
            cfg = replace(cfg, **over)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return cfg


def _metadata(cfg, cfg_hash, started, wall):
    tx_dbm, noise_std = link_budget(cfg)
    return {
        "tool_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "config_hash": cfg_hash,
        "master_seed": cfg.master_seed,
        "timestamp_utc": started,
        "wall_clock_s": round(wall, 3),
        "link_budget": {
            "tx_power_dbm": tx_dbm,
            "noise_std": noise_std,
            "noise_figure_db": cfg.noise_figure_db,
            "eirp_dbm": cfg.eirp_dbm,
            "eirp_conversion": "tx power = EIRP - 10*log10(N), array factor only",
        },
    }


def _progress(done, total):
    if done == total or done % max(1, total // 20) == 0:
        log.info("%d/%d drops", done, total)


def _write(out, name, fn, *a):
    try:
        fn(out / name, *a)
    except OSError as exc:
        raise OutputError(f"cannot write {out / name}: {exc}") from exc


def cmd_run(args) -> int:
    cfg = _resolve(args)
    out = _prepare_out(args.out)
    h = config_hash(cfg)
    _write(out, "config.resolved.json", lambda p: p.write_text(dump_config(cfg)))
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    records = run_campaign(cfg, progress=_progress)
    summary = aggregate(records)
    meta = _metadata(cfg, h, started, time.perf_counter() - t0)
    _write(out, "records.csv", write_records, records, h)
    _write(out, "summary.json", write_json, {"metadata": meta, **summary_to_dict(summary)})
    print(format_summary(summary))
    print(f"wrote {len(records)} records to {out}")
    return EXIT_OK


def cmd_roc(args) -> int:
    cfg = _resolve(args)
    if args.eta_steps < 1:
        raise ConfigError("--eta-steps must be >= 1")
    if args.eta_max < args.eta_min:
        raise ConfigError("--eta-max must not be below --eta-min")
    out = _prepare_out(args.out)
    h = config_hash(cfg)
    _write(out, "config.resolved.json", lambda p: p.write_text(dump_config(cfg)))
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    with_t = run_campaign(replace(cfg, with_target=True), progress=_progress)
    without = run_campaign(replace(cfg, with_target=False), progress=_progress)
    grid = np.linspace(args.eta_min, args.eta_max, args.eta_steps)
    rows = roc_sweep(with_t, without, grid)
    summary = aggregate(with_t + without)
    summary.roc = rows
    meta = _metadata(cfg, h, started, time.perf_counter() - t0)
    _write(out, "roc.csv", write_roc, rows, h)
    _write(out, "records.csv", write_records, with_t + without, h)
    _write(out, "summary.json", write_json, {"metadata": meta, **summary_to_dict(summary)})
    for eta, pfa, pd in rows:
        print(f"eta_db={eta:7.3f}  p_fa={pfa:.4f}  p_d={pd:.4f}")
    return EXIT_OK


def cmd_summarize(args) -> int:
    records, hashes = [], set()
    for path in args.files:
        try:
            recs, hs = read_records(path)
        except OSError as exc:
            raise OutputError(f"cannot read {path}: {exc}") from exc
        records += recs
        hashes |= hs
    if not records:
        raise SchemaError("no records in the given files")
    summary = aggregate(records)
    print(format_summary(summary))
    if args.out:
        doc = {"config_hashes": sorted(hashes), "sources": [str(p) for p in args.files],
               **summary_to_dict(summary)}
        try:
            write_json(args.out, doc)
        except OSError as exc:
            raise OutputError(f"cannot write {args.out}: {exc}") from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nrradar", description="5G NR PRS radar Monte Carlo simulator")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a campaign and write records, summary and resolved config")
    r.add_argument("config", help="JSON run configuration")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, help="override master_seed")
    r.add_argument("--drops", type=int, help="override drops_per_config")
    r.add_argument("--workers", type=int, help="parallel worker processes")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("roc", help="paired target/no-target campaigns and a threshold sweep")
    c.add_argument("config")
    c.add_argument("--eta-min", type=float, default=0.0)
    c.add_argument("--eta-max", type=float, default=8.0)
    c.add_argument("--eta-steps", type=int, default=33)
    c.add_argument("--out", required=True)
    c.add_argument("--seed", type=int)
    c.add_argument("--drops", type=int)
    c.add_argument("--workers", type=int)
    c.set_defaults(func=cmd_roc)

    s = sub.add_parser("summarize", help="merge records.csv files and print the summary tables")
    s.add_argument("files", nargs="+")
    s.add_argument("--out", help="also write the merged summary as JSON")
    s.set_defaults(func=cmd_summarize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, SchemaError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
