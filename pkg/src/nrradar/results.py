"""Serialization of drop records, summaries and ROC tables."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path

from .montecarlo import DropRecord, MetricsSummary

RECORD_COLUMNS = (
    "drop_id", "scenario", "h_uav_m", "target_present", "los", "detected", "par_db",
    "beam_index", "true_x_m", "true_y_m", "true_z_m", "est_x_m", "est_y_m", "est_z_m",
    "range_m", "position_error_m", "one_way_pl_db", "shadow_fading_db", "pl_branch",
    "status", "config_hash",
)
ROC_COLUMNS = ("eta_db", "p_fa", "p_d", "config_hash")


class SchemaError(ValueError):
    pass


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return repr(float(v))


def _flag(v) -> str:
    return "" if v is None else str(int(bool(v)))


def record_row(r: DropRecord, cfg_hash: str) -> list[str]:
    true = r.true_position_m or (None, None, None)
    est = r.estimated_position_m or (None, None, None)
    return [str(r.drop_id), r.scenario, _num(r.h_uav_m), _flag(r.target_present), _flag(r.los),
            _flag(r.detected), _num(r.par_db), str(r.beam_index),
            *(_num(v) for v in true), *(_num(v) for v in est),
            _num(r.range_m), _num(r.position_error_m), _num(r.one_way_pl_db),
            _num(r.shadow_fading_db), r.pl_branch, r.status, cfg_hash]


def write_records(path, records, cfg_hash: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow(record_row(r, cfg_hash))


def _opt_float(s: str):
    return None if s == "" else float(s)


def _opt_flag(s: str):
    return None if s == "" else bool(int(s))


def read_records(path) -> tuple[list[DropRecord], set[str]]:
    """Parse a records.csv; returns the records and the config hashes seen."""
    with open(path, newline="") as f:
        rows = csv.reader(f)
        header = next(rows, None)
        if header is None or tuple(header) != RECORD_COLUMNS:
            raise SchemaError(f"{path}: header does not match the records schema")
        out, hashes = [], set()
        for n, row in enumerate(rows, start=2):
            if len(row) != len(RECORD_COLUMNS):
                raise SchemaError(f"{path}:{n}: expected {len(RECORD_COLUMNS)} fields, got {len(row)}")
            d = dict(zip(RECORD_COLUMNS, row))
            try:
                true = tuple(float(d[k]) for k in ("true_x_m", "true_y_m", "true_z_m")) if d["true_x_m"] else None
                est = tuple(float(d[k]) for k in ("est_x_m", "est_y_m", "est_z_m")) if d["est_x_m"] else None
                out.append(DropRecord(
                    drop_id=int(d["drop_id"]), scenario=d["scenario"], h_uav_m=float(d["h_uav_m"]),
                    target_present=bool(int(d["target_present"])), true_position_m=true,
                    los=_opt_flag(d["los"]), detected=bool(int(d["detected"])),
                    par_db=float(d["par_db"]), beam_index=int(d["beam_index"]),
                    range_m=_opt_float(d["range_m"]), estimated_position_m=est,
                    position_error_m=_opt_float(d["position_error_m"]),
                    one_way_pl_db=_opt_float(d["one_way_pl_db"]),
                    shadow_fading_db=_opt_float(d["shadow_fading_db"]),
                    pl_branch=d["pl_branch"], status=d["status"]))
            except ValueError as exc:
                raise SchemaError(f"{path}:{n}: {exc}") from exc
            hashes.add(d["config_hash"])
    return out, hashes


def summary_to_dict(summary: MetricsSummary) -> dict:
    groups = []
    for g in summary.groups:
        d = asdict(g)
        d["error_cdf_m"] = d.pop("error_cdf")
        groups.append(d)
    return {"groups": groups,
            "roc": [{"eta_db": e, "p_fa": pf, "p_d": pd} for e, pf, pd in summary.roc]}


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_roc(path, rows, cfg_hash: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(ROC_COLUMNS)
        for eta, pfa, pd in rows:
            w.writerow([repr(float(eta)), repr(float(pfa)), repr(float(pd)), cfg_hash])


def format_summary(summary: MetricsSummary) -> str:
    """Plain-text table: Pmd and error quantiles per scenario and height."""
    fmt = lambda v, spec: "-" if v is None else format(v, spec)
    lines = [f"{'scenario':<8} {'h_uav_m':>7} {'n':>6} {'p_md':>7} {'p_fa':>7} "
             f"{'err_p50_m':>9} {'err_p90_m':>9} {'err_p99_m':>9}"]
    for g in summary.groups:
        q = g.error_quantiles_m
        lines.append(f"{g.scenario:<8} {g.h_uav_m:>7.1f} {g.n_target + g.n_absent:>6d} "
                     f"{fmt(g.p_md, '.4f'):>7} {fmt(g.p_fa, '.4f'):>7} {fmt(q['p50'], '.3f'):>9} "
                     f"{fmt(q['p90'], '.3f'):>9} {fmt(q['p99'], '.3f'):>9}")
    return "\n".join(lines)
