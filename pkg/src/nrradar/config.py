"""JSON run configuration: parsing with defaults, validation, resolved echo and hashing."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

from .antenna import ArrayGeometry
from .chain import ChainOptions
from .channel import ClutterParams, Scenario
from .montecarlo import CodebookSpec, RunConfig
from .prs import PrsConfig


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


# section -> allowed keys. Angles are in degrees in the file.
_SECTIONS = {
    "scenario": ("kind", "bs_height_m", "isd_m", "carrier_hz"),
    "prs": ("n_rb", "scs_khz", "comb_k", "l_prs", "n_prs", "t_prs_s", "seq_id",
            "symbol_start", "re_offsets"),
    "array": ("n_rows", "n_cols", "spacing_wavelengths", "tilt_deg", "boresight_az_deg"),
    "codebook": ("n_az", "n_el", "az_span_deg", "el_span_deg"),
    "clutter": ("subpaths", "angle_spread_deg", "ds_median_s", "ds_log10_std", "min_distance_m"),
    "chain": ("sweep_repetitions", "sweep_mode", "zero_pad", "profile", "chunk_beams"),
}
_TOP = ("uav_heights_m", "drops_per_config", "with_target", "eta_db", "eirp_dbm",
        "noise_figure_db", "n_rp", "rcs_dbsm", "radial_velocity_mps", "cell_shape",
        "sector_width_deg", "min_distance_m", "master_seed", "workers")


def config_to_dict(cfg: RunConfig) -> dict:
    """Fully resolved, JSON-serializable form; ``config_from_dict`` inverts it."""
    sc, p, a, cb, cl, ch = cfg.scenario, cfg.prs, cfg.array, cfg.codebook, cfg.clutter, cfg.chain
    return {
        "scenario": {"kind": sc.kind, "bs_height_m": sc.bs_height_m, "isd_m": sc.isd_m,
                     "carrier_hz": sc.carrier_hz},
        "prs": {"n_rb": p.n_rb, "scs_khz": p.scs_khz, "comb_k": p.comb_k, "l_prs": p.l_prs,
                "n_prs": p.n_prs, "t_prs_s": p.t_prs, "seq_id": p.seq_id,
                "symbol_start": p.symbol_start,
                "re_offsets": list(p.re_offsets) if p.re_offsets is not None else None},
        "array": {"n_rows": a.n_rows, "n_cols": a.n_cols,
                  "spacing_wavelengths": a.spacing_wavelengths,
                  "tilt_deg": math.degrees(a.tilt_rad),
                  "boresight_az_deg": math.degrees(a.boresight_az_rad)},
        "codebook": {"n_az": cb.n_az, "n_el": cb.n_el, "az_span_deg": list(cb.az_span_deg),
                     "el_span_deg": list(cb.el_span_deg)},
        "clutter": {"subpaths": cl.subpaths, "angle_spread_deg": cl.angle_spread_deg,
                    "ds_median_s": cl.ds_median_s, "ds_log10_std": cl.ds_log10_std,
                    "min_distance_m": cl.min_distance_m},
        "chain": {"sweep_repetitions": ch.sweep_repetitions, "sweep_mode": ch.sweep_mode,
                  "zero_pad": ch.zero_pad, "profile": ch.profile, "chunk_beams": ch.chunk_beams},
        "uav_heights_m": list(cfg.uav_heights_m),
        "drops_per_config": cfg.drops_per_config,
        "with_target": cfg.with_target,
        "eta_db": cfg.eta_db,
        "eirp_dbm": cfg.eirp_dbm,
        "noise_figure_db": cfg.noise_figure_db,
        "n_rp": cfg.n_rp,
        "rcs_dbsm": cfg.rcs_dbsm,
        "radial_velocity_mps": cfg.radial_velocity_mps,
        "cell_shape": cfg.cell_shape,
        "sector_width_deg": cfg.sector_width_deg,
        "min_distance_m": cfg.min_distance_m,
        "master_seed": cfg.master_seed,
        "workers": cfg.workers,
    }


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where or 'config'}: expected a JSON object")
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"unknown key {where + '.' if where else ''}{k}")


def config_from_dict(data: dict) -> RunConfig:
    """Build a RunConfig from a (possibly partial) dict; missing keys take defaults."""
    _check_keys(data, _TOP + tuple(_SECTIONS), "")
    base = config_to_dict(RunConfig())
    merged = {}
    for key, default in base.items():
        if key in _SECTIONS:
            sec = data.get(key, {})
            _check_keys(sec, _SECTIONS[key], key)
            merged[key] = {**default, **sec}
        else:
            merged[key] = data.get(key, default)
    # scenario table defaults depend on the kind, so only pass what the file set
    sc_in = data.get("scenario", {})
    current = None
    try:
        current = "scenario"
        sc = Scenario(kind=merged["scenario"]["kind"],
                      bs_height_m=sc_in.get("bs_height_m"), isd_m=sc_in.get("isd_m"),
                      carrier_hz=float(merged["scenario"]["carrier_hz"]))
        current = "prs"
        p = merged["prs"]
        prs = PrsConfig(n_rb=int(p["n_rb"]), scs_khz=float(p["scs_khz"]), comb_k=int(p["comb_k"]),
                        l_prs=int(p["l_prs"]), n_prs=int(p["n_prs"]), t_prs=float(p["t_prs_s"]),
                        seq_id=int(p["seq_id"]), carrier_hz=sc.carrier_hz,
                        symbol_start=int(p["symbol_start"]),
                        re_offsets=tuple(p["re_offsets"]) if p["re_offsets"] is not None else None)
        current = "array"
        a = merged["array"]
        array = ArrayGeometry(int(a["n_rows"]), int(a["n_cols"]), float(a["spacing_wavelengths"]),
                              math.radians(a["tilt_deg"]), math.radians(a["boresight_az_deg"]))
        current = "codebook"
        c = merged["codebook"]
        if len(c["az_span_deg"]) != 2 or len(c["el_span_deg"]) != 2:
            raise ValueError("spans need exactly two values")
        codebook = CodebookSpec(int(c["n_az"]), int(c["n_el"]),
                                tuple(float(v) for v in c["az_span_deg"]),
                                tuple(float(v) for v in c["el_span_deg"]))
        if codebook.n_az < 1 or codebook.n_el < 1:
            raise ValueError("n_az and n_el must be >= 1")
        if not -90 <= codebook.el_span_deg[0] <= codebook.el_span_deg[1] <= 90:
            raise ValueError("el_span_deg must be an ordered pair within [-90, 90]")
        if codebook.az_span_deg[0] > codebook.az_span_deg[1]:
            raise ValueError("az_span_deg must be ordered")
        current = "clutter"
        cl = merged["clutter"]
        clutter = ClutterParams(int(cl["subpaths"]), float(cl["angle_spread_deg"]),
                                None if cl["ds_median_s"] is None else float(cl["ds_median_s"]),
                                float(cl["ds_log10_std"]), float(cl["min_distance_m"]))
        current = "chain"
        ch = merged["chain"]
        chain = ChainOptions(sweep_repetitions=int(ch["sweep_repetitions"]),
                             sweep_mode=str(ch["sweep_mode"]), zero_pad=int(ch["zero_pad"]),
                             profile=str(ch["profile"]), chunk_beams=int(ch["chunk_beams"]))
        current = None
        cfg = RunConfig(
            scenario=sc, uav_heights_m=tuple(merged["uav_heights_m"]),
            drops_per_config=int(merged["drops_per_config"]),
            with_target=bool(merged["with_target"]), prs=prs, array=array, codebook=codebook,
            clutter=clutter, chain=chain, eta_db=float(merged["eta_db"]),
            eirp_dbm=float(merged["eirp_dbm"]), noise_figure_db=float(merged["noise_figure_db"]),
            n_rp=int(merged["n_rp"]), rcs_dbsm=float(merged["rcs_dbsm"]),
            radial_velocity_mps=float(merged["radial_velocity_mps"]),
            cell_shape=str(merged["cell_shape"]), sector_width_deg=float(merged["sector_width_deg"]),
            min_distance_m=float(merged["min_distance_m"]), master_seed=int(merged["master_seed"]),
            workers=int(merged["workers"]))
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"{current or 'config'}: {exc}") from exc
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text()  # OSError propagates: an I/O failure, not a config error
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON parse error at line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(data)


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the canonical resolved config (first 16 hex digits)."""
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
