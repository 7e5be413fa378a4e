"""Monostatic 5G NR radar simulator using PRS waveforms in aerial urban channels."""

__version__ = "0.1.0"

from .antenna import ArrayGeometry, Codebook, Direction, dft_codebook, steering_vector
from .chain import ChainOptions, DetectionResult, process_drop
from .channel import UMA, UMI, Scenario, TargetState, build_channel
from .montecarlo import RunConfig, aggregate, link_budget, roc_sweep, run_campaign
from .prs import PrsConfig, build_prs_grid, gold_sequence

__all__ = [
    "ArrayGeometry", "Codebook", "Direction", "dft_codebook", "steering_vector",
    "ChainOptions", "DetectionResult", "process_drop",
    "UMA", "UMI", "Scenario", "TargetState", "build_channel",
    "RunConfig", "aggregate", "link_budget", "roc_sweep", "run_campaign",
    "PrsConfig", "build_prs_grid", "gold_sequence",
]
