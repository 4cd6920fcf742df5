"""Configured experiments, their outputs and the command-line interface."""
from .config import PRESETS, ExperimentConfig, geometric_ladder, load_config
from .experiments import (
    Corpus,
    load_corpus,
    run_cfib,
    run_growth,
    run_mi_sequential,
    run_mi_structural,
    run_pcfg_study,
    run_synthetic,
    run_tree_stats,
)
from .results import ExperimentResult

__all__ = [
    "PRESETS",
    "Corpus",
    "ExperimentConfig",
    "ExperimentResult",
    "geometric_ladder",
    "load_config",
    "load_corpus",
    "run_cfib",
    "run_growth",
    "run_mi_sequential",
    "run_mi_structural",
    "run_pcfg_study",
    "run_synthetic",
    "run_tree_stats",
]
