"""Experiment orchestration: datasets, BER sweeps, transfer runs, reports, CLI."""
from .config import ExperimentConfig, default_config, load_config, parse_config
from .dataset import Dataset, gen_dataset, read_dataset, write_dataset
from .report import emit_csv, emit_svg, parse_csv, read_csv
from .seeding import derive_seed
from .sweeps import (
    TransferReport,
    experiment_channel,
    run_classical_sweep,
    run_neural_sweep,
    run_transfer_experiment,
)
