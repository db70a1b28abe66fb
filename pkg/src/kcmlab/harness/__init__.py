"""Experiment configuration, runs, fits and CSV persistence."""
from .config import ExperimentConfig, load_config, parse_config
from .estimate import (EventEstimate, GeometryParams, ScalingEstimate, estimate_alpha,
                       estimate_event_prob)
from .io import read_tau_samples, write_tau_samples
from .run import RunResult, run_experiment, trial_seed
