"""Reconstruct ECG cycles from PPG through a ridge-regressed DCT mapping."""

from .config import PipelineConfig
from .evaluation import aggregate, pearson, profile_regression, rrmse, sweep_lx
from .io import ingest, write_session
from .preprocess import preprocess_session
from .regression import load_model, run_subject_dependent, save_model, train_ridge
from .signal_model import Session, TimeSeries, validate_session
from .synth import SynthConfig, generate

__all__ = [
    "PipelineConfig",
    "Session",
    "SynthConfig",
    "TimeSeries",
    "aggregate",
    "generate",
    "ingest",
    "load_model",
    "pearson",
    "preprocess_session",
    "profile_regression",
    "rrmse",
    "run_subject_dependent",
    "save_model",
    "sweep_lx",
    "train_ridge",
    "validate_session",
    "write_session",
]
