"""Bridge from a live attention-based S2ST model to simulstream trace files."""

from .adapter import ModelAdapter, parse_aggregation
from .errors import AttentionHookError, ExporterError, ExportWriteError, ModelLoadError
from .export import ExportConfig, export_trace
from .model import ToyS2ST, load_model

__version__ = "0.1.0"

__all__ = [
    "AttentionHookError",
    "ExportConfig",
    "ExporterError",
    "ExportWriteError",
    "ModelAdapter",
    "ModelLoadError",
    "ToyS2ST",
    "export_trace",
    "load_model",
    "parse_aggregation",
]
