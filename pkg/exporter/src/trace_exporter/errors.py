"""Exporter failure modes, kept distinct for callers."""


class ExporterError(Exception):
    """Base class."""


class ModelLoadError(ExporterError):
    """The requested model identifier cannot be resolved or built."""


class AttentionHookError(ExporterError):
    """The attention aggregation choice does not match the model's layout."""


class ExportWriteError(ExporterError):
    """The trace file (or its sidecars) could not be written."""
