"""Exception types shared across the engine."""


class SimulstreamError(Exception):
    """Base class for engine errors."""


class ConfigurationError(SimulstreamError, ValueError):
    """Invalid policy or adapter configuration."""


class StateError(SimulstreamError, RuntimeError):
    """Operation called in a state that forbids it (e.g. push after finish)."""


class ContractViolation(SimulstreamError):
    """An adapter returned data that breaks the adapter contract."""


class TraceError(SimulstreamError):
    """Base class for trace file problems."""


class TraceParseError(TraceError):
    """Malformed trace file; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TraceVersionError(TraceError):
    """Trace format version not supported by this reader."""


class TraceDesyncError(TraceError):
    """Replay requested an event the trace does not supply at the cursor."""
