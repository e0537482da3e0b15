"""
Error types
Every failure the laboratory can report, each tagged with its CLI exit code.
"""

from typing import Optional


class LabError(Exception):
    """Base class for all laboratory errors"""

    exit_code = 1
    kind = "error"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": str(self), "exit_code": self.exit_code}


class ConfigError(LabError):
    """Invalid or missing configuration field"""

    exit_code = 2
    kind = "config"

    def __init__(self, message: str, field: Optional[str] = None,
                 source: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.source = source
        self.line = line
        location = ""
        if source:
            location = f" ({source}" + (f":{line}" if line else "") + ")"
        prefix = f"{field}: " if field else ""
        super().__init__(f"{prefix}{message}{location}")

    def to_dict(self) -> dict:
        payload = super().to_dict()
        payload.update({"field": self.field, "source": self.source, "line": self.line})
        return payload


class DomainError(LabError):
    """Operation called outside its mathematical domain"""

    exit_code = 3
    kind = "domain"


class UnsupportedModelError(DomainError):
    """Model has no solution theory (no local times, Upsilon infinite)"""

    kind = "unsupported_model"


class ClassificationIndeterminateError(DomainError):
    kind = "classification_indeterminate"


class SymbolEvaluationError(DomainError):
    """Custom Levy exponent returned a negative or NaN real part"""

    kind = "symbol_evaluation"


class AccuracyError(LabError):
    """Numerical procedure did not reach the requested tolerance"""

    exit_code = 4
    kind = "accuracy"

    def __init__(self, message: str, achieved: Optional[float] = None):
        self.achieved = achieved
        if achieved is not None:
            message = f"{message} (achieved error estimate {achieved:.3e})"
        super().__init__(message)


class ResolutionError(AccuracyError):
    kind = "resolution"


class StepSizeError(AccuracyError):
    kind = "step_size"


class BoundsConsistencyError(AccuracyError):
    """A proven two-sided inequality failed numerically"""

    kind = "bounds_consistency"


class BlowUpError(LabError):
    """Non-finite values produced while time stepping"""

    exit_code = 5
    kind = "blow_up"

    def __init__(self, message: str, step_index: Optional[int] = None):
        self.step_index = step_index
        if step_index is not None:
            message = f"{message} at step {step_index}"
        super().__init__(message)


class EnsembleAbortError(BlowUpError):
    """Too many paths in an ensemble blew up"""

    kind = "ensemble_abort"

    def __init__(self, message: str, blown_paths: int = 0, total_paths: int = 0):
        self.blown_paths = blown_paths
        self.total_paths = total_paths
        super().__init__(f"{message}: {blown_paths}/{total_paths} paths non-finite")
