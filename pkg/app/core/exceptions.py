from typing import Optional


class RadialSystemError(Exception):
    """Base error: a detail message plus the CLI exit code it maps to."""

    exit_code: int = 3

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "detail": self.detail,
            "exit_code": self.exit_code,
        }


# ---------------------------------------------------------------------
# CONFIG / HYPOTHESIS ERRORS (exit 2)
# ---------------------------------------------------------------------
class ConfigError(RadialSystemError):
    exit_code = 2


class DomainViolation(ConfigError):
    pass


class DeltaZero(ConfigError):
    pass


class NearDegenerate(ConfigError):
    pass


class DegenerateAlpha(ConfigError):
    pass


class DeltaNotPositive(ConfigError):
    pass


class NoSolutionRegime(ConfigError):
    pass


class RegimeMismatch(ConfigError):
    pass


# ---------------------------------------------------------------------
# SOLVER ERRORS (exit 3)
# ---------------------------------------------------------------------
class SolverError(RadialSystemError):
    exit_code = 3


class NonPositiveState(SolverError):
    pass


class StepUnderflow(SolverError):
    pass


class MonitorViolation(SolverError):
    def __init__(self, monitor: str, r: float, detail: Optional[str] = None):
        self.monitor = monitor
        self.r = r
        super().__init__(detail or f"Monitor {monitor} violated at r={r:.6g}")

    def to_dict(self) -> dict:
        data = super().to_dict()
        data.update({"monitor": self.monitor, "r": self.r})
        return data


class InsufficientSamples(SolverError):
    pass


class QuadratureBreakdown(SolverError):
    pass


class NoConvergence(SolverError):
    pass


class EmbeddingMismatch(SolverError):
    pass
