"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operand shapes do not chain."""


class ContractError(ValueError):
    """A precondition of an operation was violated."""


class OptimizerError(RuntimeError):
    """Raised by the optimizer, e.g. on a non-finite gradient."""


class GradCheckError(RuntimeError):
    """The function under a finite-difference check returned a non-finite value."""


class GenerationError(RuntimeError):
    """A dataset generator could not satisfy its constraints."""


class DatasetParseError(ValueError):
    """A dataset line could not be parsed."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class ConfigError(ValueError):
    """Invalid run configuration."""


class CheckpointError(ValueError):
    """A checkpoint is malformed or incompatible with the data."""


class TrainingError(RuntimeError):
    """Training diverged (non-finite loss)."""

    def __init__(self, epoch: int, step: int, message: str):
        super().__init__(f"epoch {epoch}, step {step}: {message}")
        self.epoch = epoch
        self.step = step
