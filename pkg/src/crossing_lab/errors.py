"""Exception types shared across the package."""


class CrossingLabError(Exception):
    """Base class for package errors."""


class InvalidSpecError(CrossingLabError, ValueError):
    """A kernel or config spec violates an invariant; `field` names the culprit."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DegenerateKernelError(CrossingLabError):
    """Residual kernel requested for alpha = 1, where it is undefined."""


class UnsupportedKernelError(CrossingLabError):
    """Operation requires kernel support bounded below (mirrored extraction)."""


class GridMismatchError(CrossingLabError, ValueError):
    """Two empirical laws live on different bin grids."""


class EmptyInputError(CrossingLabError, ValueError):
    """An operation received an empty sample set."""


class DomainMismatchError(CrossingLabError, ValueError):
    """Utility domain incompatible with the requested objective variant."""


class PathBudgetExceededError(CrossingLabError, RuntimeError):
    """Step cap hit before the requested number of cycles completed."""

    def __init__(self, completed: int, requested: int, steps: int):
        self.completed = completed
        self.requested = requested
        self.steps = steps
        super().__init__(
            f"step budget of {steps} exhausted after {completed}/{requested} cycles"
        )


class ConfigError(CrossingLabError, ValueError):
    """Experiment config failed validation; `field` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")
