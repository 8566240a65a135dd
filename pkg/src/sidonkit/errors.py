"""Exception types shared across the package."""


class CapExceededError(ValueError):
    """A size cap was hit. ``best`` holds the best partial result, if any."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class HypothesisError(ValueError):
    """Input violates a theorem hypothesis; ``condition`` names which one."""

    def __init__(self, condition, message):
        super().__init__(f"{condition}: {message}")
        self.condition = condition
