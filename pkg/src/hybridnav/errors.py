"""Exception types shared across modules."""


class HybridNavError(Exception):
    pass


class ZeroVector(HybridNavError, ValueError):
    pass


class DegeneratePlane(HybridNavError, ValueError):
    pass


class LimitViolation(HybridNavError, ValueError):
    pass


class OutOfBounds(HybridNavError, ValueError):
    pass


class ObstacleTooFast(HybridNavError, ValueError):
    pass


class NoPathFound(HybridNavError, RuntimeError):
    pass


class StartOrGoalBlocked(HybridNavError, ValueError):
    pass


class MissingHazardContext(HybridNavError, ValueError):
    pass


class MissingData(HybridNavError, FileNotFoundError):
    pass


class InvalidScenario(HybridNavError, ValueError):
    """Scenario failed validation. ``issues`` holds (field, message) pairs."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.issues))
