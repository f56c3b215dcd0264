"""Error taxonomy.

Everything derives from ``ValueError`` so callers that catch the builtin keep
working. ``kind`` is the stable token printed in the CLI's error line.
"""


class DidError(ValueError):
    kind = "error"


class InvalidInputError(DidError):
    kind = "invalid-input"


class DimensionMismatchError(InvalidInputError):
    kind = "dimension-mismatch"

    def __init__(self, expected: int, got: int, what: str = "vector"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has dimension {got}, expected {expected}")


class ScheduleError(DidError):
    kind = "schedule"


class CalibrationError(DidError):
    kind = "calibration"


class UndefinedMetricError(DidError):
    kind = "undefined-metric"


class ConfigError(DidError):
    kind = "config"


class MissingReconstructionError(DidError):
    kind = "missing-reconstruction"
