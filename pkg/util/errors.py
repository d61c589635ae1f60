# Error kinds raised by the trust / safety / control code.
# All are ValueErrors, so callers that only care about "bad input" can catch ValueError.


class InvalidBoundsError(ValueError):
    """lo > hi in a saturation"""


class InvalidWeightsError(ValueError):
    """trait weights negative, wrong length, or not summing to 1"""


class DomainError(ValueError):
    """a score, confidence or trust value outside [0,1]"""


class OrderingError(ValueError):
    """observation steps not strictly increasing for a pedestrian"""


class DegenerateBboxError(ValueError):
    """bounding box with a zero (or negative) dimension"""


class ShapeError(ValueError):
    """mismatched vector lengths or counts"""


class ParameterError(ValueError):
    """parameter set violating its invariants"""


class ConfigError(ValueError):
    """scenario config that can't be turned into a valid ScenarioConfig"""


class MissingFieldError(ConfigError):
    def __init__(self, field_name: str, where: str = "scenario"):
        super().__init__(f"{where}: missing required field '{field_name}'")
        self.field_name = field_name
