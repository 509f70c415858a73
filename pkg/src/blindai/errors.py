"""Exception types shared across the package."""


class BlindAIError(Exception):
    pass


class InvalidArgument(BlindAIError, ValueError):
    pass


class ShapeError(BlindAIError, ValueError):
    def __init__(self, what, expected, actual):
        super().__init__(f"{what}: expected shape {tuple(expected)}, got {tuple(actual)}")
        self.expected = tuple(expected)
        self.actual = tuple(actual)


class StateError(BlindAIError, RuntimeError):
    pass


class ConfigError(BlindAIError, ValueError):
    pass
