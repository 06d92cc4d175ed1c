"""Exception types raised across the package."""


class QmlBenchError(Exception):
    """Base class for all package errors."""


class CapacityError(QmlBenchError, MemoryError):
    pass


class BindingError(QmlBenchError, ValueError):
    pass


class DimensionError(QmlBenchError, ValueError):
    pass


class QubitIndexError(QmlBenchError, IndexError):
    pass


class ParameterError(QmlBenchError, ValueError):
    pass


class DataError(QmlBenchError, ValueError):
    pass


class SchemaError(DataError):
    pass


class EncodingError(QmlBenchError, ValueError):
    pass


class KernelError(QmlBenchError, ValueError):
    pass


class TrainingError(QmlBenchError, RuntimeError):
    pass


class GenerationError(QmlBenchError, RuntimeError):
    pass


class ModelKindError(QmlBenchError, TypeError):
    pass


class ConfigError(QmlBenchError, ValueError):
    """Config validation failure; ``problems`` lists every issue found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
