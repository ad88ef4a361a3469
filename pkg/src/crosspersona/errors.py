"""Exception hierarchy. Each family maps onto one CLI exit code."""


class CrossPersonaError(Exception):
    exit_code = 1


class ConfigError(CrossPersonaError):
    exit_code = 2


class DataError(CrossPersonaError):
    exit_code = 3


class StructuralError(DataError):
    """An internal invariant was broken (e.g. overlapping interest sets)."""


class SchemaVersionError(DataError):
    pass


class ProviderError(CrossPersonaError):
    exit_code = 4


class ReplayMissError(ProviderError):
    def __init__(self, request_hash: str):
        super().__init__(f"replay cache has no record for request {request_hash}")
        self.request_hash = request_hash


class InferenceError(ProviderError):
    def __init__(self, message: str, run_index: int | None = None):
        super().__init__(message)
        self.run_index = run_index
