"""Exception types shared across the pipeline.

Each maps to one machine-parseable CLI error category (see cli.py).
"""


class SchemaError(Exception):
    """Input file does not match the expected schema (e.g. missing column)."""


class DataError(ValueError):
    """A data value violates its contract (bad label, empty text, ...)."""


class ConfigurationError(Exception):
    """A configuration value or combination is invalid."""


class CoverageError(Exception):
    """Predictions do not cover the required instance-id universe."""


class ParseError(ValueError):
    """A serialized artifact could not be parsed; message carries location."""


class ProviderError(Exception):
    """A completion provider call failed (network, auth, bad response)."""


class CacheMissError(Exception):
    """Replay-only completion requested a key absent from the cache."""

    def __init__(self, key: str):
        super().__init__(f"no cached response for key {key}")
        self.key = key


class TrainingError(Exception):
    """Training aborted (e.g. non-finite loss); message names the step."""
