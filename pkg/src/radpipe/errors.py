"""Shared exception types. CLI exit codes map onto these."""


class RadpipeError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(RadpipeError):
    """Invalid or missing configuration (CLI exit code 2)."""


class DependencyError(RadpipeError):
    """A required upstream artifact is missing (CLI exit code 3)."""

    def __init__(self, missing: str, produced_by: str):
        super().__init__(
            f"missing artifact {missing!r}; run the {produced_by!r} subcommand first"
        )
        self.missing = missing
        self.produced_by = produced_by


class DivergenceError(RadpipeError):
    """Training loss diverged (CLI exit code 4)."""


class IngestError(RadpipeError):
    """Input log file could not be ingested."""


class MetricError(RadpipeError):
    """A metric is undefined on the given input (e.g. no valid pairs)."""
