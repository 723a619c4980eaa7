"""Error types shared across the toolkit.

ConfigError maps to CLI exit code 2, DataError to exit code 3.
"""


class PipelineError(Exception):
    """Base class for svpipe errors."""


class ConfigError(PipelineError):
    """Invalid configuration: bad keys, values, or shapes requested by the user."""


class DataError(PipelineError):
    """Invalid or degenerate data: unusable audio, labels, embeddings, or files."""
