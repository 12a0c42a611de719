"""Toolkit exception classes.

Each class carries the process exit code the CLI uses for that failure
class, so scripted callers can tell malformed input apart from, say, a
checksum failure.
"""


class SpanforgeError(Exception):
    exit_code = 1


class FormatError(SpanforgeError):
    """Malformed input file: bad syntax or a record violating its format."""

    exit_code = 3


class SchemaError(SpanforgeError):
    """Well-formed file whose content fails validation against a corpus."""

    exit_code = 4


class IntegrityError(SpanforgeError):
    """Artifact checksum verification failed."""

    exit_code = 5


class ConfigError(SpanforgeError):
    """Invalid configuration or a missing prerequisite for an operation."""

    exit_code = 6


class StructuralError(SpanforgeError):
    """Structurally invalid annotation, e.g. a dependency cycle."""

    exit_code = 7
