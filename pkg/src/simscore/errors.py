"""Exception hierarchy shared across the toolkit.

The CLI maps these onto its exit codes: ValidationError -> 2,
UndefinedMetricError / InstabilityError -> 3, LoadError -> 4.
"""


class SimscoreError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(SimscoreError):
    """Input data violates a documented contract (manifest row, config value, score range)."""


class LoadError(SimscoreError):
    """A referenced file could not be read."""


class ParseFailure(SimscoreError):
    """A fragment could not be parsed at all (empty input or unsupported language)."""

    def __init__(self, fragment_id, reason=""):
        self.fragment_id = fragment_id
        self.reason = reason
        msg = f"cannot parse fragment {fragment_id!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class CapacityError(SimscoreError):
    """Tree edit distance refused: a tree exceeds the configured node cap."""


class UndefinedMetricError(SimscoreError):
    """A ranking statistic is undefined on the given scope (single-class input)."""


class InstabilityError(SimscoreError):
    """Bootstrap resampling degenerated too often to produce a trustworthy interval."""
