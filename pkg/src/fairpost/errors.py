"""Exception types shared across the package.

The CLI maps these onto exit codes: config problems exit 2, data problems
exit 3, solver breakdowns exit 4.
"""


class ConfigError(Exception):
    """Invalid configuration, hyperparameters, or refused privacy-budget reuse."""


class DataError(Exception):
    """Malformed or missing input data (CSV schema, cells, empty files)."""


class SolverFailure(Exception):
    """The linear-program solver failed or returned an unusable solution."""


class UnknownGroupError(KeyError):
    """Prediction requested for a group that was not present at fit time."""
