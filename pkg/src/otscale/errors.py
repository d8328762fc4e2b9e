"""Exception hierarchy for otscale.

The CLI maps these onto exit codes: invalid arguments and schedules
exit 1 (usage, same as parser errors), bad data and files exit 2,
numerical failures exit 3.
"""


class OtscaleError(Exception):
    """Base class for all otscale errors."""


class InvalidArgumentError(OtscaleError, ValueError):
    """A parameter is out of its documented range or inconsistent."""


class InvalidDataError(OtscaleError, ValueError):
    """Input data violates an invariant (non-finite values, negative distances, ...)."""


class InfeasibleMeasuresError(InvalidDataError):
    """Transport mass vectors do not carry equal total mass."""


class InvalidScheduleError(InvalidArgumentError):
    """A coarsening schedule is not strictly decreasing or out of range."""


class InvalidGraphError(InvalidArgumentError):
    """A graph violates the contract of an operation (e.g. isolated node)."""


class NumericalFailureError(OtscaleError, RuntimeError):
    """An iterative numerical routine failed to converge."""


class FileFormatError(InvalidDataError):
    """A file exists but its content does not match the documented format."""
