import os
import warnings


class GPPSWarnings(Warning):
    """gpps warning category.
    Raised for recoverable numerical and configuration anomalies: ignored
    parameters, renormalized dipole axes, halved gradient-flow steps, potentials
    failing the confinement check. Set the environment variable GPPS_WARNINGS
    to '0' to silence them.
    """

    pass


class NumericalAlarm(RuntimeError):
    """Base class for numerical alarms raised by solvers and mapped to CLI exit
    code 3."""

    pass


class BlowupSuspected(NumericalAlarm):
    """A non-finite state appeared after the peak density grew by more than the
    configured factor."""

    pass


class ResolutionAlarm(NumericalAlarm):
    """The high-frequency spectral tail of a state exceeded its tolerance."""

    pass


class ConvergenceError(NumericalAlarm):
    """An iterative solver hit its iteration cap before converging."""

    pass


def format_warning(msg, category, filename, lineno, line=None):
    """
    Format a warning the same way as the default formatter, but also include the
    category name in the output.
    """
    return f"{category.__name__}: {msg}\n"


warnings.formatwarning = format_warning

if os.getenv("GPPS_WARNINGS") == "0":
    warnings.simplefilter("ignore", GPPSWarnings)
else:
    warnings.simplefilter("always", GPPSWarnings)


def warn(message: str) -> None:
    warnings.warn(message, category=GPPSWarnings, stacklevel=3)
