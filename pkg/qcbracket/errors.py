# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Exceptions raised by the library, and the exit codes the CLI maps them to.
"""

from __future__ import annotations

from enum import IntEnum


class ExitCode(IntEnum):
    """
    Process exit codes used by the command line front end.
    """

    SUCCESS = 0
    """The run finished, and every requested check passed."""
    IDENTITY_FAILURE = 1
    """At least one identity check exceeded its tolerance."""
    USAGE_ERROR = 2
    """Invalid arguments, invalid configuration or an unwritable path."""
    INSTABILITY = 3
    """A propagation produced non-finite values."""


class QCBracketError(Exception):
    """
    Base class for every error raised by this package.
    """


class ContextMismatchError(QCBracketError, ValueError):
    """
    Two symbols were combined while living in different variable contexts.
    """


class VariableError(QCBracketError, KeyError):
    """
    A phase variable is not part of the symbol's context.
    """

    def __str__(self) -> str:  # KeyError would quote the message
        return str(self.args[0]) if self.args else ""


class NyquistError(QCBracketError, ValueError):
    """
    A grid symbol's momentum box does not match the bandwidth of its grid.
    """


class BasisMismatchError(QCBracketError, ValueError):
    """
    An operator matrix is expressed in the wrong basis for the operation.
    """


class ShapeMismatchError(QCBracketError, ValueError):
    """
    Arrays, grids or states have incompatible shapes.
    """


class SymmetryError(QCBracketError, ValueError):
    """
    A matrix that must be symmetric (or Hermitian) is not.
    """


class FactorizationError(QCBracketError, ValueError):
    """
    A mixed density does not factor into a pure state times a classical point.
    """

    def __init__(self, purity: float, threshold: float) -> None:
        super().__init__(
            f"quantum purity {purity:.6g} is below the threshold {threshold:.6g}"
        )
        self.purity = purity
        """The purity Tr(D²)/Tr(D)² of the integrated density matrix."""
        self.threshold = threshold
        """The purity required for a mean-field reduction."""


class InstabilityError(QCBracketError, ArithmeticError):
    """
    A propagation step produced NaN or infinite values.
    """

    def __init__(self, step: int, time: float) -> None:
        super().__init__(f"non-finite state after step {step} (t = {time:.6g})")
        self.step = step
        """The index of the step that produced the non-finite state."""
        self.time = time
        """The simulation time reached by that step."""


class OscillatorError(QCBracketError, ValueError):
    """
    Invalid coupled-oscillator parameters, or a degenerate analytic state.
    """


class ConfigError(QCBracketError, ValueError):
    """
    A run configuration is missing, malformed or out of range.
    """
