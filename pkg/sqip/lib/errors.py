# Copyright (c) the sqip authors.
# All rights reserved.
#
# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from typing import List, Optional


class SqipError(Exception):
    """Base class for errors raised by sqip."""


class ParameterError(SqipError, ValueError):
    """An argument is outside its documented range."""


class ConstructionError(SqipError):
    """A coefficient functional could not be built."""

    def __init__(self, index: int, message: str):
        super().__init__(f"functional {index}: {message}")
        self.index = index


class NumericError(SqipError, ArithmeticError):
    """A kernel evaluation produced a non-finite value."""

    def __init__(self, message: str, s: Optional[float] = None, t: Optional[float] = None):
        if s is not None:
            message = f"{message} at (s={s!r}, t={t!r})"
        super().__init__(message)
        self.s = s
        self.t = t


class AssemblyError(NumericError):
    """A matrix or vector entry of a Newton system is not finite."""

    def __init__(self, message: str, i: int, j: Optional[int] = None):
        where = f"({i})" if j is None else f"({i}, {j})"
        super().__init__(f"{message} at entry {where}")
        self.i = i
        self.j = j


class SingularSystemError(SqipError, ArithmeticError):
    """Dense LU found a pivot that is numerically zero."""


class DivergenceError(SqipError):
    """Newton iteration did not meet its tolerance within max_iter."""

    def __init__(self, message: str, history: List[float]):
        super().__init__(message)
        self.history = list(history)


class ProblemError(SqipError):
    """A problem definition fails its self-consistency gate."""
