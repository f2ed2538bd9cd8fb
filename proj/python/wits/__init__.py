"""Kernel two-sample tests with learned witness functions."""

from ._core import *  # noqa: F401,F403
from ._core import DataError, InvalidArgument, Kernel, NumericalError, WitnessModel

__all__ = [name for name in dir() if not name.startswith("_")]
