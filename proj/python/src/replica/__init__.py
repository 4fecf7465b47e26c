"""Replica-method predictions for MAP and MMSE estimators, with a Monte Carlo harness."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
