"""Gaussian belief propagation with walk-sum diagnostics."""

from ._gbp import *  # noqa: F401,F403
from ._gbp import __doc__  # noqa: F401
