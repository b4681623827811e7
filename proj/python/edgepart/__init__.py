"""Robust DNN partitioning and bandwidth/frequency allocation solver."""

from ._edgepart import *  # noqa: F401,F403
from ._edgepart import __version__  # noqa: F401
