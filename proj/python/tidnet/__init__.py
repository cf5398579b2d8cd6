"""Temporal Bayesian network construction and model selection toolkit.

Thin wrapper over the C++ core; see the project README for the file formats
and the CLI.
"""

from tidnet._core import *  # noqa: F401,F403
from tidnet._core import __version__  # noqa: F401
