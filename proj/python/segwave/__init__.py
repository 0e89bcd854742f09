"""Segregated travelling waves in multi-phenotype cell populations."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
