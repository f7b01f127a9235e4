"""Networked collaboration on NK landscapes: simulation engine and network/project metrics."""

from ._accel import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
