"""Scheduling URLLC packets over pre-scheduled eMBB traffic by superposition
or puncturing, with matching-based pairing and contract-based pricing."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
