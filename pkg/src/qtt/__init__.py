"""
🌟 QTT - Quantitative Type Theory Toolchain
A small dependently typed language with multiplicities, holes, erasure and session-typed channels

Version: 0.3.0
License: MIT
"""

__version__ = "0.3.0"
__license__ = "MIT"

from .loader import Loader, Program
from .utils import Settings, setup_logging

__all__ = ["Loader", "Program", "Settings", "setup_logging"]
