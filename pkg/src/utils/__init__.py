"""
Utility helpers shared across the laboratory
"""

from .logging import setup_logging
from .seeding import derive_seed

__all__ = ["setup_logging", "derive_seed"]
