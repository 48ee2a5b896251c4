"""
States module - exports all state definitions
"""

from .point_state import PointState

__all__ = ["PointState"]
