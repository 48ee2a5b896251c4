"""
Edges module - exports all edge definitions
"""

from .point_edges import create_point_edges, route_after_cache, route_by_mode

__all__ = ["create_point_edges", "route_after_cache", "route_by_mode"]
