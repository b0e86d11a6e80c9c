"""Polytope package"""
from .min_norm import (
    WolfeSolver,
    min_norm_of_vertices,
    min_norm_element,
    project_point,
    dist_origin,
    distance,
    hull_contains,
)

__all__ = [
    'WolfeSolver', 'min_norm_of_vertices', 'min_norm_element', 'project_point',
    'dist_origin', 'distance', 'hull_contains',
]
