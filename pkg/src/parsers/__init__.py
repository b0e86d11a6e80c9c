"""Parsers package"""
from .trajectory_parser import TrajectoryCSVParser, load_trajectory_csv

__all__ = ['TrajectoryCSVParser', 'load_trajectory_csv']
