"""Solver package"""
from .biased_subgradient import BiasOracle, select_subgradient, biased_oracle, run

__all__ = ['BiasOracle', 'select_subgradient', 'biased_oracle', 'run']
