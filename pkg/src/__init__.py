"""Biased Subgradient Lab"""
