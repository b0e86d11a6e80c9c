"""Flow package"""
from .inclusion import integrate
from .interpolation import AffineInterpolator, interpolate, interpolation_defect, DefectReport
from .descent_checks import (
    weak_lyapunov_check,
    quantitative_estimate_check,
    stationarity_check,
    decrease_check,
    LyapunovReport,
    QuantitativeReport,
    StationarityReport,
    DecreaseReport,
)

__all__ = [
    'integrate', 'AffineInterpolator', 'interpolate', 'interpolation_defect', 'DefectReport',
    'weak_lyapunov_check', 'quantitative_estimate_check', 'stationarity_check', 'decrease_check',
    'LyapunovReport', 'QuantitativeReport', 'StationarityReport', 'DecreaseReport',
]
