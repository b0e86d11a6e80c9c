"""Models package"""
from .data_types import (
    Polytope,
    KLParams,
    MRParams,
    ErrorBoundParams,
    BiasModel,
    StepSchedule,
    Trajectory,
    Curve,
    FluctuationReport,
    SweepRow,
    SweepTable,
    CheckResult,
)

__all__ = [
    'Polytope', 'KLParams', 'MRParams', 'ErrorBoundParams', 'BiasModel',
    'StepSchedule', 'Trajectory', 'Curve', 'FluctuationReport', 'SweepRow',
    'SweepTable', 'CheckResult',
]
