"""Analysis package"""
from .fluctuation import (
    RhoResult,
    rho_exponent,
    rho_for,
    fluctuation,
    SweepCell,
    sweep_cells,
    execute_cells,
    fit_sweep,
    sweep,
    VanishingStepReport,
    vanishing_step_check,
    MonotoneReport,
    monotone_radius_check,
)
from .convex import (
    ConvexBoundReport,
    convex_bound,
    error_bound_check,
    numeric_lemma_check,
    numeric_lemma_battery,
)
from .descent import (
    EkelandResult,
    ekeland_witness,
    RepulsionReport,
    level_repulsion_check,
    QuasiDescentReport,
    quasi_descent_check,
    EventualLevelReport,
    eventual_level_check,
)

__all__ = [
    'RhoResult', 'rho_exponent', 'rho_for', 'fluctuation', 'SweepCell', 'sweep_cells',
    'execute_cells', 'fit_sweep', 'sweep', 'VanishingStepReport', 'vanishing_step_check',
    'MonotoneReport', 'monotone_radius_check',
    'ConvexBoundReport', 'convex_bound', 'error_bound_check', 'numeric_lemma_check',
    'numeric_lemma_battery',
    'EkelandResult', 'ekeland_witness', 'RepulsionReport', 'level_repulsion_check',
    'QuasiDescentReport', 'quasi_descent_check', 'EventualLevelReport', 'eventual_level_check',
]
