"""Catalog package"""
from .functions import (
    CatalogFunction,
    CATALOG,
    get_function,
    list_functions,
    describe_catalog,
    evaluate,
    clarke,
    enlarged_clarke,
    dist_to_crit,
)
from .critical_sets import (
    crit_eps_grid,
    vcrit_eps,
    dist_value_to_vcrit_eps,
    check_crit_eps_bounded,
)
from .certify import kl_mr_certificate, growth_exponent_check

__all__ = [
    'CatalogFunction', 'CATALOG', 'get_function', 'list_functions', 'describe_catalog',
    'evaluate', 'clarke', 'enlarged_clarke', 'dist_to_crit',
    'crit_eps_grid', 'vcrit_eps', 'dist_value_to_vcrit_eps', 'check_crit_eps_bounded',
    'kl_mr_certificate', 'growth_exponent_check',
]
