"""Pipeline package"""
from .experiment import ExperimentConfig, ExperimentRunner, ExperimentResults, config_hash, write_trajectory_csv
from .sweep import SweepConfig, SweepRunner, SweepResults
from .verification import SUITES, VerifyConfig, VerificationRunner, enumeration_min_norm

__all__ = [
    'ExperimentConfig', 'ExperimentRunner', 'ExperimentResults', 'config_hash', 'write_trajectory_csv',
    'SweepConfig', 'SweepRunner', 'SweepResults',
    'SUITES', 'VerifyConfig', 'VerificationRunner', 'enumeration_min_norm',
]
