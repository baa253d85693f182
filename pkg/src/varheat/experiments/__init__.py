from .consistency import ESTIMATOR_TARGETS, run_estimator_experiment
from .coupling import CouplingReport, run_coupling_experiment
from .rates import RATE_TARGETS, ExperimentParams, VariationPairReport, run_rate_experiment, run_variation_pair
from .report import McReport, RateSpec, compare_slopes
from .runner import ReplicateRunner

__all__ = [
    'CouplingReport', 'ESTIMATOR_TARGETS', 'ExperimentParams', 'McReport', 'RATE_TARGETS', 'RateSpec',
    'ReplicateRunner', 'VariationPairReport', 'compare_slopes', 'run_coupling_experiment',
    'run_estimator_experiment', 'run_rate_experiment', 'run_variation_pair',
]
