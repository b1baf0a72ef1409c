from .config import ExperimentConfig, InstanceSpec, MeasureSpec, ProbeSettings, CHECK_IDS
from .runner import ExperimentRunner, RunOutcome, run_experiment

__all__ = ['ExperimentConfig', 'InstanceSpec', 'MeasureSpec', 'ProbeSettings', 'CHECK_IDS', 'ExperimentRunner',
           'RunOutcome', 'run_experiment']
