from .experiment import ExperimentResult, ExperimentRunner, QueryOutcome, RowCol, run_experiment
