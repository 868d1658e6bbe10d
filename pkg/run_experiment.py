import sys

from experiments.experiment_runner import ExperimentRunner
from utils.log_control import configure_logging

configure_logging()

config_path = sys.argv[1] if len(sys.argv) > 1 else "config/base_config.yaml"
runner = ExperimentRunner(config_path=config_path)
outcome = runner.run()

print("Experiment Completed:")
print(outcome.matrix.similarity.round(2))
print(outcome.summary())
