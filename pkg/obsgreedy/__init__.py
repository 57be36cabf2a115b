from __future__ import absolute_import

from obsgreedy.model import (DimensionError, NumericalError, ModelSpec,
                             SensorSet, measurement_matrix)
from obsgreedy.kinetics import ReactionNetwork, network_model
from obsgreedy.networks import BUNDLED, REFERENCE_STATES
from obsgreedy.netfile import load_network, save_network
from obsgreedy.integrator import IrkConfig, simulate
from obsgreedy.sensitivity import propagate_sensitivities
from obsgreedy.gramian import (GramianAtoms, averaged_gramian_collection,
                               build_atoms, assemble)
from obsgreedy.selection import (Metric, greedy_select, exhaustive_select,
                                 random_select, metric_eval)
from obsgreedy.estimation import (EstimationProblem,
                                  estimate_initial_state)
from obsgreedy.experiments import (ExperimentConfig, load_experiment,
                                   run_experiment)

def main():
	"""Entry point of the obsgreedy command."""
	import sys
	from obsgreedy.cli import main as cli_main
	sys.exit(cli_main())
