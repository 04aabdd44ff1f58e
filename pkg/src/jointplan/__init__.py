"""Joint expansion planning of coupled power distribution and water networks."""
from .io import read_instance, write_instance
from .model import JointNetwork, expansion_candidates
from .nlp import assemble, check_feasible
from .scenarios import budget_sweep, compare_joint_vs_independent, experiment1, experiment2
from .solver import Solution, SolverConfig, branch_and_bound, enumerate_oracle, independent_baseline
from .testcase import build_testcase
from .validate import validate

__version__ = "0.1.0"

__all__ = [
    "JointNetwork", "expansion_candidates", "read_instance", "write_instance", "validate", "assemble",
    "check_feasible", "SolverConfig", "Solution", "branch_and_bound", "enumerate_oracle",
    "independent_baseline", "build_testcase", "budget_sweep", "experiment1", "experiment2",
    "compare_joint_vs_independent",
]
