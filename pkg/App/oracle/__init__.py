from .sharpness import SharpnessOracle, SharpnessResult, SlackAssignment, pc_at_assignment, sharpness_check
from .simulation import (
    ChainSimulator,
    SimulationOutcome,
    empirical_causation_rate,
    empirical_pc,
    markov_check,
)
