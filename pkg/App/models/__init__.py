from .transition import TransitionMatrix, compose, from_conditionals, from_matrix, homogeneous_step, measures, power
from .chain import Decomposition, EvidencePattern, Mark, normalize_labels, segments
from .counterfactual import PotentialOutcomeTable, pc_at, response_distribution, table_at, xi_bounds
