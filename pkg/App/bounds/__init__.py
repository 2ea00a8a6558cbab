from .engine import BoundsResult, Method, evidence_bounds, simple_bounds, unobserved_bounds
from .extremal import ConstructionKind, ExtremalReport, Regime, construct, extremal_table, worst_case_mixed
