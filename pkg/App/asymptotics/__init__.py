from .homogeneous import (
    HomogeneousProfile,
    HomogeneousRow,
    LimitReport,
    MonotonicityReport,
    limits,
    monotonicity_report,
    profile,
    profile_table,
)
from .planner import PlanRow, PlanTable, plan_decomposition, plan_from_step, plan_single_observation
