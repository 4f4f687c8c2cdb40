from .bruteforce import policy_value_enumerated
from .compare import Suboptimality, suboptimality_report
from .exact import InfeasibleError, Limits, optimal_value, policy_value_exact
from .genie import genie_value
from .montecarlo import decision_logs, policy_value_mc
from .report import CSV_COLUMNS, ValueReport

__all__ = [
    "CSV_COLUMNS",
    "InfeasibleError",
    "Limits",
    "Suboptimality",
    "ValueReport",
    "decision_logs",
    "genie_value",
    "optimal_value",
    "policy_value_enumerated",
    "policy_value_exact",
    "policy_value_mc",
    "suboptimality_report",
]
