"""Numerical checks of convergence and rate hypotheses, and the statistics
their proofs track along a trajectory."""

from recest.diagnostics.conditions import (
    Stability,
    additive_lambda,
    check_B1,
    check_B2,
    check_M_conditions,
    check_R_conditions,
    conditional_moments,
    drift_function,
    estimate_B_matrix,
    neg_term,
    r_condition_inputs,
)
from recest.diagnostics.monitors import (
    SupermartingaleReport,
    prop_A2_bound,
    prop_A2_sums,
    robbins_siegmund_monitor,
)
from recest.diagnostics.quadrature import MaxDepth, adaptive_simpson, quadrature
from recest.diagnostics.reports import ConditionReport, GridSpec, plateaus
from recest.diagnostics.traces import KTrace, NTrace, k_trace, ktrace_csv, script_N, script_n_trace

__all__ = [
    "ConditionReport",
    "GridSpec",
    "KTrace",
    "MaxDepth",
    "NTrace",
    "Stability",
    "SupermartingaleReport",
    "adaptive_simpson",
    "additive_lambda",
    "check_B1",
    "check_B2",
    "check_M_conditions",
    "check_R_conditions",
    "conditional_moments",
    "drift_function",
    "estimate_B_matrix",
    "k_trace",
    "ktrace_csv",
    "neg_term",
    "plateaus",
    "prop_A2_bound",
    "prop_A2_sums",
    "quadrature",
    "r_condition_inputs",
    "robbins_siegmund_monitor",
    "script_N",
    "script_n_trace",
]
