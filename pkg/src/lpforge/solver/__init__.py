"""Exact desk-scale MILP solving."""

from lpforge.solver.brute import brute_force_solve
from lpforge.solver.core import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    Solution,
    SolveConfig,
    Violation,
    check_assignment,
    compile_model,
    solve,
    solve_problem,
)

__all__ = [
    "INFEASIBLE", "ITERATION_LIMIT", "OPTIMAL", "UNBOUNDED", "Solution", "SolveConfig", "Violation",
    "brute_force_solve", "check_assignment", "compile_model", "solve", "solve_problem",
]
