"""Invariant-solution catalog and its verification."""
from .catalog import CASE_IDS, CATALOG, SolutionSpec, get_spec
from .quadrature import LinearFirstOrder, solve_linear_first_order
from .verify import (CaseReport, Solution, ansatz_consistency_check, build_solution,
                     closed_form_ode_check, full_pde_check, reduced_ode_residual,
                     reduction_check, verify_case)

__all__ = [
    "CASE_IDS", "CATALOG", "SolutionSpec", "get_spec", "LinearFirstOrder",
    "solve_linear_first_order", "CaseReport", "Solution", "ansatz_consistency_check",
    "build_solution", "closed_form_ode_check", "full_pde_check", "reduced_ode_residual",
    "reduction_check", "verify_case",
]
