"""Preventive-maintenance planning for systems of aging components."""

from .lifetime import DiscreteWeibull
from .oracle import SimConfig, SimReport, brute_force_expectation, brute_force_solve, simulate_policy
from .planner import (
    Horizon,
    VirtualCostTable,
    build_virtual_table,
    expected_plan_cost,
    optimal_next_pm,
    virtual_cost,
)
from .renewal import CostConstant, OneComponentEconomics, cost_constant, q
from .scenario import emit_results, load_bundled, load_scenario
from .system import (
    ComponentSpec,
    PlanSolution,
    SystemModel,
    SystemSpec,
    SystemState,
    expected_multi_plan_cost,
    multi_cost_constant,
    plan,
    pure_cm_monthly_cost,
    solve,
    system_failure_law,
)

__all__ = [
    "ComponentSpec",
    "CostConstant",
    "DiscreteWeibull",
    "Horizon",
    "OneComponentEconomics",
    "PlanSolution",
    "SimConfig",
    "SimReport",
    "SystemModel",
    "SystemSpec",
    "SystemState",
    "VirtualCostTable",
    "brute_force_expectation",
    "brute_force_solve",
    "build_virtual_table",
    "cost_constant",
    "emit_results",
    "expected_multi_plan_cost",
    "expected_plan_cost",
    "load_bundled",
    "load_scenario",
    "multi_cost_constant",
    "optimal_next_pm",
    "plan",
    "pure_cm_monthly_cost",
    "q",
    "simulate_policy",
    "solve",
    "system_failure_law",
    "virtual_cost",
]
