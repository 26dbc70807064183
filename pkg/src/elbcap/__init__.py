"""Public-investment multipliers at and away from the effective lower bound.

A New Keynesian model in which government investment accumulates into
productive public capital is recast as a family of Markov chains sharing one
(L+3)-state transition matrix. The package solves the chain states by
backward induction for traps of arbitrary expected length with stochastic or
deterministic exit, evaluates every closed-form impact/PDV multiplier and
threshold, and ships brute-force oracles (Monte Carlo simulation, equation
residuals, one-shot stacked solves) that verify the solutions independently.
"""

from .model import (
    ConfigError,
    ParameterError,
    RegimeMatrices,
    SteadyState,
    StructuralParams,
    derive_composites,
    load_config,
    parse_config,
    regime_matrices,
    steady_state,
)
from .chain import (
    ChainSpec,
    IrfPath,
    build_chain,
    build_transition,
    capital_states,
    exogenous_states,
    expectation,
    expectation_path,
    geometric_ratio,
    irf,
)
from .solver import (
    AssumptionError,
    BindingReport,
    BindingViolationError,
    EquilibriumSolution,
    ImpactLoading,
    SingularSystemError,
    calibrate_xi,
    deterministic_xi_range,
    impact_closed_form,
    interior_xi,
    q_limit,
    solve_elb,
    solve_terminal,
    verify_binding,
)
from .analytics import (
    EigenDiagnostics,
    ImpactMultipliers,
    MultiplierReport,
    PdvReport,
    ThetaReport,
    VariantError,
    decompose_multiplier,
    eigen_diagnostics,
    impact_multiplier_normal,
    impact_multiplier_trap,
    long_trap_thresholds,
    multiplier_report,
    pdv_multiplier,
    scenario_loading,
    sweep_L,
    theta_values,
    threshold_eps_I,
)
from .oracle import (
    ResidualReport,
    SimulationResult,
    finite_diff,
    residual_check,
    simulate_chain,
    stacked_solve,
)

__version__ = "0.1.0"
