"""Equilibrium Markov states by backward induction, with binding verification.

The solve runs backwards through the chain's states: the recovery state
Y_{L+2} is pinned down by the active-policy fixed point (I - qA)^{-1} B k,
the trap-exit state Y_{L+1} by a 2x2 solve under either exit convention,
and the perfect-foresight states Y_L .. Y_1 by direct recursion with the
floor-regime matrices. Exit conventions:

  stochastic    the floor still binds in state L+1, so the trap lasts
                T = L+1 periods in expectations and ends when the chain
                jumps to the recovery state;
  deterministic the floor stops binding in state L+1, so T = L and the
                trap ends at a known date.

The demand shock xi1 that makes the floor bind for exactly T periods is
recovered in closed form: with g1 ~ 0 the exit-state block is affine in
xi1, so marginal binding (pi at the boundary state equal to log(beta)/
phi_pi) pins xi1 uniquely under stochastic exit and pins the lower end of
an admissible interval under deterministic exit.

Every solve re-verifies the guessed binding pattern state by state instead
of trusting it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, build_chain, geometric_ratio
from .model import RegimeMatrices, StructuralParams, regime_matrices

EXIT_MODES = ("stochastic", "deterministic")

#: absolute tolerance for binding-pattern margins on pi
BINDING_TOL = 1e-10


class SingularSystemError(ArithmeticError):
    """A required (I - r*A) style inverse does not exist."""


class BindingViolationError(RuntimeError):
    """The guessed binding pattern fails verification.

    Attributes:
        state_index: first violating state (1-based, as in the chain).
    """

    def __init__(self, message: str, state_index: int):
        super().__init__(message)
        self.state_index = state_index


class AssumptionError(ArithmeticError):
    """An eigenvalue-stability assumption required by a limit result fails."""


@dataclass(frozen=True)
class EquilibriumSolution:
    """Solved consumption/inflation Markov states plus the shock configuration."""

    params: StructuralParams
    spec: ChainSpec
    Y: np.ndarray  # 2 x (L+3); last column exactly zero
    xi1: float
    g1: float
    T: int
    exit_mode: str
    binding_flags: np.ndarray  # bool, length L+3

    @property
    def L(self) -> int:
        return self.spec.L


@dataclass(frozen=True)
class BindingReport:
    """Per-state floor margins pi_l - log(beta)/phi_pi.

    Binding states need margin <= tol, non-binding states margin >= -tol;
    boundary_margin is the margin at the last binding state (zero, to
    tolerance, for a solution calibrated to marginal binding).
    """

    margins: np.ndarray
    binding_flags: np.ndarray
    ok: bool
    first_violation: int | None
    boundary_margin: float | None
    tol: float


def solve_terminal(params: StructuralParams, k_L2: float) -> np.ndarray:
    """Recovery-state block Y_{L+2} = (I - qA)^{-1} B k_{L+2}."""
    nm = regime_matrices(params, "normal")
    M = np.eye(2) - params.q * nm.A
    if abs(np.linalg.det(M)) < 1e-14:
        raise SingularSystemError(
            "I - q*A is singular: with an active rule (phi_pi > 1) the "
            "Blanchard-Kahn condition keeps the eigenvalues of q*A inside "
            "the unit circle, so this indicates inadmissible parameters"
        )
    return np.linalg.solve(M, nm.B * k_L2)


def _recurse(params: StructuralParams, L: int, g1: float, xi1: float,
             exit_mode: str, include_constants: bool = True) -> np.ndarray:
    """Backward pass producing the 2 x (L+3) state matrix for a guessed pattern.

    With include_constants=False the floor constant E is dropped, so the
    output is the exact derivative of the states with respect to the shocks
    (the system is affine for a fixed binding pattern).
    """
    if exit_mode not in EXIT_MODES:
        raise ValueError(f"exit_mode={exit_mode!r} not one of {EXIT_MODES}")
    spec = build_chain(params, L, g1, xi1)
    nm = regime_matrices(params, "normal")
    em = regime_matrices(params, "elb")
    I = np.eye(2)

    Y = np.zeros((2, L + 3))
    Y[:, L + 2] = 0.0
    Y[:, L + 1] = solve_terminal(params, spec.k_states[L + 1])

    exit_rm = em if exit_mode == "stochastic" else nm
    e_term = exit_rm.E_red if include_constants else np.zeros(2)
    M = I - params.p * exit_rm.A
    if abs(np.linalg.det(M)) < 1e-14:
        raise SingularSystemError(
            f"I - p*A is singular in the {exit_rm.regime} regime (p at the "
            "reciprocal of an eigenvalue of A)"
        )
    rhs = ((1.0 - params.p) * exit_rm.A @ Y[:, L + 1]
           + exit_rm.B * spec.k_states[L]
           + exit_rm.C_g * spec.g_states[L]
           + exit_rm.C_xi * spec.xi_states[L]
           + e_term)
    Y[:, L] = np.linalg.solve(M, rhs)

    e_bind = em.E_red if include_constants else np.zeros(2)
    for ell in range(L - 1, -1, -1):  # perfect-foresight states L..1, all at the floor
        Y[:, ell] = (em.A @ Y[:, ell + 1]
                     + em.B * spec.k_states[ell]
                     + em.C_g * spec.g_states[ell]
                     + em.C_xi * spec.xi_states[ell]
                     + e_bind)
    return Y


def _binding_flags(L: int, exit_mode: str) -> np.ndarray:
    T = L + 1 if exit_mode == "stochastic" else L
    flags = np.zeros(L + 3, dtype=bool)
    flags[:T] = True
    return flags


def verify_binding(solution: EquilibriumSolution, tol: float = BINDING_TOL) -> BindingReport:
    """Check the floor pattern against the solved inflation states (report-only)."""
    params = solution.params
    bound = params.pi_floor
    margins = solution.Y[1] - bound
    flags = solution.binding_flags
    first_violation = None
    for idx in range(solution.L + 3):
        bad = margins[idx] > tol if flags[idx] else margins[idx] < -tol
        if bad:
            first_violation = idx + 1
            break
    boundary = float(margins[solution.T - 1]) if solution.T >= 1 else None
    return BindingReport(
        margins=margins, binding_flags=flags, ok=first_violation is None,
        first_violation=first_violation, boundary_margin=boundary, tol=tol,
    )


def solve_elb(params: StructuralParams, L: int, g1: float, xi1: float,
              exit_mode: str = "stochastic") -> EquilibriumSolution:
    """Solve for the Markov states of a trap of guessed length, and verify it.

    Raises BindingViolationError (carrying the first offending state) if the
    floor pattern implied by (L, exit_mode) is inconsistent with the shocks.
    """
    Y = _recurse(params, L, g1, xi1, exit_mode)
    spec = build_chain(params, L, g1, xi1)
    flags = _binding_flags(L, exit_mode)
    T = int(flags.sum())
    solution = EquilibriumSolution(
        params=params, spec=spec, Y=Y, xi1=xi1, g1=g1, T=T,
        exit_mode=exit_mode, binding_flags=flags,
    )
    report = verify_binding(solution)
    if not report.ok:
        idx = report.first_violation
        state_kind = "binding" if flags[idx - 1] else "non-binding"
        raise BindingViolationError(
            f"floor pattern violated at state {idx} ({state_kind}): "
            f"margin {report.margins[idx - 1]:.3e} (L={L}, exit={exit_mode}, "
            f"g1={g1!r}, xi1={xi1!r})",
            state_index=idx,
        )
    return solution


def calibrate_xi(params: StructuralParams, L: int, exit_mode: str = "stochastic",
                 interior: bool = False) -> float:
    """Demand shock making the floor bind for exactly T periods (g1 treated as 0).

    Stochastic exit: unique xi1 with pi_{L+1} = log(beta)/phi_pi, from the
    affine exit-state solve p**L * [(I-pA*)^{-1} C_xi*]_2 * xi1 +
    [(I-pA*)^{-1} E*]_2 = log(beta)/phi_pi.

    Deterministic exit: the admissible xi1 is an interval; the default picks
    the lower end (marginal binding at state L), `interior=True` picks the
    interval midpoint. L = 0 returns 0.0 (no binding states).
    """
    if exit_mode == "stochastic":
        em = regime_matrices(params, "elb")
        M = np.eye(2) - params.p * em.A
        theta2 = np.linalg.solve(M, em.C_xi)
        e_tilde = np.linalg.solve(M, em.E_red)
        coef = params.p**L * theta2[1]
        if abs(coef) < 1e-14:
            raise SingularSystemError(
                "xi1 coefficient p**L * [(I-pA*)^{-1} C_xi]_2 is numerically "
                "zero; the exit-state inflation does not respond to xi1"
            )
        return float((params.pi_floor - e_tilde[1]) / coef)
    if exit_mode == "deterministic":
        if L == 0:
            return 0.0
        lo, hi = deterministic_xi_range(params, L)
        return 0.5 * (lo + hi) if interior else lo
    raise ValueError(f"exit_mode={exit_mode!r} not one of {EXIT_MODES}")


def _affine_root(params: StructuralParams, L: int, exit_mode: str,
                 state_col: int) -> float:
    """xi1 making pi at a given state column hit the floor (exact: map is affine)."""
    bound = params.pi_floor
    pi0 = _recurse(params, L, 0.0, 0.0, exit_mode)[1, state_col]
    pi1 = _recurse(params, L, 0.0, 1.0, exit_mode)[1, state_col]
    slope = pi1 - pi0
    if abs(slope) < 1e-14:
        raise SingularSystemError(
            f"inflation at state {state_col + 1} does not respond to xi1"
        )
    return (bound - pi0) / slope


def deterministic_xi_range(params: StructuralParams, L: int) -> tuple[float, float]:
    """Admissible [lo, hi) for xi1 under deterministic exit with T = L >= 1.

    At lo the floor binds marginally in state L; at hi inflation in the
    non-binding state L+1 would reach the floor, extending the trap.
    """
    if L < 1:
        raise ValueError("deterministic exit needs L >= 1 for a binding spell")
    lo = _affine_root(params, L, "deterministic", L - 1)
    hi = _affine_root(params, L, "deterministic", L)
    if not hi > lo:
        raise BindingViolationError(
            f"empty admissible xi1 interval for deterministic exit (lo={lo!r}, "
            f"hi={hi!r}): no xi1 makes the floor bind for exactly T={L} periods",
            state_index=L + 1,
        )
    return lo, hi


def interior_xi(params: StructuralParams, L: int, exit_mode: str = "stochastic",
                nudge: float = 0.05) -> float:
    """A xi1 strictly inside the admissible region of the guessed pattern.

    The calibrated xi1 leaves the boundary state exactly marginal, so any
    finite g1 (or finite-difference step) can flip its regime. Stochastic
    exit nudges xi1 by `nudge`*|xi1| in the direction that pushes boundary
    inflation strictly below the floor; deterministic exit returns the
    midpoint of the admissible interval.
    """
    if exit_mode == "deterministic":
        if L == 0:
            return 0.0
        lo, hi = deterministic_xi_range(params, L)
        return 0.5 * (lo + hi)
    xi = calibrate_xi(params, L, "stochastic")
    em = regime_matrices(params, "elb")
    slope = float(np.linalg.solve(np.eye(2) - params.p * em.A, em.C_xi)[1])
    return xi - math.copysign(nudge * abs(xi), slope)


@dataclass(frozen=True)
class ImpactLoading:
    """Policy loading of the impact states Y_1, split into additive pieces.

    waste is the public-consumption part; q_deter collects the within-trap
    perfect-foresight capital terms; q_exit the capital terms propagated
    back from the exit state through (A*)^L. waste + q_deter + q_exit times
    g1, plus terms independent of policy, reproduces Y_1.
    """

    waste: np.ndarray
    q_deter: np.ndarray
    q_exit: np.ndarray

    @property
    def q_total(self) -> np.ndarray:
        return self.q_deter + self.q_exit

    @property
    def total(self) -> np.ndarray:
        return self.waste + self.q_deter + self.q_exit


def _check_unit_eigenvalue(M: np.ndarray, r: float, label: str) -> None:
    eigs = np.linalg.eigvals(r * M)
    for lam in eigs:
        if abs(lam - 1.0) < 1e-12:
            raise SingularSystemError(
                f"I - {label} is singular: {label} has a unit eigenvalue "
                f"({lam!r}); the finite-horizon geometric sum is undefined"
            )


def _geom_sum(M: np.ndarray, r: float, L: int, label: str) -> np.ndarray:
    """sum_{i=0}^{L-1} (r M)^i = (I - (rM)^L)(I - rM)^{-1}."""
    I = np.eye(2)
    if L == 0:
        return np.zeros((2, 2))
    _check_unit_eigenvalue(M, r, label)
    return (I - np.linalg.matrix_power(r * M, L)) @ np.linalg.inv(I - r * M)


def exit_state_loading(params: StructuralParams, L: int, exit_mode: str) -> tuple[np.ndarray, np.ndarray]:
    """(capital part, waste part) of dY_{L+1}/dg1 for the guessed exit convention."""
    nm = regime_matrices(params, "normal")
    em = regime_matrices(params, "elb")
    rm = em if exit_mode == "stochastic" else nm
    I = np.eye(2)
    p, q, dt = params.p, params.q, params.delta_tilde
    _check_unit_eigenvalue(rm.A, p, f"p*A ({rm.regime} regime)")
    Minv = np.linalg.inv(I - p * rm.A)
    y2_load = np.linalg.solve(I - q * nm.A, nm.B)  # dY_{L+2}/dk_{L+2}
    cap = Minv @ (q**L * rm.A @ y2_load * dt + geometric_ratio(L, p, q) * rm.B * dt)
    waste = Minv @ (p**L * rm.C_g)
    return cap, waste


def impact_closed_form(params: StructuralParams, L: int,
                       exit_mode: str = "stochastic") -> ImpactLoading:
    """Closed-form g-loading of Y_1, decomposed per the backward unrolling.

    Y_1 = (A*)^L Y_{L+1} + sum_{i=0}^{L-1} (A*)^i [B* k_{1+i} + C_g* g_{1+i} + ...],
    with k_{1+i} = (q^i - p^i)/(q-p) * delta_tilde * g1 and g_{1+i} = p^i g1.
    Under stochastic exit the waste term collapses to (I - pA*)^{-1} C_g*,
    independent of L.
    """
    if exit_mode not in EXIT_MODES:
        raise ValueError(f"exit_mode={exit_mode!r} not one of {EXIT_MODES}")
    em = regime_matrices(params, "elb")
    As = em.A
    p, q, dt = params.p, params.q, params.delta_tilde
    As_L = np.linalg.matrix_power(As, L)

    cap_exit, waste_exit = exit_state_loading(params, L, exit_mode)
    q_exit = As_L @ cap_exit

    if abs(q - p) <= 1e-9:
        acc = np.zeros(2)
        for i in range(L):
            acc += geometric_ratio(i, p, q) * (np.linalg.matrix_power(As, i) @ em.B)
        q_deter = acc * dt
    else:
        S_q = _geom_sum(As, q, L, "q*A (floor regime)")
        S_p = _geom_sum(As, p, L, "p*A (floor regime)")
        q_deter = (S_q - S_p) @ (em.B * dt) / (q - p)

    if exit_mode == "stochastic":
        # algebraic identity: within-trap + propagated exit waste = (I-pA*)^{-1} C_g*
        _check_unit_eigenvalue(As, p, "p*A (floor regime)")
        waste = np.linalg.solve(np.eye(2) - p * As, em.C_g)
    else:
        S_p = _geom_sum(As, p, L, "p*A (floor regime)")
        waste = S_p @ em.C_g + As_L @ waste_exit
    return ImpactLoading(waste=waste, q_deter=q_deter, q_exit=q_exit)


def spectral_radius(M: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def q_limit(params: StructuralParams) -> np.ndarray:
    """lim_{L->inf} of the capital loading: (I-pA*)^{-1} A* (I-qA*)^{-1} B* delta_tilde.

    Requires both p*A* and q*A* to have all eigenvalues inside the unit
    circle; otherwise the limit does not exist.
    """
    em = regime_matrices(params, "elb")
    for r, label in ((params.p, "p*A*"), (params.q, "q*A*")):
        sr = spectral_radius(r * em.A)
        if sr >= 1.0:
            raise AssumptionError(
                f"eigenvalue stability violated: spectral radius of {label} is "
                f"{sr:.6f} >= 1, so the long-trap capital loading diverges"
            )
    I = np.eye(2)
    return np.linalg.inv(I - params.p * em.A) @ em.A @ np.linalg.solve(I - params.q * em.A, em.B * params.delta_tilde)
