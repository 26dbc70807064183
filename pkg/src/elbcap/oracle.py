"""Independent brute-force verifiers: Monte Carlo, residuals, stacked solve, FD.

These deliberately avoid the backward-recursion code path (they share only
the regime-matrix construction), so agreement with the solver is evidence
rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, build_chain, expectation_path
from .model import StructuralParams, regime_matrices
from .solver import EquilibriumSolution, SingularSystemError, _binding_flags


@dataclass(frozen=True)
class SimulationResult:
    means: np.ndarray  # (horizon+1,) sample mean of the state value per horizon
    std_errors: np.ndarray
    n_paths: int
    seed: int


def simulate_chain(spec: ChainSpec, states: np.ndarray, horizon: int,
                   n_paths: int, seed: int) -> SimulationResult:
    """Per-horizon sample means over simulated chain paths started from u.

    All uniforms are drawn up-front from one seeded generator (path i uses
    row i), so the result is byte-reproducible for a fixed seed.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    states = np.asarray(states, dtype=float)
    rng = np.random.default_rng(seed)
    uniforms = rng.random((n_paths, horizon))
    cum = np.cumsum(spec.P, axis=1)

    start = np.searchsorted(np.cumsum(spec.u), rng.random(n_paths), side="right")
    idx = start.astype(np.int64)
    means = np.empty(horizon + 1)
    ses = np.empty(horizon + 1)

    def record(n: int) -> None:
        vals = states[idx]
        means[n] = vals.mean()
        ses[n] = vals.std(ddof=1) / math.sqrt(n_paths) if n_paths > 1 else 0.0

    record(0)
    for n in range(1, horizon + 1):
        rows = cum[idx]
        idx = np.sum(rows < uniforms[:, n - 1][:, None], axis=1)
        record(n)
    return SimulationResult(means=means, std_errors=ses, n_paths=n_paths, seed=seed)


def chain_std_errors(spec: ChainSpec, states: np.ndarray, horizon: int,
                     n_paths: int) -> np.ndarray:
    """Exact per-horizon standard errors of the sample mean, from the chain.

    sqrt((u P^n states^2 - (u P^n states)^2) / n_paths). Unlike the sample
    standard error, this stays valid at deep horizons where only a handful
    of paths still occupy a nonzero-value state (there the sample variance
    collapses to zero while the estimator still has dispersion).
    """
    states = np.asarray(states, dtype=float)
    first = expectation_path(spec, states, horizon)
    second = expectation_path(spec, states**2, horizon)
    var = np.maximum(second - first**2, 0.0)
    return np.sqrt(var / n_paths)


EQUATION_NAMES = ("euler", "phillips", "taylor", "capital", "resource")


@dataclass(frozen=True)
class ResidualReport:
    """Per-horizon residuals of the five model equations along the IRF.

    The capital residual uses the one-period-delay timing
    k_n - (1-delta) k_{n-1} - delta_tilde * g_{n-1}; the policy-rule
    residual compares the solution's regime assignment against the
    max(log(beta), phi_pi*pi) floor state by state.
    """

    euler: np.ndarray
    phillips: np.ndarray
    taylor: np.ndarray
    capital: np.ndarray
    resource: np.ndarray
    binding_flags: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(max(np.max(np.abs(getattr(self, name))) for name in EQUATION_NAMES))

    def as_dict(self) -> dict[str, float]:
        return {name: float(np.max(np.abs(getattr(self, name)))) for name in EQUATION_NAMES}


def residual_check(solution: EquilibriumSolution, horizon: int = 60) -> ResidualReport:
    """Evaluate every model equation at horizons 0..horizon via chain expectations."""
    params = solution.params
    spec = solution.spec
    c_states = solution.Y[0]
    pi_states = solution.Y[1]
    # rate chain as assumed by the solution's binding pattern
    r_assumed = np.where(solution.binding_flags, params.r_floor, params.phi_pi * pi_states)
    r_true = np.maximum(params.r_floor, params.phi_pi * pi_states)
    y_states = params.s_c * c_states + spec.g_states

    H = horizon
    c = expectation_path(spec, c_states, H + 1)
    pi = expectation_path(spec, pi_states, H + 1)
    r = expectation_path(spec, r_assumed, H + 1)
    g = expectation_path(spec, spec.g_states, H + 1)
    xi = expectation_path(spec, spec.xi_states, H + 1)
    k = expectation_path(spec, spec.k_states, H + 1)
    y = expectation_path(spec, y_states, H + 1)
    taylor_gap = expectation_path(spec, np.abs(r_assumed - r_true), H + 1)

    n = np.arange(H + 1)
    euler = c[n] - c[n + 1] + r[n] - pi[n + 1] + xi[n]
    b_f = params.beta if params.nkpc == "hybrid" else 0.0
    phillips = pi[n] - b_f * pi[n + 1] - params.kappa * (
        params.Gamma_c * c[n] + params.Gamma_g * g[n] - params.Gamma_k * k[n])
    capital = np.empty(H + 1)
    capital[0] = k[0]  # one-period time to build: no capital on impact
    capital[1:] = k[1:H + 1] - (1.0 - params.delta) * k[:H] - params.delta_tilde * g[:H]
    resource = y[n] - params.s_c * c[n] - g[n]
    return ResidualReport(
        euler=euler, phillips=phillips, taylor=taylor_gap[: H + 1],
        capital=capital, resource=resource, binding_flags=solution.binding_flags,
    )


def stacked_solve(params: StructuralParams, L: int, xi1: float, g1: float,
                  exit_mode: str = "stochastic",
                  binding_pattern: np.ndarray | None = None) -> np.ndarray:
    """Assemble all 2(L+2) state equations into one linear system and solve.

    Uses the structural (non-reduced) blocks and a single dense solve; no
    recursion. Returns the 2 x (L+3) state matrix (last column zero).
    """
    if binding_pattern is None:
        binding_pattern = _binding_flags(L, exit_mode)
    binding_pattern = np.asarray(binding_pattern, dtype=bool)
    if binding_pattern.shape != (L + 3,):
        raise ValueError(f"binding_pattern must have length {L + 3}")
    spec = build_chain(params, L, g1, xi1)
    nm = regime_matrices(params, "normal")
    em = regime_matrices(params, "elb")

    n_unknown = 2 * (L + 2)
    M = np.zeros((n_unknown, n_unknown))
    rhs = np.zeros(n_unknown)

    def block(i: int) -> slice:  # unknowns of state i+1
        return slice(2 * i, 2 * i + 2)

    for i in range(L + 2):  # state i+1
        rm = em if binding_pattern[i] else nm
        r = block(i)
        M[r, r] += rm.A0
        if i < L:  # perfect foresight: next state is i+2 with probability 1
            M[r, block(i + 1)] += -rm.A1
        elif i == L:  # trap state: stays with probability p
            M[r, r] += -params.p * rm.A1
            M[r, block(i + 1)] += -(1.0 - params.p) * rm.A1
        else:  # recovery state: stays with probability q, absorbing state is zero
            M[r, r] += -params.q * rm.A1
        rhs[r] = (rm.B0 * spec.k_states[i] + rm.C0_g * spec.g_states[i]
                  + rm.C0_xi * spec.xi_states[i] + rm.E0)

    try:
        x = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"stacked system is singular: {exc}") from exc
    Y = np.zeros((2, L + 3))
    Y[:, : L + 2] = x.reshape(L + 2, 2).T
    return Y


def finite_diff(fn, x0: float, h: float = 1e-6) -> float:
    """Central difference (fn(x0+h) - fn(x0-h)) / (2h)."""
    if h <= 0:
        raise ValueError("h must be > 0")
    return (fn(x0 + h) - fn(x0 - h)) / (2.0 * h)
