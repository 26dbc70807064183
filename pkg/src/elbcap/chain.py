"""The shared (L+3)-state Markov chain and conditional-expectation machinery.

Every model variable is represented as a Markov chain on the same state
space: L perfect-foresight states (unit off-diagonal rows), a trap state
that persists with probability p, a recovery state that persists with
probability q = 1 - delta, and an absorbing steady state. Conditional
expectations are u P^n z, which lets impulse responses and discounted sums
be computed exactly.

The exogenous chains replicate an AR(1) with persistence p; the capital
chain replicates the ARMA(2,1) implied by the accumulation equation, with
k = 0 in the first state because of the one-period time-to-build delay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import StructuralParams, _frozen

#: below this |q - p| the geometric-ratio formula switches to its analytic limit
DEGENERATE_PQ_TOL = 1e-9


def geometric_ratio(ell: int, p: float, q: float) -> float:
    """(q**ell - p**ell) / (q - p), with the limit ell * p**(ell-1) at q = p."""
    if abs(q - p) <= DEGENERATE_PQ_TOL:
        return float(ell) * p ** (ell - 1) if ell >= 1 else 0.0
    return (q**ell - p**ell) / (q - p)


def build_transition(L: int, p: float, q: float) -> np.ndarray:
    """Transition matrix of size (L+3) x (L+3).

    Rows 1..L shift deterministically to the next state; row L+1 stays with
    probability p, row L+2 with probability q; the last state is absorbing.
    """
    if L < 0:
        raise ValueError(f"L={L} must be >= 0")
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise ValueError(f"persistences p={p}, q={q} must lie in (0, 1)")
    n = L + 3
    P = np.zeros((n, n))
    for i in range(L):
        P[i, i + 1] = 1.0
    P[L, L] = p
    P[L, L + 1] = 1.0 - p
    P[L + 1, L + 1] = q
    P[L + 1, L + 2] = 1.0 - q
    P[L + 2, L + 2] = 1.0
    return P


def exogenous_states(L: int, p: float, z1: float) -> np.ndarray:
    """AR(1) Markov states: z1 * p**(l-1) for states 1..L+1, then zeros."""
    z = np.zeros(L + 3)
    for i in range(L + 1):
        z[i] = z1 * p**i
    return z


def capital_states(L: int, p: float, q: float, delta_tilde: float, g1: float) -> np.ndarray:
    """Public-capital Markov states replicating the ARMA(2,1) in expectations.

    k is zero in the first state (one-period time to build); interior states
    follow (q**l - p**l)/(q - p) * k2 with k2 = delta_tilde * g1, and the
    recovery state carries k2 * q**L / (1 - p) so that u P^n k matches the
    deterministic accumulation path at every horizon.
    """
    k = np.zeros(L + 3)
    k2 = delta_tilde * g1
    for ell in range(1, L + 1):
        k[ell] = geometric_ratio(ell, p, q) * k2
    k[L + 1] = k2 * q**L / (1.0 - p)
    return k


@dataclass(frozen=True)
class ChainSpec:
    """Transition matrix, initial distribution and exogenous state vectors."""

    L: int
    p: float
    q: float
    P: np.ndarray
    u: np.ndarray
    g_states: np.ndarray
    xi_states: np.ndarray
    k_states: np.ndarray
    g1: float
    xi1: float

    @property
    def n_states(self) -> int:
        return self.L + 3


def build_chain(params: StructuralParams, L: int, g1: float, xi1: float) -> ChainSpec:
    P = build_transition(L, params.p, params.q)
    u = np.zeros(L + 3)
    u[0] = 1.0
    return ChainSpec(
        L=L, p=params.p, q=params.q,
        P=_frozen(P), u=_frozen(u),
        g_states=_frozen(exogenous_states(L, params.p, g1)),
        xi_states=_frozen(exogenous_states(L, params.p, xi1)),
        k_states=_frozen(capital_states(L, params.p, params.q, params.delta_tilde, g1)),
        g1=g1, xi1=xi1,
    )


def expectation(spec: ChainSpec, states: np.ndarray, n: int) -> float:
    """u P^n states, by repeated vector-matrix products."""
    states = np.asarray(states, dtype=float)
    if states.shape != (spec.n_states,):
        raise ValueError(f"states has shape {states.shape}, expected ({spec.n_states},)")
    if n < 0:
        raise ValueError(f"horizon n={n} must be >= 0")
    v = spec.u.copy()
    for _ in range(n):
        v = v @ spec.P
    return float(v @ states)


def expectation_path(spec: ChainSpec, states: np.ndarray, horizon: int) -> np.ndarray:
    """[u P^n states for n = 0..horizon]."""
    states = np.asarray(states, dtype=float)
    if states.shape != (spec.n_states,):
        raise ValueError(f"states has shape {states.shape}, expected ({spec.n_states},)")
    out = np.empty(horizon + 1)
    v = spec.u.copy()
    out[0] = v @ states
    for n in range(1, horizon + 1):
        v = v @ spec.P
        out[n] = v @ states
    return out


def discounted_sum(spec: ChainSpec, states: np.ndarray, beta: float) -> float:
    """sum_n beta**n u P^n states = u (I - beta P)^(-1) states, solved exactly."""
    n = spec.n_states
    w = np.linalg.solve((np.eye(n) - beta * spec.P).T, spec.u)
    return float(w @ np.asarray(states, dtype=float))


IRF_COLUMNS = ("horizon", "c", "pi", "r", "y", "g", "xi", "k")


@dataclass(frozen=True)
class IrfPath:
    """Horizon-indexed conditional-expectation paths (deviations from steady state).

    r applies the max(log(beta), phi_pi*pi) floor to each Markov state's
    policy-rule value before averaging, so the reported path is the
    expectation of the equilibrium rate chain.
    """

    horizon: np.ndarray
    c: np.ndarray
    pi: np.ndarray
    r: np.ndarray
    y: np.ndarray
    g: np.ndarray
    xi: np.ndarray
    k: np.ndarray

    def rows(self):
        for i in range(len(self.horizon)):
            yield (int(self.horizon[i]), self.c[i], self.pi[i], self.r[i],
                   self.y[i], self.g[i], self.xi[i], self.k[i])


def irf(solution, horizon: int) -> IrfPath:
    """Impulse responses at horizons 0..horizon from a solved equilibrium.

    `solution` is an EquilibriumSolution; each variable's path is the
    conditional expectation of its Markov chain under the common initial
    distribution.
    """
    spec: ChainSpec = solution.spec
    params: StructuralParams = solution.params
    c_states = solution.Y[0]
    pi_states = solution.Y[1]
    r_states = np.maximum(params.r_floor, params.phi_pi * pi_states)
    y_states = params.s_c * c_states + spec.g_states
    return IrfPath(
        horizon=np.arange(horizon + 1),
        c=expectation_path(spec, c_states, horizon),
        pi=expectation_path(spec, pi_states, horizon),
        r=expectation_path(spec, r_states, horizon),
        y=expectation_path(spec, y_states, horizon),
        g=expectation_path(spec, spec.g_states, horizon),
        xi=expectation_path(spec, spec.xi_states, horizon),
        k=expectation_path(spec, spec.k_states, horizon),
    )
