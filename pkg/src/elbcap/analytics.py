"""Closed-form multipliers, thresholds and eigen diagnostics.

Scenario coverage:

  normal      no floor episode; impact and PDV multipliers with the
              crowding-in threshold eps_I and its PDV counterpart eps_M;
  short_trap  one-period floor episode in expectations (stochastic exit),
              where the medium run is governed by the active-policy block;
  long_trap   arbitrarily long episode, where the floor also binds in the
              medium run (requires stable p*A* and q*A*);
  finite L    the additive decomposition waste + Q_deter + Q_exit of the
              consumption multiplier, for sweeps over the trap length.

The scalar closed forms are derived under the static Phillips curve and
refuse to run under the hybrid one; the matrix-form loadings (and the
decomposition) hold for both variants. Medium-run loadings are reported
per unit of eps_g: capital enters the Phillips curve only through
Gamma_k = (1+eta) * eps_g, so eps_g factors out of every Theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import StructuralParams, regime_matrices
from .solver import (
    AssumptionError,
    ImpactLoading,
    impact_closed_form,
    q_limit,
    spectral_radius,
)
from . import solver as _solver
from .chain import build_chain, discounted_sum

SCENARIOS = ("normal", "short_trap", "long_trap", "finite_L")


class VariantError(ValueError):
    """A static-Phillips-curve closed form was requested under the hybrid variant."""


def _require_static(params: StructuralParams, what: str) -> None:
    if params.nkpc != "static":
        raise VariantError(
            f"{what} is a static-Phillips-curve closed form; solve the hybrid "
            "variant through the decomposition/solver path instead"
        )


def delta_active(params: StructuralParams, r: float) -> float:
    """det(A0 - r A1) for the active-policy regime.

    Static variant: 1 - r + kappa*Gamma_c*(phi_pi - r), the common
    denominator of the normal-times closed forms.
    """
    nm = regime_matrices(params, "normal")
    return float(np.linalg.det(nm.A0 - r * nm.A1))


def det_passive(params: StructuralParams, r: float) -> float:
    """det(I - r A*) for the floor regime (A0* has unit determinant).

    Static variant: 1 - r*(1 + kappa*Gamma_c).
    """
    em = regime_matrices(params, "elb")
    return float(np.linalg.det(em.A0 - r * em.A1))


@dataclass(frozen=True)
class EigenDiagnostics:
    p_bar: float
    eig_pA_star: np.ndarray
    eig_qA_star: np.ndarray
    det_I_pA_star: float
    det_I_qA_star: float


def eigen_diagnostics(params: StructuralParams) -> EigenDiagnostics:
    """Spectrum of the floor-regime block and the persistence threshold p_bar.

    Static variant: A* has eigenvalues {0, 1 + kappa*Gamma_c}, so
    p_bar = 1/(1 + kappa*Gamma_c) and det(I - pA*) = 1 - p(1 + kappa*Gamma_c)
    in closed form. Hybrid variant: p_bar = 1/lambda_max(A*) from the
    numeric spectrum.
    """
    em = regime_matrices(params, "elb")
    eig_p = np.linalg.eigvals(params.p * em.A)
    eig_q = np.linalg.eigvals(params.q * em.A)
    if params.nkpc == "static":
        lam2 = 1.0 + params.kappa * params.Gamma_c
        p_bar = 1.0 / lam2
        det_p = 1.0 - params.p * lam2
        det_q = 1.0 - params.q * lam2
    else:
        lam_max = spectral_radius(em.A)
        p_bar = 1.0 / lam_max
        det_p = det_passive(params, params.p)
        det_q = det_passive(params, params.q)
    return EigenDiagnostics(
        p_bar=p_bar, eig_pA_star=eig_p, eig_qA_star=eig_q,
        det_I_pA_star=det_p, det_I_qA_star=det_q,
    )


@dataclass(frozen=True)
class ThetaReport:
    """Medium-run loadings of c and pi on capital, per unit of eps_g.

    In the active-policy regime c_2 = Theta_ck * eps_g * k and
    pi_2 = Theta_pik * eps_g * k with Theta_ck > 0 > Theta_pik; in the
    floor regime (superscript-z objects) both are negative under stable
    q*A*. Theta is the sum coefficient: c_2 + pi_2 = Theta * eps_g * k.
    """

    regime: str
    Theta_ck: float
    Theta_pik: float
    Theta: float


def theta_values(params: StructuralParams, regime: str) -> ThetaReport:
    """Solve (A0 - q A1) Y = B0/eps_g for the per-unit-eps_g medium-run loadings."""
    rm = regime_matrices(params, regime)
    pencil = rm.A0 - params.q * rm.A1
    det = np.linalg.det(pencil)
    if abs(det) < 1e-14:
        raise AssumptionError(
            f"(A0 - q A1) singular in the {regime} regime: eigenvalue of q*A at 1"
        )
    b_unit = np.array([0.0, -params.kappa * (1.0 + params.eta)])  # B0 with eps_g factored out
    load = np.linalg.solve(pencil, b_unit)
    return ThetaReport(regime=regime, Theta_ck=float(load[0]),
                       Theta_pik=float(load[1]), Theta=float(load[0] + load[1]))


@dataclass(frozen=True)
class ImpactMultipliers:
    dc1_dg: float
    dpi1_dg: float
    dy1_dg: float


def _package(params: StructuralParams, dc1: float, dpi1: float) -> ImpactMultipliers:
    return ImpactMultipliers(dc1_dg=dc1, dpi1_dg=dpi1, dy1_dg=params.s_c * dc1 + 1.0)


def impact_multiplier_normal(params: StructuralParams) -> ImpactMultipliers:
    """Normal-times impact multipliers (static variant).

    dc1/dg = (Theta*delta_tilde*eps_g - kappa*(phi_pi - p)*Gamma_g) / Delta(p)
    with Delta(r) = 1 - r + kappa*Gamma_c*(phi_pi - r); the inflation
    multiplier kappa*(Gamma_c*dc1/dg + Gamma_g) is positive for any
    admissible parameters.
    """
    _require_static(params, "impact_multiplier_normal")
    th = theta_values(params, "normal")
    d_p = delta_active(params, params.p)
    dc1 = (th.Theta * params.delta_tilde * params.eps_g
           - params.kappa * (params.phi_pi - params.p) * params.Gamma_g) / d_p
    dpi1 = params.kappa * (params.Gamma_c * dc1 + params.Gamma_g)
    return _package(params, dc1, dpi1)


def threshold_eps_I(params: StructuralParams) -> float:
    """Capital elasticity above which consumption is crowded in on impact.

    eps_I = ((phi_pi - p)/(phi_pi - 1)) * (Gamma_g/(1 + Gamma_g))
            * Delta(q) / delta_tilde.
    """
    _require_static(params, "threshold_eps_I")
    d_q = delta_active(params, params.q)
    return ((params.phi_pi - params.p) / (params.phi_pi - 1.0)
            * params.Gamma_g / (1.0 + params.Gamma_g)
            * d_q / params.delta_tilde)


def impact_multiplier_trap(params: StructuralParams, trap: str) -> ImpactMultipliers:
    """Impact multipliers when the floor binds on impact (static variant).

    short trap: dc1/dg = (Theta*delta_tilde*eps_g + p*kappa*Gamma_g)/det(I-pA*)
    with the medium run still governed by the active-policy Theta; the long
    trap replaces Theta with the floor-regime Theta_z (requires stable
    eigenvalues) and flips the sign of the capital contribution.
    """
    _require_static(params, f"impact_multiplier_trap({trap!r})")
    if trap not in ("short", "long"):
        raise ValueError(f"trap={trap!r} not one of ('short', 'long')")
    if trap == "long":
        _require_assumption_1(params)
        theta = theta_values(params, "elb").Theta
    else:
        theta = theta_values(params, "normal").Theta
    det_p = det_passive(params, params.p)
    if abs(det_p) < 1e-14:
        raise AssumptionError("det(I - pA*) is numerically zero (p at the threshold p_bar)")
    dc1 = (theta * params.delta_tilde * params.eps_g
           + params.p * params.kappa * params.Gamma_g) / det_p
    dpi1 = params.kappa * (params.Gamma_c * theta * params.delta_tilde * params.eps_g
                           + (1.0 - params.p) * params.Gamma_g) / det_p
    return _package(params, dc1, dpi1)


def _require_assumption_1(params: StructuralParams) -> None:
    em = regime_matrices(params, "elb")
    for r, label in ((params.p, "p*A*"), (params.q, "q*A*")):
        sr = spectral_radius(r * em.A)
        if sr >= 1.0:
            raise AssumptionError(
                f"long-trap closed forms need all eigenvalues of p*A* and q*A* "
                f"inside the unit circle; spectral radius of {label} is {sr:.6f}"
            )


def long_trap_thresholds(params: StructuralParams) -> tuple[float, float]:
    """(eps_zc, eps_zpi): elasticities past which c (resp. pi) is crowded out.

    eps_zpi = ((1-p)/p) * (1/(kappa*Gamma_c)) * eps_zc.
    """
    _require_static(params, "long_trap_thresholds")
    _require_assumption_1(params)
    theta_z = theta_values(params, "elb").Theta  # negative under stable q*A*
    eps_zc = -params.p * params.kappa * params.Gamma_g / (theta_z * params.delta_tilde)
    eps_zpi = -(1.0 - params.p) * params.Gamma_g / (params.Gamma_c * theta_z * params.delta_tilde)
    return float(eps_zc), float(eps_zpi)


@dataclass(frozen=True)
class PdvReport:
    """Present-discounted-value consumption multiplier and its threshold.

    pdv_c = dc1/dg + beta*(1-p)/(1-beta*q) * dc2/dg. In the normal scenario
    eps_M < eps_I is the PDV crowding-in threshold. In the short-trap
    scenario with det(I - pA*) < 0, `condition_holds` reports whether the
    medium-run supply effects dominate (beta*(phi_pi-q)/(1-beta*q) >
    -(phi_pi-1)/det); when they do, eps_Mz is the PDV threshold, otherwise
    pdv_c < dc1/dg < 0.
    """

    scenario: str
    pdv_c: float
    dc1_dg: float
    medium_run_term: float
    eps_M: float | None = None
    eps_Mz: float | None = None
    condition_holds: bool | None = None


def pdv_multiplier(params: StructuralParams, scenario: str) -> PdvReport:
    _require_static(params, "pdv_multiplier")
    if scenario not in ("normal", "short_trap"):
        raise ValueError(f"scenario={scenario!r} not one of ('normal', 'short_trap')")
    th = theta_values(params, "normal")
    medium = (params.beta / (1.0 - params.beta * params.q)
              * th.Theta_ck * params.delta_tilde * params.eps_g)
    if scenario == "normal":
        dc1 = impact_multiplier_normal(params).dc1_dg
        d_p = delta_active(params, params.p)
        eps_I = threshold_eps_I(params)
        eps_M = eps_I / (1.0 + params.beta / (1.0 - params.beta * params.q)
                         * (params.phi_pi - params.q) / (params.phi_pi - 1.0) * d_p)
        return PdvReport(scenario=scenario, pdv_c=dc1 + medium, dc1_dg=dc1,
                         medium_run_term=medium, eps_M=eps_M)

    dc1 = impact_multiplier_trap(params, "short").dc1_dg
    det_p = det_passive(params, params.p)
    condition = None
    eps_Mz = None
    if det_p < 0.0:
        condition = (params.beta * (params.phi_pi - params.q) / (1.0 - params.beta * params.q)
                     > -(params.phi_pi - 1.0) / det_p)
        if condition:
            # root of the affine map eps -> pdv_c(eps)
            slope = params.delta_tilde * (th.Theta
                                          + det_p * params.beta * th.Theta_ck
                                          / (1.0 - params.beta * params.q))
            eps_Mz = -params.p * params.kappa * params.Gamma_g / slope
    return PdvReport(scenario=scenario, pdv_c=dc1 + medium, dc1_dg=dc1,
                     medium_run_term=medium, eps_Mz=eps_Mz, condition_holds=condition)


def scenario_loading(params: StructuralParams, scenario: str) -> np.ndarray:
    """Matrix-form g-loading of [c1, pi1]; valid for both Phillips-curve variants.

    normal:     (I - pA)^{-1}  [C_g  + A  (I - qA )^{-1} B  delta_tilde]
    short_trap: (I - pA*)^{-1} [C_g* + A* (I - qA )^{-1} B  delta_tilde]
    long_trap:  (I - pA*)^{-1} [C_g* + A* (I - qA*)^{-1} B* delta_tilde]
    """
    nm = regime_matrices(params, "normal")
    em = regime_matrices(params, "elb")
    I = np.eye(2)
    p, q, dt = params.p, params.q, params.delta_tilde
    if scenario == "normal":
        inner = nm.C_g + nm.A @ np.linalg.solve(I - q * nm.A, nm.B * dt)
        return np.linalg.solve(I - p * nm.A, inner)
    if scenario == "short_trap":
        inner = em.C_g + em.A @ np.linalg.solve(I - q * nm.A, nm.B * dt)
        return np.linalg.solve(I - p * em.A, inner)
    if scenario == "long_trap":
        _require_assumption_1(params)
        inner = em.C_g + em.A @ np.linalg.solve(I - q * em.A, em.B * dt)
        return np.linalg.solve(I - p * em.A, inner)
    raise ValueError(f"scenario={scenario!r} has no impact loading")


def decompose_multiplier(params: StructuralParams, L: int,
                         exit_mode: str = "stochastic") -> tuple[float, float, float]:
    """(M_waste, Q_deter, Q_exit): additive parts of the consumption multiplier."""
    loading = impact_closed_form(params, L, exit_mode)
    return float(loading.waste[0]), float(loading.q_deter[0]), float(loading.q_exit[0])


def pdv_finite_L(params: StructuralParams, L: int, exit_mode: str = "stochastic") -> float:
    """PDV consumption multiplier at trap length L, from the exact chain sums.

    Differentiates the full state matrix with respect to g1 (the system is
    affine for a fixed pattern) and evaluates u (I - beta P)^{-1} on the
    consumption and spending chains.
    """
    dY = _solver._recurse(params, L, 1.0, 0.0, exit_mode, include_constants=False)
    spec = build_chain(params, L, 1.0, 0.0)
    pdv_c = discounted_sum(spec, dY[0], params.beta)
    pdv_g = discounted_sum(spec, spec.g_states, params.beta)
    return pdv_c / pdv_g


@dataclass(frozen=True)
class MultiplierReport:
    scenario: str
    dc1_dg: float
    dpi1_dg: float
    dy1_dg: float
    L: int | None = None
    exit_mode: str | None = None
    pdv_c: float | None = None
    m_waste: float | None = None
    q_deter: float | None = None
    q_exit: float | None = None
    eps_I: float | None = None
    eps_M: float | None = None
    eps_Mz: float | None = None
    eps_zc: float | None = None
    eps_zpi: float | None = None
    diagnostics: EigenDiagnostics = field(default=None)  # type: ignore[assignment]


def multiplier_report(params: StructuralParams, scenario: str,
                      L: int | None = None,
                      exit_mode: str = "stochastic") -> MultiplierReport:
    """Assemble the full report for one scenario (thresholds static-only)."""
    diag = eigen_diagnostics(params)
    is_static = params.nkpc == "static"
    if scenario == "finite_L":
        if L is None:
            raise ValueError("finite_L scenario needs L")
        loading = impact_closed_form(params, L, exit_mode)
        dc1, dpi1 = float(loading.total[0]), float(loading.total[1])
        return MultiplierReport(
            scenario=scenario, dc1_dg=dc1, dpi1_dg=dpi1,
            dy1_dg=params.s_c * dc1 + 1.0, L=L, exit_mode=exit_mode,
            pdv_c=pdv_finite_L(params, L, exit_mode),
            m_waste=float(loading.waste[0]), q_deter=float(loading.q_deter[0]),
            q_exit=float(loading.q_exit[0]), diagnostics=diag,
        )
    load = scenario_loading(params, scenario)
    dc1, dpi1 = float(load[0]), float(load[1])
    rep = MultiplierReport(
        scenario=scenario, dc1_dg=dc1, dpi1_dg=dpi1,
        dy1_dg=params.s_c * dc1 + 1.0, diagnostics=diag,
    )
    if not is_static:
        return rep
    if scenario == "normal":
        pdv = pdv_multiplier(params, "normal")
        return MultiplierReport(
            scenario=scenario, dc1_dg=dc1, dpi1_dg=dpi1, dy1_dg=rep.dy1_dg,
            pdv_c=pdv.pdv_c, eps_I=threshold_eps_I(params), eps_M=pdv.eps_M,
            diagnostics=diag,
        )
    if scenario == "short_trap":
        pdv = pdv_multiplier(params, "short_trap")
        return MultiplierReport(
            scenario=scenario, dc1_dg=dc1, dpi1_dg=dpi1, dy1_dg=rep.dy1_dg,
            pdv_c=pdv.pdv_c, eps_Mz=pdv.eps_Mz, diagnostics=diag,
        )
    if scenario == "long_trap":
        eps_zc, eps_zpi = long_trap_thresholds(params)
        return MultiplierReport(
            scenario=scenario, dc1_dg=dc1, dpi1_dg=dpi1, dy1_dg=rep.dy1_dg,
            eps_zc=eps_zc, eps_zpi=eps_zpi, diagnostics=diag,
        )
    raise ValueError(f"scenario={scenario!r} not one of {SCENARIOS}")


def sweep_L(params: StructuralParams, L_values, exit_mode: str = "stochastic") -> list[MultiplierReport]:
    """One finite-L report per trap length; powers the decomposition figures."""
    return [multiplier_report(params, "finite_L", L=L, exit_mode=exit_mode)
            for L in L_values]
