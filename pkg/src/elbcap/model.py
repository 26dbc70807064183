"""Model primitives: deep parameters, steady state, and log-linear regime matrices.

The economy is a New Keynesian model in which government investment feeds a
stock of public capital with a one-period time-to-build delay. In log
deviations from steady state the model is

    c_t  = E_t c_{t+1} - (r_t - E_t pi_{t+1} + xi_t)          (Euler)
    pi_t = b_f E_t pi_{t+1} + kappa (Gamma_c c_t + Gamma_g g_t - Gamma_k k_t)
    r_t  = max(log(beta), phi_pi * pi_t)                      (policy rule + floor)
    k_t  = (1 - delta) k_{t-1} + delta_tilde * g_{t-1}        (capital accumulation)
    y_t  = s_c c_t + g_t                                      (resource constraint)

where b_f = 0 under the static Phillips curve and b_f = beta under the hybrid
one. The floor value log(beta) is the deviation at which the net nominal rate
hits zero. Away from the floor, the forward-looking block [c, pi]' stacks as

    A0 Y_t = A1 E_t Y_{t+1} + B0 k_t + C0_g g_t + C0_xi xi_t + E0

with an active rule (phi_pi inside A0); at the floor A0 loses the phi_pi
entry and E0 picks up the -log(beta) constant. Both regimes share A1, B0 and
the shock loadings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

STEADY_STATE_HOURS = 1.0 / 3.0

NKPC_VARIANTS = ("static", "hybrid")
REGIMES = ("normal", "elb")

CONFIG_KEYS = ("beta", "kappa", "eta", "phi_pi", "delta", "s_c", "eps_g", "p", "nkpc")
OPTIONAL_CONFIG_KEYS = ("psi", "nu")


class ParameterError(ValueError):
    """A structural parameter violates its admissible range."""


class ConfigError(ValueError):
    """Malformed or inconsistent key=value parameter file."""


@dataclass(frozen=True)
class StructuralParams:
    """Deep parameters plus derived composites.

    Composites follow from log utility with convex labor disutility:
    Gamma_c = 1 + eta*s_c, Gamma_g = eta, Gamma_k = (1+eta)*eps_g, and the
    capital law of motion scaling delta_tilde = delta/(1-s_c). chi is the
    labor-disutility weight implied by steady-state hours N = 1/3; it is an
    output of calibration, never an input.
    """

    beta: float
    kappa: float
    eta: float
    phi_pi: float
    delta: float
    s_c: float
    eps_g: float
    p: float
    nkpc: str = "static"
    psi: float | None = None
    nu: float | None = None

    @property
    def q(self) -> float:
        return 1.0 - self.delta

    @property
    def delta_tilde(self) -> float:
        return self.delta / (1.0 - self.s_c)

    @property
    def Gamma_c(self) -> float:
        return 1.0 + self.eta * self.s_c

    @property
    def Gamma_g(self) -> float:
        return self.eta

    @property
    def Gamma_k(self) -> float:
        return (1.0 + self.eta) * self.eps_g

    @property
    def chi(self) -> float:
        # N = (1/(s_c*chi))**(1/(1+eta)) = 1/3  =>  chi = 3**(1+eta)/s_c
        return (1.0 / STEADY_STATE_HOURS) ** (1.0 + self.eta) / self.s_c

    @property
    def r_floor(self) -> float:
        """Lower bound on the nominal-rate deviation (a negative number)."""
        return math.log(self.beta)

    @property
    def pi_floor(self) -> float:
        """Inflation level at which the rule hits the floor: log(beta)/phi_pi."""
        return math.log(self.beta) / self.phi_pi


def _check_open(name: str, value: float, lo: float, hi: float) -> None:
    if not lo < value < hi:
        raise ParameterError(f"{name}={value!r} outside ({lo}, {hi})")


def derive_composites(raw: Mapping[str, object]) -> StructuralParams:
    """Validate a raw parameter mapping and return a StructuralParams.

    kappa may be given directly, or implied by psi/nu (kappa = psi/nu); if
    all three are present they must agree.
    """
    known = set(CONFIG_KEYS) | set(OPTIONAL_CONFIG_KEYS)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown parameter keys: {sorted(unknown)}")

    def fget(name: str, required: bool = True) -> float | None:
        if name not in raw:
            if required:
                raise ConfigError(f"missing parameter: {name}")
            return None
        try:
            return float(raw[name])  # type: ignore[arg-type]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"parameter {name}={raw[name]!r} is not a number") from exc

    psi = fget("psi", required=False)
    nu = fget("nu", required=False)
    kappa = fget("kappa", required="kappa" in raw)
    if kappa is None:
        if psi is None or nu is None:
            raise ConfigError("kappa missing and not derivable (need both psi and nu)")
        if nu <= 1.0:
            raise ParameterError(f"nu={nu!r} must exceed 1")
        kappa = psi / nu
    elif psi is not None and nu is not None:
        if abs(kappa - psi / nu) > 1e-12 * max(1.0, abs(kappa)):
            raise ParameterError(
                f"kappa={kappa!r} inconsistent with psi/nu={psi / nu!r}"
            )

    nkpc = str(raw.get("nkpc", "static"))
    if nkpc not in NKPC_VARIANTS:
        raise ParameterError(f"nkpc={nkpc!r} not one of {NKPC_VARIANTS}")

    beta = fget("beta")
    eta = fget("eta")
    phi_pi = fget("phi_pi")
    delta = fget("delta")
    s_c = fget("s_c")
    eps_g = fget("eps_g")
    p = fget("p")

    _check_open("beta", beta, 0.0, 1.0)
    _check_open("delta", delta, 0.0, 1.0)
    _check_open("s_c", s_c, 0.0, 1.0)
    _check_open("p", p, 0.0, 1.0)
    if not 0.0 <= eps_g < 1.0:
        raise ParameterError(f"eps_g={eps_g!r} outside [0, 1)")
    if not phi_pi > 1.0:
        raise ParameterError(f"phi_pi={phi_pi!r} must exceed 1")
    if not eta >= 0.0:
        raise ParameterError(f"eta={eta!r} must be >= 0")
    if not kappa > 0.0:
        raise ParameterError(f"kappa={kappa!r} must be > 0")

    return StructuralParams(
        beta=beta, kappa=kappa, eta=eta, phi_pi=phi_pi, delta=delta,
        s_c=s_c, eps_g=eps_g, p=p, nkpc=nkpc, psi=psi, nu=nu,
    )


def parse_config(text: str) -> StructuralParams:
    """Parse a flat key=value parameter file ('#' starts a comment)."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {line.strip()!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return derive_composites(raw)


def load_config(path: str | Path) -> StructuralParams:
    return parse_config(Path(path).read_text())


@dataclass(frozen=True)
class SteadyState:
    N: float
    C: float
    Y: float
    K: float
    G: float
    R: float
    W: float
    K_over_Y: float


def steady_state(params: StructuralParams) -> SteadyState:
    """Nonlinear steady state under the chi that delivers N = 1/3.

    C = s_c * [N * ((1-s_c)/delta)**eps_g]**(1/(1-eps_g)); the remaining
    levels follow from the steady-state identities G = delta*K,
    K/Y = (1-s_c)/delta, C = s_c*Y and R = 1/beta - 1.
    """
    if params.eps_g >= 1.0:
        raise ParameterError(f"eps_g={params.eps_g!r} must be < 1 for a finite steady state")
    N = STEADY_STATE_HOURS
    k_over_y = (1.0 - params.s_c) / params.delta
    C = params.s_c * (N * k_over_y**params.eps_g) ** (1.0 / (1.0 - params.eps_g))
    Y = C / params.s_c
    K = k_over_y * Y
    G = params.delta * K
    R = 1.0 / params.beta - 1.0
    W = Y / N
    return SteadyState(N=N, C=C, Y=Y, K=K, G=G, R=R, W=W, K_over_Y=k_over_y)


def _inv2(M: np.ndarray) -> np.ndarray:
    """Exact 2x2 inverse."""
    a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    det = a * d - b * c
    if abs(det) < 1e-14:
        raise np.linalg.LinAlgError(f"2x2 matrix is singular (det={det!r})")
    return np.array([[d, -b], [-c, a]]) / det


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RegimeMatrices:
    """Structural blocks and reduced forms for one policy regime.

    The two regimes differ only in A0's (1,2) entry (phi_pi vs 0) and in the
    constant E0 (zero vs [-log(beta), 0]'). Reduced forms are premultiplied
    by the exact 2x2 inverse of A0.
    """

    regime: str
    A0: np.ndarray
    A1: np.ndarray
    B0: np.ndarray
    C0_g: np.ndarray
    C0_xi: np.ndarray
    E0: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C_g: np.ndarray
    C_xi: np.ndarray
    E_red: np.ndarray


def regime_matrices(params: StructuralParams, regime: str) -> RegimeMatrices:
    if regime not in REGIMES:
        raise ValueError(f"regime={regime!r} not one of {REGIMES}")
    kG_c = params.kappa * params.Gamma_c
    rule = params.phi_pi if regime == "normal" else 0.0
    a1_22 = params.beta if params.nkpc == "hybrid" else 0.0

    A0 = np.array([[1.0, rule], [-kG_c, 1.0]])
    A1 = np.array([[1.0, 1.0], [0.0, a1_22]])
    B0 = np.array([0.0, -params.kappa * params.Gamma_k])
    C0_g = np.array([0.0, params.kappa * params.Gamma_g])
    C0_xi = np.array([-1.0, 0.0])
    E0 = np.array([0.0, 0.0]) if regime == "normal" else np.array([-math.log(params.beta), 0.0])

    A0_inv = _inv2(A0)
    return RegimeMatrices(
        regime=regime,
        A0=_frozen(A0), A1=_frozen(A1), B0=_frozen(B0),
        C0_g=_frozen(C0_g), C0_xi=_frozen(C0_xi), E0=_frozen(E0),
        A=_frozen(A0_inv @ A1), B=_frozen(A0_inv @ B0),
        C_g=_frozen(A0_inv @ C0_g), C_xi=_frozen(A0_inv @ C0_xi),
        E_red=_frozen(A0_inv @ E0),
    )
