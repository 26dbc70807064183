import numpy as np
import pytest

from elbcap import derive_composites

# canonical calibrations used throughout (delta = 1 - q)
BASE = dict(beta=0.99, kappa=0.1, eta=0.01, phi_pi=1.5,
            delta=0.05, s_c=0.8, eps_g=0.1, p=0.7, nkpc="static")
LOW_KAPPA = {**BASE, "kappa": 0.001}               # stable floor-regime eigenvalues
SLOW_DECAY = {**LOW_KAPPA, "delta": 0.02}          # q = 0.98: one unstable eigenvalue (hybrid)
PERSISTENT = {**SLOW_DECAY, "p": 0.99}             # p_bar < q < p


def make_params(**overrides):
    return derive_composites({**BASE, **overrides})


@pytest.fixture
def params():
    return make_params()


@pytest.fixture
def params_low_kappa():
    return make_params(**{k: v for k, v in LOW_KAPPA.items() if k != "nkpc"})


# admissible ranges for randomized sweeps
DRAW_RANGES = {
    "beta": (0.95, 0.999), "kappa": (1e-4, 0.3), "eta": (0.0, 2.0),
    "phi_pi": (1.05, 3.0), "delta": (0.01, 0.1), "s_c": (0.6, 0.95),
    "p": (0.01, 0.99), "eps_g": (0.0, 0.3),
}


def draw_params(rng: np.random.Generator, nkpc="static", accept=None, max_tries=1000):
    """One random admissible calibration, optionally filtered by `accept`."""
    for _ in range(max_tries):
        raw = {k: rng.uniform(*bounds) for k, bounds in DRAW_RANGES.items()}
        raw["nkpc"] = nkpc
        p = derive_composites(raw)
        if accept is None or accept(p):
            return p
    raise RuntimeError("no admissible draw found")


def fd_impact(prm, L, exit_mode, xi, var=0, h_grid=(0.1, 1e-2, 1e-3, 1e-4, 1e-6)):
    """Central-difference impact derivative with the largest pattern-valid step.

    The solution is affine in g1 for a fixed binding pattern, so any valid
    step gives the exact slope up to float rounding; larger steps condition
    the difference better against the xi-driven state levels.
    """
    from elbcap import BindingViolationError, solve_elb

    for h in h_grid:
        try:
            hi = solve_elb(prm, L, h, xi, exit_mode).Y[var, 0]
            lo = solve_elb(prm, L, -h, xi, exit_mode).Y[var, 0]
        except BindingViolationError:
            continue
        return (hi - lo) / (2.0 * h)
    raise RuntimeError(f"no pattern-valid step for L={L}, exit={exit_mode}")
