"""Command-line surface: steady | irf | multiplier | sweep | figure | selftest.

All delimited output is deterministic: '#'-prefixed provenance comment line
first (full parameter vector), then a header row, then rows with
shortest-round-trip float formatting. Figure datasets emit numbers only;
rendering lives in a separate package so this one stays headless.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import analytics, oracle
from .chain import build_chain, expectation_path, irf
from .model import (
    ConfigError,
    ParameterError,
    StructuralParams,
    derive_composites,
    load_config,
    steady_state,
)
from .solver import (
    AssumptionError,
    BindingViolationError,
    SingularSystemError,
    calibrate_xi,
    deterministic_xi_range,
    solve_elb,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

#: base calibration used when no --config is given (also the figure base)
DEFAULT_CALIBRATION = {
    "beta": 0.99, "kappa": 0.1, "eta": 0.01, "phi_pi": 1.5,
    "delta": 0.05, "s_c": 0.8, "eps_g": 0.1, "p": 0.7, "nkpc": "static",
}

#: per-figure overrides on top of the base calibration
FIGURE_SETUPS = {
    1: {"overrides": {"kappa": 0.1, "delta": 0.05, "p": 0.7, "nkpc": "static"},
        "exit": "stochastic", "L_max": None},
    2: {"overrides": {"kappa": 0.001, "delta": 0.05, "p": 0.7, "nkpc": "hybrid"},
        "exit": "stochastic", "L_max": 160},
    3: {"overrides": {"kappa": 0.001, "delta": 0.02, "p": 0.7, "nkpc": "hybrid"},
        "exit": "stochastic", "L_max": 80},
    4: {"overrides": {"kappa": 0.001, "delta": 0.02, "p": 0.99, "nkpc": "hybrid"},
        "exit": "deterministic", "L_max": 60},
    5: {"overrides": {"kappa": 0.001, "delta": 0.02, "p": 0.7, "nkpc": "hybrid"},
        "exit": "deterministic", "L_max": 80},
}

SCENARIO_FLAGS = ("normal", "short-trap", "long-trap", "finite-L")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def provenance_line(params: StructuralParams, **extra) -> str:
    fields = [f"{k}={_fmt(getattr(params, k))}" for k in
              ("beta", "kappa", "eta", "phi_pi", "delta", "s_c", "eps_g", "p")]
    fields.append(f"nkpc={params.nkpc}")
    fields += [f"{k}={v}" for k, v in extra.items()]
    return "# " + " ".join(fields)


def write_csv(path: str | None, comment: str, header: list[str], rows) -> None:
    lines = [comment, ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_params(args) -> StructuralParams:
    if getattr(args, "config", None):
        return load_config(args.config)
    return derive_composites(DEFAULT_CALIBRATION)


def _trap_xi(params: StructuralParams, L: int, exit_mode: str, args) -> float:
    if getattr(args, "xi1", None) is not None:
        return args.xi1
    xi = calibrate_xi(params, L, exit_mode)
    scale = getattr(args, "xi_scale", 1.0) or 1.0
    return xi * scale


def _solve_scenario(params: StructuralParams, scenario: str, args):
    g1 = getattr(args, "g1", 0.0) or 0.0
    if scenario == "normal":
        return solve_elb(params, 0, g1, 0.0, "deterministic")
    if scenario == "short-trap":
        xi1 = _trap_xi(params, 0, "stochastic", args)
        return solve_elb(params, 0, g1, xi1, "stochastic")
    if scenario == "finite-L":
        if args.L is None:
            raise ConfigError("finite-L scenario needs --L")
        xi1 = _trap_xi(params, args.L, args.exit, args)
        return solve_elb(params, args.L, g1, xi1, args.exit)
    raise ConfigError(f"scenario {scenario!r} has no impulse-response path "
                      "(long-trap is multiplier-only)")


def cmd_steady(args) -> int:
    params = _load_params(args)
    ss = steady_state(params)
    for name in ("N", "C", "Y", "K", "G", "R", "W", "K_over_Y"):
        print(f"{name}={_fmt(getattr(ss, name))}")
    return EXIT_OK


def cmd_irf(args) -> int:
    params = _load_params(args)
    solution = _solve_scenario(params, args.scenario, args)
    path = irf(solution, args.horizon)
    comment = provenance_line(
        params, scenario=args.scenario, L=solution.L, exit=solution.exit_mode,
        g1=_fmt(solution.g1), xi1=_fmt(solution.xi1), horizon=args.horizon,
    )
    write_csv(args.out, comment, list(("horizon", "c", "pi", "r", "y", "g", "xi", "k")),
              path.rows())
    return EXIT_OK


MULTIPLIER_COLUMNS = [
    "scenario", "L", "exit", "dc1_dg", "dpi1_dg", "dy1_dg", "pdv_c",
    "m_waste", "q_deter", "q_exit", "eps_I", "eps_M", "eps_Mz", "eps_zc",
    "eps_zpi", "p_bar", "det_I_pA_star", "det_I_qA_star", "sr_pA_star", "sr_qA_star",
]


def _report_row(rep: analytics.MultiplierReport) -> list:
    d = rep.diagnostics
    return [
        rep.scenario, rep.L if rep.L is not None else "",
        rep.exit_mode or "", rep.dc1_dg, rep.dpi1_dg, rep.dy1_dg, rep.pdv_c,
        rep.m_waste, rep.q_deter, rep.q_exit, rep.eps_I, rep.eps_M, rep.eps_Mz,
        rep.eps_zc, rep.eps_zpi, d.p_bar, d.det_I_pA_star, d.det_I_qA_star,
        float(np.max(np.abs(d.eig_pA_star))), float(np.max(np.abs(d.eig_qA_star))),
    ]


_SCENARIO_MAP = {"normal": "normal", "short-trap": "short_trap",
                 "long-trap": "long_trap", "finite-L": "finite_L"}


def cmd_multiplier(args) -> int:
    params = _load_params(args)
    scenario = _SCENARIO_MAP[args.scenario]
    if scenario == "finite_L" and args.L is None:
        raise ConfigError("finite-L scenario needs --L")
    rep = analytics.multiplier_report(params, scenario, L=args.L, exit_mode=args.exit)
    comment = provenance_line(params, scenario=args.scenario, exit=args.exit)
    write_csv(args.out, comment, MULTIPLIER_COLUMNS, [_report_row(rep)])
    return EXIT_OK


def cmd_sweep(args) -> int:
    params = _load_params(args)
    if args.L_max < args.L_min or args.L_min < 0:
        raise ConfigError(f"need L_max >= L_min >= 0, got [{args.L_min}, {args.L_max}]")
    reports = analytics.sweep_L(params, range(args.L_min, args.L_max + 1), args.exit)
    comment = provenance_line(params, exit=args.exit, L_min=args.L_min, L_max=args.L_max)
    write_csv(args.out, comment, MULTIPLIER_COLUMNS, (_report_row(r) for r in reports))
    return EXIT_OK


def _figure_params(args, which: int) -> StructuralParams:
    base = dict(DEFAULT_CALIBRATION)
    if getattr(args, "config", None):
        loaded = load_config(args.config)
        base = {k: getattr(loaded, k) for k in base}
    base.update(FIGURE_SETUPS[which]["overrides"])
    return derive_composites(base)


def _fig1_rows(params: StructuralParams):
    """AS/AD loci in the (c1, pi1) plane, with and without a unit g shift.

    Two panels: eps_g high enough to crowd consumption in, and the wasteful
    eps_g = 0 benchmark where the rate response crowds it out.
    """
    for panel_eps, panel in ((params.eps_g, "crowd_in"), (0.0, "crowd_out")):
        p_panel = derive_composites({
            "beta": params.beta, "kappa": params.kappa, "eta": params.eta,
            "phi_pi": params.phi_pi, "delta": params.delta, "s_c": params.s_c,
            "eps_g": panel_eps, "p": params.p, "nkpc": params.nkpc,
        })
        mult = analytics.impact_multiplier_normal(p_panel)
        theta = analytics.theta_values(p_panel, "normal").Theta
        amp = 2.0 * max(abs(mult.dc1_dg), abs(mult.dpi1_dg) / p_panel.kappa, 0.005)
        grid = np.linspace(-amp, amp, 51)
        slope_ad = (1.0 - p_panel.p) / (p_panel.phi_pi - p_panel.p)
        for g_shock, tag in ((0.0, "base"), (1.0, "shift")):
            # Euler: c1 = shift - ((phi_pi-p)/(1-p)) pi1, with the medium-run
            # wealth term shift = Theta*eps_g*delta_tilde*g/(1-p)
            shift = theta * p_panel.eps_g * p_panel.delta_tilde * g_shock / (1.0 - p_panel.p)
            for c1 in grid:
                yield (panel, f"as_{tag}", c1,
                       p_panel.kappa * (p_panel.Gamma_c * c1 + p_panel.Gamma_g * g_shock))
                yield (panel, f"ad_{tag}", c1, (shift - c1) * slope_ad)
        yield (panel, "eq_base", 0.0, 0.0)
        yield (panel, "eq_shift", mult.dc1_dg, mult.dpi1_dg)


def cmd_figure(args) -> int:
    which = args.which
    if which not in FIGURE_SETUPS:
        raise ConfigError(f"figure id {which} not in 1..5")
    params = _figure_params(args, which)
    setup = FIGURE_SETUPS[which]
    if which == 1:
        comment = provenance_line(params, figure=1, note="loci per unit g shock")
        write_csv(args.out, comment, ["panel", "curve", "c", "pi"], _fig1_rows(params))
        return EXIT_OK
    L_max = args.L_max if args.L_max is not None else setup["L_max"]
    exit_mode = setup["exit"]
    reports = analytics.sweep_L(params, range(0, L_max + 1), exit_mode)
    rows = [(r.L, r.m_waste, r.q_deter, r.q_exit, r.dc1_dg) for r in reports]
    comment = provenance_line(params, figure=which, exit=exit_mode, L_min=0, L_max=L_max)
    write_csv(args.out, comment, ["L", "m_waste", "q_deter", "q_exit", "total"], rows)
    return EXIT_OK


def _selftest_suites(params: StructuralParams, seed: int) -> dict:
    suites: dict[str, dict] = {}

    ss = steady_state(params)
    ident = max(
        abs(ss.G - params.delta * ss.K),
        abs(ss.C - params.s_c * ss.Y),
        abs(ss.Y - ss.K**params.eps_g * ss.N),
        abs(ss.K_over_Y - (1.0 - params.s_c) / params.delta),
    )
    suites["steady_state_roundtrip"] = {"ok": ident <= 1e-12, "max_abs": ident}

    ar_err = 0.0
    for L in (0, 3):
        spec = build_chain(params, L, 1.0, 0.0)
        path = expectation_path(spec, spec.g_states, 40)
        ar_err = max(ar_err, float(np.max(np.abs(path - params.p ** np.arange(41)))))
    suites["ar1_reproduction"] = {"ok": ar_err <= 1e-12, "max_abs": ar_err}

    res_max = 0.0
    stack_max = 0.0
    failures: list[str] = []
    cases = [("normal", 0, "deterministic", 1.0, 0.0)]
    for L in (0, 1, 5):
        for exit_mode in ("stochastic", "deterministic"):
            xi1 = calibrate_xi(params, L, exit_mode)
            cases.append((f"trap_L{L}_{exit_mode}", L, exit_mode, 0.0, xi1))
    for name, L, exit_mode, g1, xi1 in cases:
        try:
            sol = solve_elb(params, L, g1, xi1, exit_mode)
        except BindingViolationError as exc:
            failures.append(f"{name}: {exc}")
            continue
        res_max = max(res_max, oracle.residual_check(sol, 60).max_abs)
        Y_direct = oracle.stacked_solve(params, L, xi1, g1, exit_mode)
        stack_max = max(stack_max, float(np.max(np.abs(Y_direct - sol.Y))))
    suites["residuals"] = {"ok": res_max <= 1e-10 and not failures,
                           "max_abs": res_max, "failures": failures}
    suites["stacked_vs_recursion"] = {"ok": stack_max <= 1e-10, "max_abs": stack_max}

    spec = build_chain(params, 3, 1.0, 0.0)
    sim = oracle.simulate_chain(spec, spec.g_states, 40, 100_000, seed)
    exact = expectation_path(spec, spec.g_states, 40)
    gap = np.abs(sim.means - exact)
    tol = 4.0 * oracle.chain_std_errors(spec, spec.g_states, 40, sim.n_paths) + 1e-12
    suites["monte_carlo"] = {"ok": bool(np.all(gap <= tol)),
                             "max_abs": float(np.max(gap - tol))}
    return suites


def cmd_selftest(args) -> int:
    params = _load_params(args)
    started = time.perf_counter()
    suites = _selftest_suites(params, args.seed)
    ok = all(s["ok"] for s in suites.values())
    summary = {
        "ok": ok,
        "residual_max": suites["residuals"]["max_abs"],
        "suites": suites,
        "elapsed_s": round(time.perf_counter() - started, 3),
    }
    print(json.dumps(summary, indent=2, default=float))
    return EXIT_OK if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elbcap",
        description="Public-investment multipliers at and away from the "
                    "interest-rate floor, via an exact Markov-chain solve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, scenario: bool = False) -> None:
        p.add_argument("--config", help="key=value parameter file")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        p.add_argument("--L", type=int, default=None, help="trap length (finite-L)")
        p.add_argument("--exit", choices=("stochastic", "deterministic"),
                       default="stochastic")
        p.add_argument("--g1", type=float, default=0.0, help="investment shock")
        p.add_argument("--xi1", type=float, default=None,
                       help="demand shock override (default: calibrated)")
        p.add_argument("--xi-scale", type=float, default=1.0, dest="xi_scale",
                       help="scale on the calibrated demand shock")
        p.add_argument("--seed", type=int, default=12345)
        if scenario:
            p.add_argument("--scenario", choices=SCENARIO_FLAGS, default="normal")

    p_steady = sub.add_parser("steady", help="print the nonlinear steady state")
    p_steady.add_argument("--config")
    p_steady.set_defaults(func=cmd_steady)

    p_irf = sub.add_parser("irf", help="impulse responses to CSV")
    common(p_irf, scenario=True)
    p_irf.add_argument("--horizon", type=int, default=60)
    p_irf.set_defaults(func=cmd_irf)

    p_mult = sub.add_parser("multiplier", help="impact/PDV multiplier report")
    common(p_mult, scenario=True)
    p_mult.set_defaults(func=cmd_multiplier)

    p_sweep = sub.add_parser("sweep", help="multiplier decomposition over L")
    common(p_sweep)
    p_sweep.add_argument("--L-min", type=int, default=0, dest="L_min")
    p_sweep.add_argument("--L-max", type=int, default=40, dest="L_max")
    p_sweep.set_defaults(func=cmd_sweep)

    p_fig = sub.add_parser("figure", help="dataset for one of the five figures")
    common(p_fig)
    p_fig.add_argument("which", type=int, help="figure id in 1..5")
    p_fig.add_argument("--L-max", type=int, default=None, dest="L_max")
    p_fig.set_defaults(func=cmd_figure)

    p_self = sub.add_parser("selftest", help="run the oracle suites, JSON summary")
    p_self.add_argument("--config")
    p_self.add_argument("--seed", type=int, default=12345)
    p_self.set_defaults(func=cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BindingViolationError, SingularSystemError, AssumptionError,
            analytics.VariantError) as exc:
        if getattr(args, "out", None):
            Path(args.out).unlink(missing_ok=True)  # no partial datasets
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
