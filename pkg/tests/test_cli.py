import csv
import json
import math

import numpy as np
import pytest

from elbcap.cli import main
from conftest import BASE


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_config(tmp_path, overrides=None, drop=None):
    raw = dict(BASE)
    if overrides:
        raw.update(overrides)
    if drop:
        raw.pop(drop)
    path = tmp_path / "params.cfg"
    path.write_text("\n".join(f"{k}={v}" for k, v in raw.items()) + "\n")
    return str(path)


def read_csv(path):
    with open(path) as fh:
        comment = fh.readline()
        assert comment.startswith("# ")
        return comment, list(csv.DictReader(fh))


class TestSteady:
    def test_prints_rate(self, capsys, tmp_path):
        code, out, _ = run(capsys, "steady", "--config", write_config(tmp_path))
        assert code == 0
        values = dict(line.split("=") for line in out.strip().splitlines())
        assert float(values["R"]) == pytest.approx(0.0101, abs=1e-4)

    def test_identities_echoed(self, capsys, tmp_path):
        code, out, _ = run(capsys, "steady", "--config", write_config(tmp_path))
        v = {k: float(x) for k, x in
             (line.split("=") for line in out.strip().splitlines())}
        assert v["G"] == pytest.approx(0.05 * v["K"], rel=1e-12)
        assert v["C"] == pytest.approx(0.8 * v["Y"], rel=1e-12)
        assert v["K_over_Y"] == pytest.approx(4.0, rel=1e-12)

    def test_missing_key_exits_2(self, capsys, tmp_path):
        code, _, err = run(capsys, "steady", "--config",
                           write_config(tmp_path, drop="p"))
        assert code == 2 and "missing" in err

    def test_unknown_key_exits_2(self, capsys, tmp_path):
        code, _, err = run(capsys, "steady", "--config",
                           write_config(tmp_path, overrides={"sigma": 1.0}))
        assert code == 2 and "unknown" in err


class TestIrf:
    def test_zero_shocks_all_zero(self, tmp_path, capsys):
        out = tmp_path / "irf.csv"
        code, _, _ = run(capsys, "irf", "--scenario", "normal",
                         "--out", str(out), "--horizon", "10")
        assert code == 0
        _, rows = read_csv(out)
        assert [r for r in rows[0]] == ["horizon", "c", "pi", "r", "y", "g", "xi", "k"]
        for row in rows:
            assert all(float(row[k]) == 0.0 for k in ("c", "pi", "r", "y", "g", "xi", "k"))

    def test_normal_impact_matches_closed_form(self, tmp_path, capsys):
        out = tmp_path / "irf.csv"
        run(capsys, "irf", "--scenario", "normal", "--g1", "1.0", "--out", str(out))
        from elbcap import derive_composites, impact_multiplier_normal
        m = impact_multiplier_normal(derive_composites(BASE))
        _, rows = read_csv(out)
        assert float(rows[0]["c"]) == pytest.approx(m.dc1_dg, rel=1e-12)
        assert float(rows[0]["y"]) == pytest.approx(m.dy1_dg, rel=1e-12)

    def test_trap_rate_pinned_at_floor(self, tmp_path, capsys):
        out = tmp_path / "irf.csv"
        code, _, _ = run(capsys, "irf", "--scenario", "finite-L", "--L", "5",
                         "--exit", "stochastic", "--out", str(out))
        assert code == 0
        _, rows = read_csv(out)
        floor = math.log(BASE["beta"])
        for row in rows[:6]:  # horizons 0..L sit in binding states
            assert float(row["r"]) == pytest.approx(floor, abs=1e-12)
        assert float(rows[6]["r"]) > floor

    def test_solver_failure_exits_3_and_removes_output(self, tmp_path, capsys):
        out = tmp_path / "irf.csv"
        out.write_text("stale")
        code, _, err = run(capsys, "irf", "--scenario", "finite-L", "--L", "3",
                           "--xi1", "0.0", "--out", str(out))
        assert code == 3 and "pattern" in err
        assert not out.exists()

    def test_long_trap_rejected_for_irf(self, capsys):
        code, _, err = run(capsys, "irf", "--scenario", "long-trap")
        assert code == 2


class TestMultiplier:
    def test_output_identity_every_scenario(self, tmp_path, capsys):
        cfg = write_config(tmp_path, overrides={"kappa": 0.001})
        for scenario in ("normal", "short-trap", "long-trap"):
            out = tmp_path / f"{scenario}.csv"
            code, _, _ = run(capsys, "multiplier", "--scenario", scenario,
                             "--config", cfg, "--out", str(out))
            assert code == 0
            _, rows = read_csv(out)
            row = rows[0]
            assert float(row["dy1_dg"]) == pytest.approx(
                0.8 * float(row["dc1_dg"]) + 1.0, abs=1e-14)

    def test_wasteful_crowds_out_in_normal_times(self, tmp_path, capsys):
        cfg = write_config(tmp_path, overrides={"eps_g": 0.0})
        out = tmp_path / "m.csv"
        run(capsys, "multiplier", "--scenario", "normal", "--config", cfg,
            "--out", str(out))
        _, rows = read_csv(out)
        assert float(rows[0]["dc1_dg"]) < 0.0

    def test_short_trap_positive_below_threshold(self, tmp_path, capsys):
        cfg = write_config(tmp_path, overrides={"kappa": 0.001})
        out = tmp_path / "m.csv"
        run(capsys, "multiplier", "--scenario", "short-trap", "--config", cfg,
            "--out", str(out))
        _, rows = read_csv(out)
        assert float(rows[0]["dc1_dg"]) > 0.0


class TestSweepAndFigures:
    def test_sweep_rows_and_sum(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code, _, _ = run(capsys, "sweep", "--L-min", "0", "--L-max", "6",
                         "--out", str(out))
        assert code == 0
        _, rows = read_csv(out)
        assert [int(r["L"]) for r in rows] == list(range(7))
        for r in rows:
            total = float(r["m_waste"]) + float(r["q_deter"]) + float(r["q_exit"])
            assert total == pytest.approx(float(r["dc1_dg"]), abs=1e-14)

    def test_sweep_bad_range_exits_2(self, capsys):
        code, _, _ = run(capsys, "sweep", "--L-min", "5", "--L-max", "2")
        assert code == 2

    def test_figure_datasets(self, tmp_path, capsys):
        for which, cols in ((1, {"panel", "curve", "c", "pi"}),
                            (2, {"L", "m_waste", "q_deter", "q_exit", "total"})):
            out = tmp_path / f"fig{which}.csv"
            code, _, _ = run(capsys, "figure", str(which), "--out", str(out))
            assert code == 0
            comment, rows = read_csv(out)
            assert set(rows[0]) == cols
            assert "eps_g=" in comment and "s_c=" in comment

    def test_fig1_loci_intersect_at_solution(self, tmp_path, capsys):
        out = tmp_path / "fig1.csv"
        run(capsys, "figure", "1", "--out", str(out))
        _, rows = read_csv(out)
        from elbcap import derive_composites, impact_multiplier_normal
        m = impact_multiplier_normal(derive_composites(BASE))
        eq = [r for r in rows if r["panel"] == "crowd_in" and r["curve"] == "eq_shift"]
        assert float(eq[0]["c"]) == pytest.approx(m.dc1_dg, rel=1e-12)
        assert float(eq[0]["pi"]) == pytest.approx(m.dpi1_dg, rel=1e-12)
        # the AS locus evaluated at the solved c passes through the solved pi
        prm = derive_composites(BASE)
        assert m.dpi1_dg == pytest.approx(
            prm.kappa * (prm.Gamma_c * m.dc1_dg + prm.Gamma_g), rel=1e-12)

    def test_fig2_components_flat_beyond_100(self, tmp_path, capsys):
        # hybrid-variant convergence is geometric at rate q*lambda_max ~ 0.976:
        # increments shrink and the tail is flat relative to the level
        out = tmp_path / "fig2.csv"
        run(capsys, "figure", "2", "--out", str(out))
        _, rows = read_csv(out)
        tot = {int(r["L"]): float(r["total"]) for r in rows}
        assert abs(tot[160] - tot[100]) < 0.5 * abs(tot[100] - tot[40])
        assert abs(tot[160] - tot[100]) < 0.1 * abs(tot[160])

    def test_fig4_peak_near_20(self, tmp_path, capsys):
        out = tmp_path / "fig4.csv"
        run(capsys, "figure", "4", "--out", str(out))
        _, rows = read_csv(out)
        totals = [float(r["total"]) for r in rows if int(r["L"]) >= 1]
        peak_L = int(np.argmax(totals)) + 1
        assert 15 <= peak_L <= 25

    def test_figure_id_out_of_range(self, capsys):
        code, _, _ = run(capsys, "figure", "9")
        assert code == 2


class TestSelftest:
    def test_clean_build_exit_0_json(self, capsys):
        code, out, _ = run(capsys, "selftest", "--seed", "7")
        assert code == 0
        summary = json.loads(out)
        assert summary["ok"] is True
        assert summary["residual_max"] <= 1e-10
        assert set(summary["suites"]) >= {"residuals", "stacked_vs_recursion",
                                          "monte_carlo"}

    def test_invalid_parameter_surfaced(self, capsys, tmp_path):
        cfg = write_config(tmp_path, overrides={"phi_pi": 0.9})
        code, _, err = run(capsys, "selftest", "--config", cfg)
        assert code == 2 and "phi_pi" in err


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            code, _, _ = run(capsys, "irf", "--scenario", "finite-L", "--L", "4",
                             "--g1", "0.0", "--out", str(path))
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_figure_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            run(capsys, "figure", "3", "--out", str(path))
        assert a.read_bytes() == b.read_bytes()
