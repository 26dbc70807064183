import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elbcap import (
    build_chain,
    build_transition,
    capital_states,
    exogenous_states,
    expectation,
    expectation_path,
    geometric_ratio,
)
from elbcap.chain import discounted_sum
from conftest import make_params


class TestTransition:
    def test_three_state_boildown(self):
        P = build_transition(0, 0.7, 0.95)
        expected = np.array([[0.7, 0.3, 0.0], [0.0, 0.95, 0.05], [0.0, 0.0, 1.0]])
        assert np.allclose(P, expected, atol=1e-15)

    def test_L1_first_row_is_shift(self):
        P = build_transition(1, 0.7, 0.95)
        assert P.shape == (4, 4)
        assert np.array_equal(P[0], [0.0, 1.0, 0.0, 0.0])

    @given(L=st.integers(0, 60), p=st.floats(0.01, 0.99), q=st.floats(0.01, 0.99))
    @settings(max_examples=200, deadline=None)
    def test_rows_are_distributions(self, L, p, q):
        P = build_transition(L, p, q)
        assert np.all(P >= 0.0) and np.all(P <= 1.0)
        assert np.max(np.abs(P.sum(axis=1) - 1.0)) <= 1e-14

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            build_transition(-1, 0.7, 0.95)
        with pytest.raises(ValueError):
            build_transition(2, 1.0, 0.95)


class TestExogenousStates:
    def test_L0(self):
        assert np.array_equal(exogenous_states(0, 0.7, 1.0), [1.0, 0.0, 0.0])

    def test_geometric_decay(self):
        z = exogenous_states(2, 0.7, 1.0)
        assert z == pytest.approx([1.0, 0.7, 0.49, 0.0, 0.0], abs=1e-15)

    @pytest.mark.parametrize("L", [0, 1, 4])
    def test_matrix_power_oracle(self, L):
        # E_t Z_{t+n} = u P^n z must equal p**n * z1 at every horizon
        p, q, z1 = 0.7, 0.95, 1.3
        spec = build_chain(make_params(p=p, delta=1 - q), L, z1, 0.0)
        P_n = np.eye(L + 3)
        for n in range(0, L + 8):
            expected = z1 * p**n
            assert spec.u @ P_n @ spec.g_states == pytest.approx(expected, abs=1e-13)
            P_n = P_n @ spec.P

    def test_ar1_reproduction_tolerance(self):
        for L in (0, 2, 7):
            spec = build_chain(make_params(), L, 1.0, 0.0)
            path = expectation_path(spec, spec.g_states, 40)
            assert np.max(np.abs(path - 0.7 ** np.arange(41))) <= 1e-12


class TestCapitalStates:
    def test_first_state_zero(self):
        for L in (0, 1, 5):
            assert capital_states(L, 0.7, 0.95, 0.25, 1.0)[0] == 0.0

    def test_L0_single_interior_state(self):
        k = capital_states(0, 0.7, 0.95, 0.25, 2.0)
        assert k == pytest.approx([0.0, 0.25 * 2.0 / 0.3, 0.0], abs=1e-15)

    def test_last_state_zero(self):
        assert capital_states(6, 0.7, 0.95, 0.25, 1.0)[-1] == 0.0

    def test_arma21_closed_form(self):
        # u P^{L+m} k must match (q**(L+m) - p**(L+m))/(q-p) * k2 for m = 0..10
        L, p, q, dt, g1 = 3, 0.7, 0.95, 0.25, 1.0
        spec = build_chain(make_params(p=p, delta=1 - q), L, g1, 0.0)
        k2 = dt * g1
        v = spec.u.copy()
        for _ in range(L):
            v = v @ spec.P
        for m in range(0, 11):
            expected = (q ** (L + m) - p ** (L + m)) / (q - p) * k2
            assert v @ spec.k_states == pytest.approx(expected, abs=1e-13)
            v = v @ spec.P

    def test_capital_law_in_expectations(self):
        # E_t K_{t+n} = (1-delta) E_t K_{t+n-1} + delta_tilde E_t G_{t+n-1}
        prm = make_params()
        for L in (0, 2, 9):
            spec = build_chain(prm, L, 1.0, 0.0)
            k = expectation_path(spec, spec.k_states, 30)
            g = expectation_path(spec, spec.g_states, 30)
            resid = k[1:] - prm.q * k[:-1] - prm.delta_tilde * g[:-1]
            assert np.max(np.abs(resid)) <= 1e-13
            assert k[0] == 0.0


class TestGeometricRatio:
    def test_plain(self):
        assert geometric_ratio(3, 0.7, 0.95) == pytest.approx(
            (0.95**3 - 0.7**3) / 0.25, rel=1e-15)

    def test_degenerate_limit(self):
        # q -> p limit is ell * p**(ell-1); approach from nearby q
        p = 0.9
        for ell in (1, 2, 5):
            lim = geometric_ratio(ell, p, p + 1e-10)
            assert lim == pytest.approx(ell * p ** (ell - 1), rel=1e-6)

    def test_capital_states_degenerate_no_nan(self):
        k = capital_states(4, 0.9, 0.9, 0.25, 1.0)
        assert np.all(np.isfinite(k))
        assert k[2] == pytest.approx(2 * 0.9 * 0.25, rel=1e-12)


class TestExpectation:
    def test_horizon_zero_is_first_state(self, params):
        spec = build_chain(params, 2, 1.5, 0.0)
        assert expectation(spec, spec.g_states, 0) == 1.5

    def test_absorbs_to_zero(self, params):
        spec = build_chain(params, 0, 1.0, 0.5)
        assert abs(expectation(spec, spec.g_states, 400)) < 1e-10

    def test_conditional_mix_at_exit(self, params):
        # from the first state of the 3-state chain: p pi1 + (1-p) pi2
        spec = build_chain(params, 0, 0.0, 0.0)
        states = np.array([2.0, -3.0, 0.0])
        expected = 0.7 * 2.0 + 0.3 * (-3.0)
        assert expectation(spec, states, 1) == pytest.approx(expected, abs=1e-15)

    def test_dimension_mismatch(self, params):
        spec = build_chain(params, 0, 0.0, 0.0)
        with pytest.raises(ValueError, match="shape"):
            expectation(spec, np.zeros(5), 1)
        with pytest.raises(ValueError, match="horizon"):
            expectation(spec, np.zeros(3), -1)

    @given(a=st.floats(-5, 5), b=st.floats(-5, 5), n=st.integers(0, 20),
           seed=st.integers(0, 2**31))
    @settings(max_examples=100, deadline=None)
    def test_linearity(self, a, b, n, seed):
        spec = build_chain(make_params(), 3, 1.0, 0.0)
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=6), rng.normal(size=6)
        lhs = expectation(spec, a * x + b * y, n)
        rhs = a * expectation(spec, x, n) + b * expectation(spec, y, n)
        assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(a) + abs(b)))

    def test_discounted_sum_matches_truncation(self, params):
        spec = build_chain(params, 2, 1.0, 0.3)
        closed = discounted_sum(spec, spec.k_states, params.beta)
        acc, v = 0.0, spec.u.copy()
        for n in range(4000):
            acc += params.beta**n * float(v @ spec.k_states)
            v = v @ spec.P
        assert closed == pytest.approx(acc, rel=1e-12)
