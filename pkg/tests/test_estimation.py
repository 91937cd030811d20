import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphats import (DEFAULT_GRID, DegenerateInputError, EcfGrid, IllConditionedGridError,
                     StableParams, UnwrapError, ecf, ecf_phase, estimate_all,
                     estimate_alpha_sigma, estimate_beta_mu, sample, theta_from_params)
from conftest import cf_oracle


def _analytic_inputs(a, b, s, m, grid=DEFAULT_GRID):
    moduli = tuple(abs(cf_oracle(a, b, s, m, u)) for u in (grid.u1, grid.u2))
    # continuous phase written out, not taken from a principal-value angle
    phases = tuple(m * u + s ** a * u ** a * b * math.tan(math.pi * a / 2) for u in (grid.u3, grid.u4))
    return moduli, phases


class TestEcf:
    def test_unit_at_zero(self):
        assert ecf([3.0, -1.0, 7.0], 0.0) == 1 + 0j

    @given(st.floats(-100, 100), st.floats(-5, 5))
    def test_singleton(self, c, u):
        assert abs(ecf([c], u) - cmath.exp(1j * u * c)) < 1e-12

    @given(st.floats(-100, 100), st.floats(-5, 5))
    def test_symmetric_pair(self, c, u):
        v = ecf([-c, c], u)
        assert v.imag == pytest.approx(0.0, abs=1e-12)
        assert v.real == pytest.approx(math.cos(u * c), abs=1e-12)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50), st.floats(-10, 10))
    def test_bounded(self, xs, u):
        assert abs(ecf(xs, u)) <= 1 + 1e-12

    @pytest.mark.parametrize("bad", [[], [1.0, float("nan")], [float("inf")]])
    def test_rejects(self, bad):
        with pytest.raises(DegenerateInputError):
            ecf(bad, 0.5)

    def test_phase_unwraps_past_pi(self):
        # a point mass at 10 has phase 10u, beyond pi at u = 0.4
        assert ecf_phase([10.0] * 5, 0.4) == pytest.approx(4.0)

    def test_phase_ambiguous(self):
        with pytest.raises(UnwrapError):
            ecf_phase([0.0, 1000.0], 1.0)


class TestGrid:
    @pytest.mark.parametrize("kw", [dict(u1=0.0), dict(u1=0.5, u2=0.5), dict(u3=0.2, u4=0.2),
                                    dict(u4=-1.0), dict(u2=float("inf"))])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            EcfGrid(**kw)


class TestAlphaSigma:
    def test_exact_inversion_example(self):
        moduli = (math.exp(-0.2 ** 1.5), math.exp(-0.8 ** 1.5))
        a, s, clamped = estimate_alpha_sigma(None, moduli=moduli)
        assert a == pytest.approx(1.5, abs=1e-12)
        assert s == pytest.approx(1.0, abs=1e-12)
        assert not clamped

    @settings(max_examples=200)
    @given(st.floats(1.05, 1.99), st.floats(-1, 1), st.floats(0.2, 3.0), st.floats(-5, 5))
    def test_exact_inversion_property(self, a, b, s, m):
        moduli, _ = _analytic_inputs(a, b, s, m)
        if not all(0 < x < 1 for x in moduli):
            return
        a_hat, s_hat, _ = estimate_alpha_sigma(None, moduli=moduli)
        assert a_hat == pytest.approx(a, abs=1e-9)
        assert s_hat == pytest.approx(s, rel=1e-9)

    def test_gaussian_clamps(self):
        x = np.random.default_rng(0).normal(0, math.sqrt(2), 10_000)
        report = estimate_all(x)
        assert 1.9 <= report.params.alpha <= 2.0
        assert report.params.sigma == pytest.approx(1.0, rel=0.1)
        if report.params.alpha == 2.0:
            # skew is unidentified at the boundary and reported as zero
            assert report.alpha_clamped and report.beta_clamped
            assert report.params.beta == 0.0

    @pytest.mark.parametrize("moduli", [(1.0, 0.5), (0.5, 0.0), (0.3, 1.2)])
    def test_ill_conditioned(self, moduli):
        with pytest.raises(IllConditionedGridError) as info:
            estimate_alpha_sigma(None, moduli=moduli)
        assert info.value.u in (DEFAULT_GRID.u1, DEFAULT_GRID.u2)

    def test_constant_data_is_ill_conditioned(self):
        with pytest.raises(IllConditionedGridError):
            estimate_alpha_sigma(np.full(200, 3.0))

    def test_asymmetric_row_alpha(self):
        x = sample(StableParams(1.32, -0.13, 0.0006, 0.0), 10_000, np.random.default_rng(4))
        assert estimate_all(x).params.alpha == pytest.approx(1.32, abs=0.07)


class TestBetaMu:
    def test_exact_inversion_example(self):
        _, phases = _analytic_inputs(1.5, -0.5, 1.0, 2.0)
        b, m, clamped = estimate_beta_mu(None, 1.5, 1.0, phases=phases)
        assert b == pytest.approx(-0.5, abs=1e-12)
        assert m == pytest.approx(2.0, abs=1e-12)
        assert not clamped

    @settings(max_examples=200)
    @given(st.floats(1.05, 1.95), st.floats(-1, 1), st.floats(0.2, 3.0), st.floats(-5, 5))
    def test_exact_inversion_property(self, a, b, s, m):
        _, phases = _analytic_inputs(a, b, s, m)
        b_hat, m_hat, _ = estimate_beta_mu(None, a, s, phases=phases)
        assert b_hat == pytest.approx(b, abs=1e-8)
        assert m_hat == pytest.approx(m, abs=1e-8)

    def test_forced_symmetry(self):
        x = sample(StableParams(1.5, 0.7), 5_000, np.random.default_rng(8))
        data = np.concatenate([x, -x])
        b, m, _ = estimate_beta_mu(data, 1.5, 1.0)
        assert abs(b) <= 0.02
        assert abs(m) <= 1e-9

    def test_clamp_flag(self):
        a, s = 1.5, 1.0
        _, phases = _analytic_inputs(a, 1.0, s, 0.0)
        b, _, clamped = estimate_beta_mu(None, a, s, phases=(phases[0] * 1.5, phases[1] * 1.5))
        assert clamped and b == 1.0

    def test_tiny_denominator(self):
        with pytest.raises(IllConditionedGridError):
            estimate_beta_mu(None, 1.5, 1e-9, phases=(0.0, 0.0))

    def test_financial_row_beta(self):
        x = sample(StableParams(1.38, -0.21, 0.0011, 0.0), 10_000, np.random.default_rng(9))
        assert estimate_all(x).params.beta == pytest.approx(-0.21, abs=0.1)


class TestEstimateAll:
    def test_minimum_size(self):
        with pytest.raises(DegenerateInputError):
            estimate_all(np.arange(50.0))

    def test_constant(self):
        with pytest.raises(DegenerateInputError, match="interquartile"):
            estimate_all(np.full(500, 2.5))

    def test_report_fields(self):
        x = sample(StableParams(1.6, 0.2, 3.0, 1.0), 5_000, np.random.default_rng(2))
        r = estimate_all(x)
        assert r.n_samples == 5_000 and r.grid == DEFAULT_GRID
        assert r.residual < 0.05
        row = r.table_row()
        assert set(row) == {"theta", "alpha", "beta", "sigma"}
        assert row["theta"] == pytest.approx(theta_from_params(r.params))

    def test_benchmark_scale_symmetric(self):
        x = sample(StableParams(1.3, 0.0, 500.0, 0.0), 100_000, np.random.default_rng(3))
        assert abs(estimate_all(x).params.beta) <= 0.05

    def test_scale_equivariance(self):
        x = sample(StableParams(1.5, -0.4), 5_000, np.random.default_rng(6))
        r1, r2 = estimate_all(x), estimate_all(1e-4 * x)
        assert r2.params.alpha == pytest.approx(r1.params.alpha, abs=1e-9)
        assert r2.params.beta == pytest.approx(r1.params.beta, abs=1e-9)
        assert r2.params.sigma == pytest.approx(1e-4 * r1.params.sigma, rel=1e-9)

    def test_shift_equivariance(self):
        shifts = []
        for i in range(50):
            x = sample(StableParams(1.5, -0.4, 1.0, 0.0), 2_000, np.random.default_rng(100 + i))
            a, b = estimate_all(x), estimate_all(x + 7.0)
            assert b.params.alpha == pytest.approx(a.params.alpha, abs=1e-9)
            assert b.params.beta == pytest.approx(a.params.beta, abs=1e-9)
            shifts.append(b.params.mu - a.params.mu)
        shifts = np.array(shifts)
        assert abs(shifts.mean() - 7.0) <= 3 * shifts.std(ddof=1) / math.sqrt(50) + 1e-9

    def test_consistency_in_n(self):
        errs = []
        for n in (1_000, 10_000, 100_000):
            e = [abs(estimate_all(sample(StableParams(1.5, -0.3), n,
                                         np.random.default_rng([n, s]))).params.alpha - 1.5)
                 for s in range(15)]
            errs.append(np.median(e))
        assert errs[0] >= errs[1] >= errs[2]
