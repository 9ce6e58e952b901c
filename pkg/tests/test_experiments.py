import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaborapprox import FrameParams, GaussianMixture, LatticeIndex, RichardsonConfig
from gaborapprox.dual import default_bounds
from gaborapprox.experiments import (
    SweepConfig,
    distant_state,
    dual_gram_profile,
    fit_loglog,
    random_mixture,
    run_coefficient_decay,
    run_convergence_sweep,
    run_dual_decay,
    run_frame_bounds,
    run_sharpness,
)
from gaborapprox.mixtures import mixture_inner_product
from gaborapprox.sobolev import weighted_sobolev_norm

D_SMALL = (1.5, 2.0, 3.0, 4.0)


class TestFit:
    @given(slope=st.floats(-8, 2), c=st.floats(-3, 3))
    def test_exact_power_law(self, slope, c):
        x = np.array([1.0, 2.0, 3.0, 5.0])
        s, icpt, r2 = fit_loglog(x, np.exp(c) * x**slope)
        assert s == pytest.approx(slope, abs=1e-9)
        assert icpt == pytest.approx(c, abs=1e-9)
        assert r2 == pytest.approx(1.0, abs=1e-9) or slope == pytest.approx(0, abs=1e-9)

    def test_too_few_points(self):
        assert all(math.isnan(v) for v in fit_loglog([1.0], [1.0]))


class TestSweepConfig:
    @pytest.mark.parametrize("kw", [
        {"D_values": (1.0, 2.0)},
        {"D_values": (1.0, 3.0, 2.0)},
        {"D_values": (0.0, 1.0, 2.0)},
        {"test_function": "nope"},
        {"p": 3, "r": 2},
    ])
    def test_rejects(self, p1, kw):
        base = {"D_values": D_SMALL}
        with pytest.raises(ValueError):
            SweepConfig(p1, **(base | kw))


class TestSweep:
    def test_rows_ordered_and_deterministic(self, p1):
        a = run_convergence_sweep(SweepConfig(p1, D_SMALL, jobs=1))
        b = run_convergence_sweep(SweepConfig(p1, D_SMALL, jobs=4))
        assert [r.D for r in b.rows] == list(D_SMALL)
        assert a.errors == b.errors
        assert [r.norm_ratio for r in a.rows] == [r.norm_ratio for r in b.rows]
        assert a.slope == b.slope

    def test_columns(self, p1):
        res = run_convergence_sweep(SweepConfig(p1, D_SMALL, r=2))
        u = GaussianMixture.single(p1, LatticeIndex.origin(1))
        ref = weighted_sobolev_norm(u, 2)
        for row in res.rows:
            assert row.error >= 0 and row.wall_time_ms > 0 and row.failure is None
            assert row.norm_ratio == pytest.approx(row.error * row.D**2 / ref, rel=1e-14)
        upper = res.rows[2:]
        s, _, r2 = fit_loglog([r.D for r in upper], [r.error for r in upper])
        assert (res.slope, res.r_squared) == (s, r2)
        assert math.isnan(res.rows[0].slope_running)
        assert res.rows[-1].slope_running == pytest.approx(fit_loglog(D_SMALL, res.errors)[0])

    def test_monotone_errors(self, p1):
        errs = run_convergence_sweep(SweepConfig(p1, (1.5, 2.0, 2.5, 3.0, 3.5, 4.0))).errors
        assert all(b <= a for a, b in zip(errs, errs[1:]))

    def test_solver_failure_recorded(self, p1):
        res = run_convergence_sweep(SweepConfig(p1, D_SMALL, solver=RichardsonConfig(max_iter=1)))
        assert all(r.failure for r in res.rows)
        assert all(math.isnan(r.error) for r in res.rows)

    def test_solver_tolerance_is_not_the_bottleneck(self, p1):
        tol = 1e-10
        a = run_convergence_sweep(SweepConfig(p1, D_SMALL, solver=RichardsonConfig(tol=tol))).errors
        b = run_convergence_sweep(SweepConfig(p1, D_SMALL, solver=RichardsonConfig(tol=2 * tol))).errors
        assert all(abs(x - y) < 10 * tol for x, y in zip(a, b))

    def test_mixture_test_function(self, p1):
        cfg = SweepConfig(p1, D_SMALL, test_function="mixture", seed=3)
        assert len(run_convergence_sweep(cfg).rows) == 4


class TestDecay:
    def test_zeroth_order_is_frame_quotient(self, p1):
        b = default_bounds(1)
        for seed in range(3):
            row = run_coefficient_decay(random_mixture(p1, 3, 2.0, seed), [0])[0]
            assert b.alpha_sq * 0.999 <= row.ratio <= b.beta_sq * 1.001

    def test_zero(self, p1):
        rows = run_coefficient_decay(GaussianMixture(p1), [0, 1])
        assert [r.weighted_sum for r in rows] == [0.0, 0.0]

    @pytest.mark.parametrize("k, expected", [(1.0, (1.920749, 3.997417)), (4.0, (0.768300, 0.763552))])
    def test_frozen_ground_state(self, k, expected):
        u = GaussianMixture.single(FrameParams(k, 1), LatticeIndex.origin(1))
        rows = run_coefficient_decay(u, [1, 2])
        assert [r.ratio for r in rows] == pytest.approx(expected, rel=1e-5)

    def test_weighted_sum_scales_with_k(self):
        # coefficients are k-invariant while lattice points shrink like k^{-1/2}
        s = [run_coefficient_decay(GaussianMixture.single(FrameParams(k, 1), LatticeIndex.origin(1)), [2])[0].weighted_sum
             for k in (1.0, 4.0)]
        assert s[0] / s[1] == pytest.approx(16.0, rel=1e-10)

    def test_dual_zeroth_order(self, p1):
        b = default_bounds(1)
        for seed in range(2):
            u = random_mixture(p1, 3, 2.0, seed)
            row = run_dual_decay(u, [0])[0]
            assert 1 / b.beta_sq * 0.95 <= row.ratio <= 1 / b.alpha_sq * 1.05

    def test_dual_higher_orders_finite(self, p1):
        u = GaussianMixture.single(p1, LatticeIndex.origin(1))
        rows = run_dual_decay(u, [1, 2])
        assert all(math.isfinite(r.weighted_sum) and r.weighted_sum > 0 for r in rows)

    def test_dual_zero(self, p1):
        assert run_dual_decay(GaussianMixture(p1), [1])[0].weighted_sum == 0

    def test_gram_profile(self, p1):
        assert dual_gram_profile(p1, 3) == pytest.approx([0.25188, 0.10728, 0.010905], rel=2e-3)


class TestSharpness:
    def test_distant_index(self):
        assert distant_state(FrameParams(4.0, 2), 3.0).indices[0].m == (12, 0)

    def test_requires_large_D(self):
        with pytest.raises(ValueError):
            run_sharpness(FrameParams(1.0, 1), 0, 1, 0.5)

    @pytest.mark.parametrize("r, ratio", [(1, 0.27963), (2, 0.078028)])
    def test_frozen_ratio(self, p1, r, ratio):
        rep = run_sharpness(p1, 0, r, 3.0)
        assert rep.m_star == (6,)
        assert rep.error == pytest.approx(1.0, abs=1e-6)
        assert rep.projection_norm <= 1e-3
        assert rep.ratio == pytest.approx(ratio, rel=1e-4)


def test_frame_bound_rows(p1):
    rows = run_frame_bounds(p1, [4, 6])
    assert [r.radius for r in rows] == [4, 6]
    assert all(0 < r.alpha_sq <= r.beta_sq and 0 <= r.gamma < 1 for r in rows)


def test_random_mixture_is_unit(p1):
    u = random_mixture(p1, 4, 2.0, 9)
    assert len(u) == 4
    assert mixture_inner_product(u, u).real == pytest.approx(1.0, rel=1e-12)
