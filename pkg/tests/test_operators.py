"""Operator evaluation on closed-form profiles and grid fields.

Frozen values come from hand differentiation of the radial forms:
Delta_p u = |u'|^{p-2}((p-1)u'' + (n-1)u'/r), Delta_inf u = (u')^2 u''.
"""

import numpy as np
import pytest

import trudlab.operators as ops
from trudlab.exponent import INFINITY, Exponent
from trudlab.grids import RadialGrid, SpaceTimeField
from trudlab.operators import (
    DomainError,
    EvaluationError,
    PowerOrigin,
    RadialProfile,
    SpaceTimeFunction,
    UnsupportedExponentError,
    eval_inf_laplacian_radial,
    eval_p_laplacian_radial,
    fd_residual_on_field,
    log_form_residual,
    log_transform_consistency,
    trudinger_residual,
)


def power_profile(gamma, R=10.0, coeff=1.0):
    return RadialProfile(
        value=lambda r: coeff * r ** gamma,
        d1=lambda r: coeff * gamma * r ** (gamma - 1.0),
        d2=lambda r: coeff * gamma * (gamma - 1.0) * r ** (gamma - 2.0),
        R=R,
        origin=PowerOrigin(gamma, coeff),
    )


def heat_kernel(n):
    K = lambda r, t: t ** (-n / 2) * np.exp(-(r ** 2) / (4 * t))
    return SpaceTimeFunction(
        value=K,
        dr=lambda r, t: K(r, t) * (-r / (2 * t)),
        drr=lambda r, t: K(r, t) * ((r / (2 * t)) ** 2 - 1 / (2 * t)),
        dt=lambda r, t: K(r, t) * (-n / (2 * t) + r ** 2 / (4 * t ** 2)),
    )


class TestPLaplacianRadial:
    def test_distinguished_power_is_constant(self):
        # Delta_p r^{p/(p-1)} = n (p/(p-1))^{p-1}, at the axis included
        p = Exponent.finite(3)
        prof = power_profile(p.power_exponent)
        for r in [0.0, 0.3, 1.0, 5.0]:
            assert eval_p_laplacian_radial(prof, p, 2, r) == pytest.approx(4.5, abs=1e-12)

    @pytest.mark.parametrize("pv", [2.0, 2.5, 3.0, 4.0])
    @pytest.mark.parametrize("n", [2, 3])
    def test_power_constant_sweep(self, pv, n):
        p = Exponent.finite(pv)
        beta = p.power_exponent
        expected = n * beta ** (pv - 1.0)
        prof = power_profile(beta)
        r = np.linspace(0.0, 2.0, 13)
        vals = eval_p_laplacian_radial(prof, p, n, r)
        assert np.allclose(vals, expected, rtol=1e-12)

    def test_quadratic_gives_2n(self):
        prof = RadialProfile(lambda r: r ** 2, lambda r: 2.0 * r,
                             lambda r: 2.0 + 0.0 * np.asarray(r), R=5.0)
        for n in (2, 3, 5):
            assert eval_p_laplacian_radial(prof, Exponent.finite(2), n, 0.7) == pytest.approx(2 * n)
            assert eval_p_laplacian_radial(prof, Exponent.finite(2), n, 0.0) == pytest.approx(2 * n)

    def test_radial_p_harmonic_profiles(self):
        # r^{(p-n)/(p-1)} is p-harmonic away from the origin (p != n)
        for pv, n in [(4.0, 2), (3.0, 2), (2.5, 3), (4.0, 3)]:
            g = (pv - n) / (pv - 1.0)
            prof = power_profile(g, R=2.0)
            r = np.linspace(0.1, 1.0, 50)
            vals = eval_p_laplacian_radial(prof, Exponent.finite(pv), n, r)
            assert np.abs(vals).max() < 1e-9

    def test_log_profile_n_harmonic(self):
        # Delta_p log r = 0 when p = n
        prof = RadialProfile(lambda r: np.log(r), lambda r: 1.0 / r,
                             lambda r: -1.0 / r ** 2, R=2.0)
        for n in (2, 3):
            r = np.linspace(0.1, 1.0, 50)
            vals = eval_p_laplacian_radial(prof, Exponent.finite(n), n, r)
            assert np.abs(vals).max() < 1e-9

    def test_constant_profile_zero(self):
        prof = RadialProfile(lambda r: 3.0 + 0 * np.asarray(r),
                             lambda r: 0.0 * np.asarray(r),
                             lambda r: 0.0 * np.asarray(r), R=1.0)
        assert eval_p_laplacian_radial(prof, Exponent.finite(2.5), 3, 0.4) == 0.0

    def test_domain_and_exponent_errors(self):
        prof = power_profile(1.5, R=1.0)
        with pytest.raises(DomainError):
            eval_p_laplacian_radial(prof, Exponent.finite(3), 2, 1.5)
        with pytest.raises(DomainError):
            eval_p_laplacian_radial(prof, Exponent.finite(3), 2, -0.1)
        with pytest.raises(UnsupportedExponentError):
            eval_p_laplacian_radial(prof, INFINITY, 2, 0.5)

    def test_subcritical_power_unbounded_at_axis(self):
        prof = power_profile(1.1)
        with pytest.raises(EvaluationError):
            eval_p_laplacian_radial(prof, Exponent.finite(4), 2, 0.0)


class TestInfLaplacianRadial:
    def test_four_thirds_power(self):
        prof = power_profile(4.0 / 3.0)
        for r in [0.0, 0.5, 2.0]:
            assert eval_inf_laplacian_radial(prof, r) == pytest.approx(64.0 / 81.0, rel=1e-12)

    def test_linear_profile_zero(self):
        prof = RadialProfile(lambda r: np.asarray(r, float),
                             lambda r: 1.0 + 0 * np.asarray(r),
                             lambda r: 0.0 * np.asarray(r), R=3.0)
        assert eval_inf_laplacian_radial(prof, 1.3) == 0.0

    def test_quadratic_at_one(self):
        prof = RadialProfile(lambda r: r ** 2, lambda r: 2.0 * r,
                             lambda r: 2.0 + 0 * np.asarray(r), R=3.0)
        assert eval_inf_laplacian_radial(prof, 1.0) == pytest.approx(8.0)


class TestParabolicResiduals:
    def test_positive_constant_is_stationary(self):
        u = SpaceTimeFunction(lambda r, t: 4.0 + 0 * np.asarray(r) + 0 * np.asarray(t),
                              lambda r, t: 0.0 * np.asarray(r),
                              lambda r, t: 0.0 * np.asarray(r),
                              lambda r, t: 0.0 * np.asarray(r))
        for p in (Exponent.finite(2), Exponent.finite(3.5), INFINITY):
            assert trudinger_residual(u, p, 3, (0.4, 1.0)) == 0.0
            assert log_form_residual(u, p, 3, (0.4, 1.0)) == 0.0

    def test_heat_kernel_annihilated(self):
        K = heat_kernel(2)
        assert abs(trudinger_residual(K, Exponent.finite(2), 2, (1.0, 1.0))) < 1e-12

    def test_linear_in_time_log_form(self):
        a = 0.7
        v = SpaceTimeFunction(lambda r, t: a * np.asarray(t) + 0 * np.asarray(r),
                              lambda r, t: 0.0 * np.asarray(r),
                              lambda r, t: 0.0 * np.asarray(r),
                              lambda r, t: a + 0 * np.asarray(r))
        assert log_form_residual(v, Exponent.finite(3), 2, (0.3, 0.5)) == pytest.approx(-2 * a)

    def test_infinity_branch_never_calls_finite_path(self, monkeypatch):
        def boom(*args, **kwargs):
            raise AssertionError("finite-p path invoked on the infinity branch")

        monkeypatch.setattr(ops, "_trudinger_terms_finite", boom)
        monkeypatch.setattr(ops, "_log_form_terms_finite", boom)
        u = SpaceTimeFunction(lambda r, t: 2.0 + 0 * np.asarray(r) + 0 * np.asarray(t),
                              lambda r, t: 0.0 * np.asarray(r),
                              lambda r, t: 0.0 * np.asarray(r),
                              lambda r, t: 0.0 * np.asarray(r))
        assert trudinger_residual(u, INFINITY, 2, (0.5, 0.5)) == 0.0
        assert log_form_residual(u, INFINITY, 2, (0.5, 0.5)) == 0.0


class TestLogTransformConsistency:
    def setup_method(self):
        e = lambda r, t: np.exp(np.asarray(r) ** 2 + np.asarray(t))
        self.u = SpaceTimeFunction(
            value=e,
            dr=lambda r, t: 2 * np.asarray(r) * e(r, t),
            drr=lambda r, t: (2 + 4 * np.asarray(r) ** 2) * e(r, t),
            dt=e,
        )
        rng = np.random.default_rng(7)
        self.pts = (rng.uniform(0.05, 1.5, 100), rng.uniform(0.1, 1.5, 100))

    def test_exponential_all_branches(self):
        for p in (Exponent.finite(2), Exponent.finite(3), INFINITY):
            dev = log_transform_consistency(self.u, p, 2, self.pts)
            assert dev < 1e-8

    def test_constant_exact(self):
        one = SpaceTimeFunction(lambda r, t: 1.0 + 0 * np.asarray(r) + 0 * np.asarray(t),
                                lambda r, t: 0.0 * np.asarray(r),
                                lambda r, t: 0.0 * np.asarray(r),
                                lambda r, t: 0.0 * np.asarray(r))
        assert log_transform_consistency(one, Exponent.finite(3), 2, self.pts) == 0.0

    def test_heat_kernel(self):
        dev = log_transform_consistency(heat_kernel(2), Exponent.finite(2), 2, self.pts)
        assert dev < 1e-8

    def test_positivity_enforced(self):
        w = SpaceTimeFunction(lambda r, t: np.asarray(r) - 1.0 + 0 * np.asarray(t),
                              lambda r, t: 1.0 + 0 * np.asarray(r),
                              lambda r, t: 0.0 * np.asarray(r),
                              lambda r, t: 0.0 * np.asarray(r))
        with pytest.raises(EvaluationError):
            log_transform_consistency(w, Exponent.finite(2), 2, self.pts)


class TestFieldResidual:
    def test_constant_field_zero(self):
        grid = RadialGrid(1.0, 11)
        field = SpaceTimeField(np.ones((5, 11)), grid, np.linspace(0, 1, 5))
        res = fd_residual_on_field(field, Exponent.finite(3), 2)
        assert np.abs(res).max() == 0.0

    def test_too_small_grid_rejected(self):
        grid = RadialGrid(1.0, 3)
        field = SpaceTimeField(np.ones((1, 3)), grid, np.array([0.0]))
        with pytest.raises(DomainError):
            fd_residual_on_field(field, Exponent.finite(2), 2)

    def test_heat_kernel_richardson(self):
        # dt proportional to h^2: the residual shrinks ~4x per halving of h
        n = 2
        K = lambda r, t: t ** (-n / 2) * np.exp(-(r ** 2) / (4 * t))
        maxima = []
        for h in (4e-3, 2e-3, 1e-3):
            grid = RadialGrid(1.0, int(round(1.0 / h)) + 1)
            dt = 100 * h ** 2
            times = 0.5 + np.arange(4) * dt
            field = SpaceTimeField(K(grid.r[None, :], times[:, None]), grid, times)
            res = fd_residual_on_field(field, Exponent.finite(2), n)
            maxima.append(np.abs(res).max())
        ratios = [maxima[i] / maxima[i + 1] for i in range(2)]
        assert all(3.3 < r < 4.8 for r in ratios), ratios

    def test_spatial_consistency_order_away_from_axis(self):
        # time-constant field: the residual reduces to the discrete Delta_p
        p = Exponent.finite(3)
        n = 2
        prof = RadialProfile(lambda r: np.cos(r) + 2.0, lambda r: -np.sin(r),
                             lambda r: -np.cos(r), R=1.0)
        errs, hs = [], []
        for count in (51, 101, 201, 401):
            grid = RadialGrid(1.0, count)
            vals = np.tile(prof.value(grid.r), (2, 1))
            field = SpaceTimeField(vals, grid, np.array([0.0, 1.0]))
            res = fd_residual_on_field(field, p, n)[0]
            exact = eval_p_laplacian_radial(prof, p, n, grid.r[:-1])
            window = (grid.r[:-1] >= 0.2)
            errs.append(np.abs(res - exact)[window].max())
            hs.append(grid.h)
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert 1.8 <= slope <= 2.2, slope
