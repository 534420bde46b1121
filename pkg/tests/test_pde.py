"""Radial time stepping: oracles, convergence orders, order properties.

The p = 2 case is the heat equation; 1 + c e^{-pi^2 t} sin(pi r)/(pi r) is an
exact positive solution on the unit ball in three dimensions and serves as
the separation-of-variables oracle throughout.
"""

import numpy as np
import pytest

from trudlab.exponent import INFINITY, Exponent
from trudlab.grids import RadialGrid, SpaceTimeField
from trudlab.operators import fd_residual_on_field
from trudlab.pde import (
    DIRECT_EXPLICIT,
    LOG_IMPLICIT,
    ConfigError,
    SolverConfig,
    comparison_check,
    max_principle_check,
    measure_decay_rate,
    solve_trudinger_radial,
)

from conftest import sinc_profile


def heat_oracle(r, t, amplitude=0.5):
    return 1.0 + amplitude * np.exp(-np.pi ** 2 * np.asarray(t)) * sinc_profile(r)


def heat_config(nodes=101, t_end=0.05, dt=1e-4, scheme=LOG_IMPLICIT):
    return SolverConfig(
        p=Exponent.finite(2), n=3, R=1.0, nodes=nodes, t_end=t_end,
        scheme=scheme, boundary=lambda t: 1.0,
        initial=lambda r: heat_oracle(r, 0.0), dt=dt)


class TestConfigValidation:
    def test_incompatible_corner_rejected(self):
        cfg = SolverConfig(p=Exponent.finite(2), n=2, R=1.0, nodes=21, t_end=0.1,
                           scheme=LOG_IMPLICIT, boundary=lambda t: 2.0,
                           initial=lambda r: 1.0 + 0 * np.asarray(r))
        with pytest.raises(ConfigError):
            solve_trudinger_radial(cfg)

    def test_log_scheme_needs_positive_data(self):
        cfg = SolverConfig(p=Exponent.finite(2), n=2, R=1.0, nodes=21, t_end=0.1,
                           scheme=LOG_IMPLICIT, boundary=lambda t: 0.0,
                           initial=lambda r: 1.0 - np.asarray(r, float) ** 2)
        with pytest.raises(ConfigError):
            solve_trudinger_radial(cfg)

    def test_explicit_allows_zero_boundary(self):
        cfg = SolverConfig(p=Exponent.finite(2), n=3, R=1.0, nodes=41, t_end=1e-3,
                           scheme=DIRECT_EXPLICIT, boundary=lambda t: 0.0,
                           initial=sinc_profile)
        field = solve_trudinger_radial(cfg)
        assert field.values.min() > -1e-12

    def test_unknown_scheme(self):
        with pytest.raises(ConfigError):
            SolverConfig(p=Exponent.finite(2), n=2, R=1.0, nodes=21, t_end=0.1,
                         scheme="magic", boundary=lambda t: 1.0,
                         initial=lambda r: 1.0 + 0 * np.asarray(r))


class TestExactCases:
    @pytest.mark.parametrize("scheme", [LOG_IMPLICIT, DIRECT_EXPLICIT])
    def test_constants_are_solutions(self, scheme):
        cfg = SolverConfig(p=Exponent.finite(3), n=2, R=1.0, nodes=31, t_end=0.2,
                           scheme=scheme, boundary=lambda t: 2.5,
                           initial=lambda r: 2.5 + 0 * np.asarray(r, float),
                           dt=0.02 if scheme == LOG_IMPLICIT else None)
        field = solve_trudinger_radial(cfg)
        assert np.all(field.values == 2.5)
        sup_v, inf_v = max_principle_check(field)
        assert sup_v == 0.0 and inf_v == 0.0

    def test_heat_oracle_log_implicit(self):
        cfg = heat_config(nodes=201, t_end=0.1, dt=2e-4)
        field = solve_trudinger_radial(cfg)
        err = np.abs(field.values[-1] - heat_oracle(field.grid.r, 0.1)).max()
        assert err < 1e-3

    def test_heat_oracle_direct_explicit_zero_boundary(self):
        cfg = SolverConfig(p=Exponent.finite(2), n=3, R=1.0, nodes=151, t_end=0.05,
                           scheme=DIRECT_EXPLICIT, boundary=lambda t: 0.0,
                           initial=sinc_profile)
        field = solve_trudinger_radial(cfg)
        exact = np.exp(-np.pi ** 2 * field.times[-1]) * sinc_profile(field.grid.r)
        rel = np.abs(field.values[-1] - exact).max() / exact.max()
        assert rel < 1e-3

    def test_infinity_branch_constant_and_positive(self):
        cfg = SolverConfig(p=INFINITY, n=2, R=1.0, nodes=41, t_end=0.1,
                           scheme=LOG_IMPLICIT, boundary=lambda t: 1.0,
                           initial=lambda r: 1.0 + 0.3 * (1.0 - np.asarray(r, float) ** 2),
                           dt=5e-3)
        field = solve_trudinger_radial(cfg)
        assert field.values.min() > 0
        sup_v, inf_v = max_principle_check(field)
        bound = field.metadata["consistency_bound_u"]
        assert sup_v <= 5 * bound and inf_v <= 5 * bound


class TestConvergenceOrders:
    def test_first_order_in_dt_log_implicit(self):
        errs = []
        for dt in (4e-3, 2e-3, 1e-3):
            cfg = heat_config(nodes=401, t_end=0.1, dt=dt)
            field = solve_trudinger_radial(cfg)
            errs.append(np.abs(field.values[-1] - heat_oracle(field.grid.r, 0.1)).max())
        slope = np.polyfit(np.log([4e-3, 2e-3, 1e-3]), np.log(errs), 1)[0]
        assert 0.85 <= slope <= 1.15, (errs, slope)

    def test_second_order_in_h_log_implicit(self):
        errs, hs = [], []
        for nodes in (26, 51, 101):
            cfg = heat_config(nodes=nodes, t_end=0.02, dt=2e-6)
            field = solve_trudinger_radial(cfg)
            errs.append(np.abs(field.values[-1] - heat_oracle(field.grid.r, 0.02)).max())
            hs.append(1.0 / (nodes - 1))
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert 1.8 <= slope <= 2.2, (errs, slope)

    def test_second_order_in_h_direct_explicit(self):
        # the explicit step tracks dt ~ h^2, so the total error scales like h^2
        errs, hs = [], []
        for nodes in (26, 51, 101):
            cfg = SolverConfig(p=Exponent.finite(2), n=3, R=1.0, nodes=nodes,
                               t_end=0.02, scheme=DIRECT_EXPLICIT,
                               boundary=lambda t: 0.0, initial=sinc_profile)
            field = solve_trudinger_radial(cfg)
            exact = np.exp(-np.pi ** 2 * field.times[-1]) * sinc_profile(field.grid.r)
            errs.append(np.abs(field.values[-1] - exact).max())
            hs.append(1.0 / (nodes - 1))
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert 1.8 <= slope <= 2.2, (errs, slope)

    def test_scheme_cross_check(self):
        cfg_a = heat_config(nodes=101, t_end=0.02, dt=2e-5, scheme=LOG_IMPLICIT)
        a = solve_trudinger_radial(cfg_a)
        cfg_b = heat_config(nodes=101, t_end=0.02, scheme=DIRECT_EXPLICIT, dt=None)
        b = solve_trudinger_radial(cfg_b)
        diff = np.abs(a.values[-1] - b.values[-1]).max()
        bound = max(a.metadata["consistency_bound_u"], b.metadata["consistency_bound_u"])
        assert diff <= 3.0 * bound, (diff, bound)


class TestFieldProperties:
    def test_audit_below_reported_bound(self):
        cfg = heat_config(nodes=101, t_end=0.05, dt=1e-4)
        field = solve_trudinger_radial(cfg)
        res = fd_residual_on_field(field, cfg.p, cfg.n)
        assert np.abs(res).max() <= field.metadata["consistency_bound_residual"] + 1e-12

    def test_positivity_log_implicit(self):
        cfg = heat_config(nodes=61, t_end=0.05, dt=5e-4)
        field = solve_trudinger_radial(cfg)
        assert field.values.min() > 0.0

    def test_boundedness_between_data(self):
        cfg = heat_config(nodes=61, t_end=0.2, dt=1e-3)
        field = solve_trudinger_radial(cfg)
        bound = field.metadata["consistency_bound_u"]
        data = field.parabolic_boundary_values()
        assert field.values.max() <= data.max() + bound
        assert field.values.min() >= data.min() - bound

    def test_max_principle_heat_attained_at_start(self):
        cfg = SolverConfig(p=Exponent.finite(2), n=3, R=1.0, nodes=101, t_end=0.02,
                           scheme=DIRECT_EXPLICIT, boundary=lambda t: 0.0,
                           initial=sinc_profile)
        field = solve_trudinger_radial(cfg)
        sup_v, inf_v = max_principle_check(field)
        bound = field.metadata["consistency_bound_u"]
        assert sup_v <= bound  # interior sup below the t=0 sup
        assert inf_v <= bound

    def test_straddle_monotone_extrema(self):
        # boundary pinned at 1, initial data straddling it: sup falls, inf rises
        straddle = lambda r: 1.0 + 0.4 * np.cos(2 * np.pi * np.asarray(r, float)) \
            * (1.0 - np.asarray(r, float) ** 2)
        cfg = SolverConfig(p=Exponent.finite(3), n=2, R=1.0, nodes=81, t_end=0.4,
                           scheme=LOG_IMPLICIT, boundary=lambda t: 1.0,
                           initial=straddle, dt=5e-3)
        field = solve_trudinger_radial(cfg)
        bound = field.metadata["consistency_bound_u"]
        assert np.all(np.diff(field.sup_per_level) <= bound + 1e-12)
        assert np.all(np.diff(field.inf_per_level) >= -bound - 1e-12)

    def test_csv_and_manifest_export(self, tmp_path):
        cfg = heat_config(nodes=21, t_end=0.01, dt=1e-3)
        field = solve_trudinger_radial(cfg)
        csv_path = tmp_path / "field.csv"
        field.to_csv(csv_path)
        rows = csv_path.read_text().strip().splitlines()
        assert rows[0] == "t,r,u"
        assert len(rows) == 1 + field.times.size * field.grid.count
        man_path = tmp_path / "run.json"
        field.save_manifest(man_path)
        import json

        manifest = json.loads(man_path.read_text())
        assert manifest["scheme"] == LOG_IMPLICIT
        assert "consistency_bound_u" in manifest


class TestComparison:
    def test_identical_fields(self):
        cfg = heat_config(nodes=41, t_end=0.02, dt=5e-4)
        a = solve_trudinger_radial(cfg)
        assert comparison_check(a, a) == pytest.approx(0.0, abs=1e-15)

    def test_scaled_field_is_solution(self):
        # joint homogeneity: u a solution implies c u a solution; the discrete
        # log-form scheme shifts by log c exactly
        base = SolverConfig(p=Exponent.finite(3), n=2, R=1.0, nodes=61, t_end=0.1,
                            scheme=LOG_IMPLICIT, boundary=lambda t: 1.0,
                            initial=lambda r: 1.0 + 0.5 * (1 - np.asarray(r, float) ** 2),
                            dt=5e-3)
        b = solve_trudinger_radial(base)
        half = SolverConfig(p=Exponent.finite(3), n=2, R=1.0, nodes=61, t_end=0.1,
                            scheme=LOG_IMPLICIT, boundary=lambda t: 0.5,
                            initial=lambda r: 0.5 * (1.0 + 0.5 * (1 - np.asarray(r, float) ** 2)),
                            dt=5e-3)
        a = solve_trudinger_radial(half)
        ratio = a.values / b.values
        assert np.abs(ratio - 0.5).max() < 1e-10
        assert comparison_check(a, b) <= 1e-10
        # FD residuals scale with the (p-1)-homogeneity
        res_a = fd_residual_on_field(a, base.p, base.n)
        res_b = fd_residual_on_field(b, base.p, base.n)
        assert np.abs(res_a - 0.5 ** 2 * res_b).max() < 1e-10

    def test_ordered_data_pairs(self):
        rng = np.random.default_rng(42)
        for pv in (2.0, 3.0):
            for _ in range(3):
                lo_amp = rng.uniform(0.1, 0.4)
                hi_amp = lo_amp + rng.uniform(0.1, 0.4)
                base = rng.uniform(0.8, 1.2)

                def make(amp):
                    return SolverConfig(
                        p=Exponent.finite(pv), n=2, R=1.0, nodes=51, t_end=0.1,
                        scheme=LOG_IMPLICIT, boundary=lambda t: base,
                        initial=lambda r: base + amp * (1.0 - np.asarray(r, float) ** 2),
                        dt=5e-3)

                a = solve_trudinger_radial(make(lo_amp))
                b = solve_trudinger_radial(make(hi_amp))
                bound = max(a.metadata["consistency_bound_u"],
                            b.metadata["consistency_bound_u"])
                assert comparison_check(a, b) <= 5.0 * bound

    def test_grid_mismatch_rejected(self):
        a = solve_trudinger_radial(heat_config(nodes=21, t_end=0.01, dt=1e-3))
        b = solve_trudinger_radial(heat_config(nodes=41, t_end=0.01, dt=1e-3))
        from trudlab.pde import SolverError

        with pytest.raises(SolverError):
            comparison_check(a, b)


class TestDecayMeasurement:
    def test_synthetic_exponential(self):
        grid = RadialGrid(1.0, 21)
        times = np.linspace(0.0, 2.0, 41)
        psi = 1.0 - grid.r ** 2
        vals = np.exp(-3.0 * times)[:, None] * psi[None, :]
        field = SpaceTimeField(vals, grid, times)
        slope = measure_decay_rate(field, (0.5, 2.0))
        assert slope == pytest.approx(-3.0, abs=1e-10)

    def test_window_validation(self):
        grid = RadialGrid(1.0, 11)
        field = SpaceTimeField(np.ones((3, 11)), grid, np.array([0.0, 0.5, 1.0]))
        from trudlab.pde import SolverError

        with pytest.raises(SolverError):
            measure_decay_rate(field, (2.0, 3.0))
