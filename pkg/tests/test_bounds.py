from __future__ import annotations

import json
import math

import numpy as np
import pytest

from nlsdecay.bounds import (
    BoundParams,
    bound_rhs,
    bounded_domain_floor,
    decay_quantity,
    default_delta,
    holder_exponent,
    localized_mass_residual,
    m_zero,
    m_zero_energy,
    r_label,
    strauss_limit_rhs,
    tent,
    verify_theorem,
    windowed_l2,
)
from nlsdecay.errors import DegenerateWarning
from nlsdecay.grid import Field, Grid, Region, ball_volume, lp_norm
from nlsdecay.nonlin import Zero
from nlsdecay.oracles import gaussian_spectral_mass
from nlsdecay.prop import Scheme, StepperConfig, evolve, exact_free_step, gaussian_exact

# frozen oracle values (scipy quadrature)
SQRT_PI = 1.772453850905516
PI_QUARTER = 1.3313353638003897
WINDOW_0_2 = 1.2221490357664462  # ||F u0||_{L2(|xi|<1)} for exp(-x^2/2)
LIMIT_MASS = 1.3006947116618865  # ||F u0||_{L2(|xi|<sqrt 2)}


class TestHelpers:
    def test_labels(self):
        assert r_label(2.0) == "2" and r_label(math.inf) == "inf" and r_label(4.5) == "4.5"

    def test_holder_exponent(self):
        assert holder_exponent(2) == 0.0 and holder_exponent(4) == 0.25 and holder_exponent(math.inf) == 0.5
        with pytest.raises(ValueError):
            holder_exponent(1.0)

    def test_default_delta(self):
        assert default_delta(2) == 0.0 and default_delta(4) == 0.02 and default_delta(math.inf) == 0.02


class TestBoundParams:
    def test_valid(self):
        p = BoundParams(0.5, (1.0,), (2, 4), (1.0, 2.0))
        assert p.r_list == (2.0, 4.0) and p.delta_for(4) == 0.02

    @pytest.mark.parametrize(
        "kw",
        [dict(eps=0.0), dict(eps=-1.0), dict(r_list=(1.5,)), dict(time_window=(0.0, 1.0)), dict(time_window=(3.0, 2.0)), dict(delta=1.0)],
    )
    def test_invalid(self, kw):
        args = dict(eps=0.5, time_window=(1.0, 2.0))
        args.update(kw)
        with pytest.raises(ValueError):
            BoundParams(**args)

    def test_eps_vs_norm(self):
        with pytest.raises(ValueError):
            BoundParams(2.0).check_eps(1.5)


class TestMZero:
    def test_examples(self):
        assert m_zero(1.0, 1.0, 1 / math.sqrt(2)) == pytest.approx(4.0, rel=1e-14)
        assert m_zero(2.0, 3.0, 1.0) == pytest.approx(4.0, rel=1e-14)

    def test_gaussian(self):
        eps = math.sqrt(SQRT_PI / 2)
        assert m_zero(PI_QUARTER, PI_QUARTER / math.sqrt(2), eps) == pytest.approx(2 * math.sqrt(2), rel=1e-12)

    @pytest.mark.parametrize("eps", [0.0, -0.1, 1.0, 1.5])
    def test_eps_range(self, eps):
        with pytest.raises(ValueError):
            m_zero(1.0, 1.0, eps)

    def test_zero_gradient_flagged(self):
        with pytest.warns(DegenerateWarning):
            assert m_zero(1.0, 0.0, 0.5) == 0.0

    def test_monotone_and_divergent(self):
        eps = np.linspace(0.01, 0.999, 50)
        vals = [m_zero(1.0, 1.0, e) for e in eps]
        assert all(b > a for a, b in zip(vals[:-1], vals[1:]))
        assert m_zero(1.0, 1.0, 1 - 1e-9) > 1e8
        assert m_zero(1.0, 2.0, 0.5) > m_zero(1.0, 1.0, 0.5)

    def test_energy_variant(self):
        assert m_zero_energy(1.0, 0.5, 1 / math.sqrt(2)) == pytest.approx(4.0, rel=1e-14)
        with pytest.warns(DegenerateWarning):
            assert m_zero_energy(1.0, 0.0, 1 / math.sqrt(2)) == 0.0
        with pytest.raises(ValueError):
            m_zero_energy(1.0, -0.1, 0.5)

    def test_energy_variant_repulsive_sine(self):
        m = math.sqrt(math.pi / 2)
        expected = 2 * m * math.sqrt(11 * math.pi / 16) / (math.pi / 4)
        assert m_zero_energy(m, 11 * math.pi / 32, math.sqrt(math.pi / 4)) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(4.69041575982343, rel=1e-14)


class TestBoundRhs:
    def test_r2_is_eps(self):
        assert bound_rhs(0.3, 17.0, 2, 2) == 0.3

    def test_examples(self):
        assert bound_rhs(1 / math.sqrt(2), 4.0, 1, math.inf) == pytest.approx(0.25, rel=1e-14)
        assert bound_rhs(1.0, 2.0, 2, 4) == pytest.approx((4 * math.pi) ** -0.25, rel=1e-14)
        assert (4 * math.pi) ** -0.25 == pytest.approx(0.531, abs=5e-4)


class TestDecayQuantity:
    def test_r2_unweighted(self):
        g = Grid.periodic([(-20.0, 20.0)], [512])
        u = Field(g, np.exp(-g.coords[0] ** 2).astype(complex), 3.0)
        assert decay_quantity(u, (0.0,), 1.0, 2) == lp_norm(u, Region.ball((0.0,), 3.0), 2)

    def test_weight(self):
        g = Grid.periodic([(-20.0, 20.0)], [512])
        u = Field(g, np.exp(-g.coords[0] ** 2).astype(complex), 4.0)
        assert decay_quantity(u, (0.0,), 1.0, math.inf) == pytest.approx(2.0 * lp_norm(u, Region.ball((0.0,), 4.0), math.inf))

    def test_outside_support(self):
        g = Grid.periodic([(-20.0, 20.0)], [512])
        v = np.where(np.abs(g.coords[0]) > 10, 1.0, 0.0)
        assert decay_quantity(Field(g, v, 1.0), (0.0,), 2.0, 4) == 0.0

    def test_time_zero_flagged(self):
        g = Grid.periodic([(-2.0, 2.0)], [16])
        with pytest.warns(DegenerateWarning):
            assert decay_quantity(Field(g, np.ones(16)), (0.0,), 1.0, 2) == 0.0

    def test_free_gaussian_t10(self):
        g = Grid.periodic([(-160.0, 160.0)], [4096])
        u = exact_free_step(gaussian_exact(0.0, g), 10.0)
        q = decay_quantity(u, (0.0,), 2 * math.sqrt(2), 2)
        assert q >= math.sqrt(SQRT_PI / 2)
        assert q == pytest.approx(LIMIT_MASS, abs=5e-3)

    def test_holder_chain(self):
        rng = np.random.default_rng(0)
        g = Grid.periodic([(-10.0, 10.0)], [256])
        for _ in range(20):
            u = Field(g, rng.standard_normal(256) + 1j * rng.standard_normal(256), rng.uniform(0.5, 3.0))
            M0 = rng.uniform(0.5, 3.0)
            for r in (3.0, 4.0, math.inf):
                lhs = decay_quantity(u, (0.0,), M0, r)
                local = lp_norm(u, Region.ball((0.0,), M0 * abs(u.time)), 2)
                assert lhs >= ball_volume(1, M0) ** -holder_exponent(r) * local * (1 - 1e-12) - 1e-300


class TestTent:
    def test_values(self):
        g = Grid.periodic([(-4.0, 4.0)], [64])
        T = tent(g, (0.0,), 2.0)
        x = g.coords[0]
        assert T.values[np.argmin(np.abs(x))] == 1.0
        assert T.values[np.argmin(np.abs(x - 1.0))] == 0.5
        assert np.all(T.values[np.abs(x) >= 2.0] == 0.0)
        assert T.values.min() >= 0 and T.values.max() == 1.0

    def test_lipschitz(self):
        g = Grid.periodic([(-4.0, 4.0)], [256])
        T = tent(g, (0.3,), 1.7).values
        assert np.abs(np.diff(T)).max() <= g.spacing[0] / 1.7 * (1 + 1e-12)

    def test_invalid(self):
        g = Grid.periodic([(-4.0, 4.0)], [64])
        with pytest.raises(ValueError):
            tent(g, (0.0,), 0.0)
        with pytest.raises(ValueError):
            tent(g, (9.0,), 1.0)

    def test_masked_to_domain(self):
        g = Grid.dirichlet([(0.0, 2.0)], [16])
        assert tent(g, (0.0,), 1.0).values[0] == 0.0


class TestResidual:
    def test_zero_at_t0(self):
        g = Grid.periodic([(-8.0, 8.0)], [128])
        u = gaussian_exact(0.0, g)
        assert localized_mass_residual(u, u, tent(g, (0.0,), 1.0), 1.0, 1.0) == 0.0

    def test_stationary_state(self):
        g = Grid.dirichlet([(0.0, math.pi)], [256])
        u0 = Field(g, np.sin(g.coords[0]).astype(complex))
        ut = Field(g, np.exp(-2j) * u0.values, 2.0)
        res = localized_mass_residual(ut, u0, tent(g, (1.0,), 0.5), 1.25, 1.1)
        assert res == pytest.approx(2 * 2.0 / 0.5 * 1.25 * 1.1, rel=1e-12)

    def test_free_gaussian(self):
        g = Grid.periodic([(-320.0, 320.0)], [8192])
        u0 = gaussian_exact(0.0, g)
        norm0 = lp_norm(u0)
        M0 = 2 * math.sqrt(2)
        from nlsdecay.grid import grad_l2_norm

        G = grad_l2_norm(u0)
        for t in (1.0, 2.0, 5.0, 10.0):
            res = localized_mass_residual(exact_free_step(u0, t), u0, tent(g, (0.0,), M0 * t), norm0, G)
            assert res >= -1e-6 * norm0**2


class TestFloor:
    @pytest.fixture
    def sine(self):
        g = Grid.dirichlet([(0.0, math.pi)], [2048])
        return Field(g, np.sin(g.coords[0]).astype(complex))

    def test_r2_zero_margin(self, sine):
        fc = bounded_domain_floor(sine, 2, lp_norm(sine))
        assert fc.passed and abs(fc.margin) <= 1e-14

    def test_rinf(self, sine):
        u = sine.replace(values=np.exp(-1.3j) * sine.values, time=1.3)
        fc = bounded_domain_floor(u, math.inf, lp_norm(sine))
        assert fc.passed and fc.margin == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-3)

    def test_constant_modulus(self):
        g = Grid.dirichlet([(0.0, 2.0)], [64])
        u = Field(g, np.exp(1j * g.coords[0]))
        for r in (2, 3, 4, math.inf):
            fc = bounded_domain_floor(u, r, lp_norm(u))
            assert abs(fc.margin) <= 1e-12

    def test_periodic_rejected(self):
        g = Grid.periodic([(0.0, 1.0)], [16])
        with pytest.raises(ValueError):
            bounded_domain_floor(Field(g, np.ones(16)), 2, 1.0)


@pytest.fixture(scope="module")
def spread_gaussian():
    g = Grid.periodic([(-640.0, 640.0)], [8192])
    u0 = gaussian_exact(0.0, g)
    return u0, {t: exact_free_step(u0, t) for t in (10.0, 50.0)}


class TestStrauss:
    def test_rhs_vs_oracle(self, spread_gaussian):
        u0, _ = spread_gaussian
        assert strauss_limit_rhs(u0, 0.0, 2.0) == pytest.approx(WINDOW_0_2, rel=2e-3)
        assert gaussian_spectral_mass(0.0, 2.0) == pytest.approx(WINDOW_0_2, rel=1e-13)

    def test_full_band_plancherel(self):
        g = Grid.periodic([(-20.0, 20.0)], [256])
        u0 = gaussian_exact(0.0, g)
        assert strauss_limit_rhs(u0, 0.0, 1e6) == pytest.approx(lp_norm(u0), rel=1e-13)

    def test_reflection_invariance(self):
        rng = np.random.default_rng(4)
        g = Grid.periodic([(-8.0, 8.0)], [128])
        v = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        flipped = np.roll(v[::-1], 1)  # u(-x) on the grid
        a = strauss_limit_rhs(Field(g, v), 0.5, 3.0)
        b = strauss_limit_rhs(Field(g, flipped), 0.5, 3.0)
        assert a == pytest.approx(b, rel=1e-13)

    def test_unresolved_annulus_rejected(self):
        g = Grid.periodic([(-8.0, 8.0)], [64])
        with pytest.raises(ValueError, match="resolved"):
            strauss_limit_rhs(gaussian_exact(0.0, g, check_tail=False), 100.0, 200.0)

    def test_window_convergence(self, spread_gaussian):
        _, snaps = spread_gaussian
        e10 = abs(windowed_l2(snaps[10.0], 0.0, 2.0) - WINDOW_0_2)
        e50 = abs(windowed_l2(snaps[50.0], 0.0, 2.0) - WINDOW_0_2)
        assert e50 < e10 and e50 / WINDOW_0_2 < 0.02

    def test_partition_additivity(self, spread_gaussian):
        _, snaps = spread_gaussian
        u = snaps[50.0]
        whole = windowed_l2(u, 0.0, 2.0) ** 2
        parts = windowed_l2(u, 0.0, 0.7) ** 2 + windowed_l2(u, 0.7, 2.0) ** 2
        assert abs(whole - parts) <= 1e-12 * whole

    def test_window_covers_box(self, spread_gaussian):
        u0, snaps = spread_gaussian
        assert windowed_l2(snaps[10.0], 0.0, 1e4) == pytest.approx(lp_norm(u0), rel=1e-12)

    def test_zero_field(self):
        g = Grid.periodic([(-8.0, 8.0)], [64])
        assert windowed_l2(Field(g, np.zeros(64), 1.0), 0.0, 1.0) == 0.0

    def test_t_positive_required(self):
        g = Grid.periodic([(-8.0, 8.0)], [64])
        with pytest.raises(ValueError):
            windowed_l2(Field(g, np.ones(64)), 0.0, 1.0)


@pytest.fixture(scope="module")
def traj():
    g = Grid.periodic([(-320.0, 320.0)], [4096])
    return evolve(gaussian_exact(0.0, g), StepperConfig(Scheme.EXACT_FREE, 1.0), Zero(), [0, 1, 5, 10, 20, 30], retain_fields=True)


class TestVerify:
    def test_passes(self, traj):
        eps = math.sqrt(SQRT_PI / 2)
        M0 = m_zero(traj.norm0, traj.grad_max, eps)
        report = verify_theorem(traj, BoundParams(eps, (0.0,), (2, 4, math.inf), (5.0, 30.0)), M0)
        assert report.passed
        assert [c.name for c in report.checks] == ["decay_r2", "decay_r4", "decay_rinf", "tent_residual"]
        assert report.check("decay_r2").min_margin >= 0.35
        assert report.rhs["2"] == eps
        assert report.metadata["M0"] == M0

    def test_r2_row_is_local_mass(self, traj):
        eps = math.sqrt(SQRT_PI / 2)
        M0 = m_zero(traj.norm0, traj.grad_max, eps)
        rep = verify_theorem(traj, BoundParams(eps, (0.0,), (2,), (5.0, 30.0)), M0)
        for row in rep.check("decay_r2").rows:
            u = traj.field_at(row["t"])
            assert row["value"] == lp_norm(u, Region.ball((0.0,), M0 * row["t"])) and row["rhs"] == eps

    def test_negative_control(self, traj):
        eps = math.sqrt(SQRT_PI / 2)
        M0 = m_zero(traj.norm0, traj.grad_max, eps)
        rep = verify_theorem(traj, BoundParams(eps, (0.0,), (2,), (5.0, 30.0)), M0 / 100)
        assert rep.check("decay_r2").status == "fail"
        assert not rep.passed

    def test_geometry_skip_and_strict(self, traj):
        eps = 0.999999 * traj.norm0
        M0 = m_zero(traj.norm0, traj.grad_max, eps)
        rep = verify_theorem(traj, BoundParams(eps, (0.0,), (2,), (5.0, 30.0)), M0)
        assert rep.check("decay_r2").status == "skipped"
        assert "geometry" in rep.check("decay_r2").detail
        assert rep.passed
        strict = verify_theorem(traj, BoundParams(eps, (0.0,), (2,), (5.0, 30.0), strict_geometry=True), M0)
        assert strict.check("decay_r2").status == "fail" and not strict.passed

    def test_needs_fields(self):
        g = Grid.periodic([(-20.0, 20.0)], [256])
        traj = evolve(gaussian_exact(0.0, g), StepperConfig(), Zero(), [0.0, 1.0])
        with pytest.raises(ValueError, match="retained"):
            verify_theorem(traj, BoundParams(0.5, (0.0,), (2,), (0.5, 1.0)), 1.0)

    def test_json(self, traj):
        eps = math.sqrt(SQRT_PI / 2)
        rep = verify_theorem(traj, BoundParams(eps, (0.0,), (2, math.inf), (5.0, 30.0)), 2.83)
        data = json.loads(rep.to_json())
        assert data["verdict"]["passed"] is True
        assert {c["name"] for c in data["checks"]} == {"decay_r2", "decay_rinf", "tent_residual"}
        row = data["checks"][0]["series"][0]
        assert set(row) == {"t", "value", "rhs", "margin"}
        assert all("tolerance" in c for c in data["checks"])
