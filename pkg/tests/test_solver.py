import numpy as np
import pytest

from ffmfg.core import Grid1D, ModelParams, NonPositiveDensityError, validate_state
from ffmfg.analysis import flux_phys
from ffmfg.solver import (
    DegenerateSpeedWarning,
    LossOfHyperbolicityWarning,
    SolverConfig,
    Termination,
    advance,
    cfl_dt,
    rusanov_interface_flux,
    semidiscrete_rhs,
)
from ffmfg.waves import ProfileSpec, WaveSpec, build_traveling_wave, constant_state, exact_traveling_wave_at

SQRT3 = np.sqrt(3.0)


class TestRusanovFlux:
    def test_consistency(self):
        p = ModelParams(alpha=1.0)
        u = np.array([1.0, 1.0])
        assert np.array_equal(rusanov_interface_flux(u, u, p), flux_phys(1.0, 1.0, p))

    def test_zero_dissipation_for_equal_states(self):
        p = ModelParams(alpha=0.6, coupling="monotone_ff", K=0.8, epsilon=0.1)
        u = np.array([0.7, 1.4])
        assert np.allclose(rusanov_interface_flux(u, u, p), flux_phys(0.7, 1.4, p))

    def test_jump_dissipation_uses_max_speed(self):
        p = ModelParams(alpha=1.0)
        left = np.array([1.0, 1.0])
        right = np.array([2.0, 1.0])
        # speeds scale with v here, so the larger state sets s
        s = (1.0 + SQRT3) / 2.0 * 2.0
        expected = 0.5 * (
            flux_phys(1.0, 1.0, p) + flux_phys(2.0, 1.0, p)
        ) - 0.5 * s * (right - left)
        assert np.allclose(rusanov_interface_flux(left, right, p), expected)

    def test_rejects_nonpositive_density(self):
        p = ModelParams(alpha=1.0)
        with pytest.raises(NonPositiveDensityError):
            rusanov_interface_flux(np.array([1.0, 0.0]), np.array([1.0, 1.0]), p)

    def test_complex_speeds_warn(self):
        # antimonotone with v^2 > 4 K m^2 at alpha = 1 has complex speeds
        p = ModelParams(alpha=1.0, coupling="antimonotone", K=0.5)
        left = np.array([2.0, 1.0])
        with pytest.warns(LossOfHyperbolicityWarning):
            rusanov_interface_flux(left, left, p)


class TestSemidiscreteRhs:
    def test_constant_state_is_stationary(self):
        grid = Grid1D(32)
        for coupling, K in (("none", 0.0), ("monotone_ff", 1.0), ("antimonotone", 0.3)):
            p = ModelParams(alpha=0.8, epsilon=0.02, coupling=coupling, K=K)
            st = constant_state(0.9, 1.1, grid)
            dv, dm = semidiscrete_rhs(st, p)
            assert np.max(np.abs(dv)) == 0.0
            assert np.max(np.abs(dm)) == 0.0

    def test_pure_diffusion_limit(self):
        # v = 0 kills the flux, so dm/dt must approach eps * m_xx
        grid = Grid1D(128)
        p = ModelParams(alpha=1.0, epsilon=0.05)
        x = grid.centers
        m = 1.0 + 0.1 * np.cos(2 * np.pi * x)
        st = validate_state(grid, np.zeros_like(m), m)
        dv, dm = semidiscrete_rhs(st, p)
        m_xx_exact = -0.1 * (2 * np.pi) ** 2 * np.cos(2 * np.pi * x)
        assert np.max(np.abs(dv)) == 0.0
        err = np.max(np.abs(dm - p.epsilon * m_xx_exact))
        assert err <= 0.05 * (2 * np.pi) ** 2 * 0.1 * grid.dx**2 * 5

    def test_wave_transport_first_order(self):
        profile = ProfileSpec()
        wave = WaveSpec(coupling="monotone_ff", K=1.5, sign=1)
        errors = []
        for n in (200, 400):
            grid = Grid1D(n)
            p = ModelParams(alpha=0.5, coupling="monotone_ff", K=1.5)
            st = build_traveling_wave(profile, wave, p, grid)
            dv, dm = semidiscrete_rhs(st, p)
            c = wave.speed
            m_x = profile.derivative(grid.centers)
            v_x = c * p.alpha * st.m ** (p.alpha - 1.0) * m_x
            # exact rates are c * (spatial derivatives of the profile)
            err = max(
                np.max(np.abs(dv - c * v_x)), np.max(np.abs(dm - c * m_x))
            )
            errors.append(err)
        assert errors[0] / errors[1] >= 1.5  # roughly first order
        assert errors[1] <= 0.2


class TestCflDt:
    def test_diffusion_limited(self):
        grid = Grid1D(100)
        p = ModelParams(alpha=1.0, epsilon=0.05)
        st = validate_state(grid, np.zeros(100), np.ones(100))
        cfg = SolverConfig(cfl=0.4)
        # zero wave speeds leave only the diffusive bound dx^2 / (2 eps)
        assert cfl_dt(st, p, cfg) == pytest.approx(0.4 * grid.dx**2 / (2 * 0.05))

    def test_advection_limited(self):
        grid = Grid1D(100)
        p = ModelParams(alpha=1.0)
        st = constant_state(1.0, 1.0, grid)
        cfg = SolverConfig(cfl=0.4)
        lam2 = (1.0 + SQRT3) / 2.0
        assert cfl_dt(st, p, cfg) == pytest.approx(0.4 * grid.dx / lam2)

    def test_halves_with_resolution(self):
        p = ModelParams(alpha=1.0)
        cfg = SolverConfig(cfl=0.4)
        dts = [
            cfl_dt(constant_state(1.0, 1.0, Grid1D(n)), p, cfg) for n in (100, 200)
        ]
        assert dts[0] / dts[1] == pytest.approx(2.0)

    def test_degenerate_speed_fallback(self):
        grid = Grid1D(64)
        p = ModelParams(alpha=1.0, epsilon=0.0)
        st = validate_state(grid, np.zeros(64), np.ones(64))
        cfg = SolverConfig(cfl=0.4)
        with pytest.warns(DegenerateSpeedWarning):
            dt = cfl_dt(st, p, cfg)
        assert dt == pytest.approx(0.4 * grid.dx)


class TestAdvance:
    def test_constant_state_exact(self):
        grid = Grid1D(64)
        p = ModelParams(alpha=1.0, coupling="monotone_ff", K=1.0, epsilon=0.01)
        st = constant_state(1.3, 0.8, grid)
        traj = advance(st, 1.0, p, SolverConfig(store_every=10**6))
        final = traj.final_state
        assert traj.reason is Termination.COMPLETED
        assert final.t == 1.0
        assert np.max(np.abs(final.v - st.v)) <= 1e-13
        assert np.max(np.abs(final.m - st.m)) <= 1e-13

    def test_lands_exactly_on_t_final(self):
        grid = Grid1D(32)
        p = ModelParams(alpha=1.0)
        st = constant_state(1.0, 1.0, grid)
        traj = advance(st, 0.337, p, SolverConfig())
        assert traj.final_state.t == 0.337

    def test_mass_conservation(self):
        profile = ProfileSpec()
        wave = WaveSpec(coupling="monotone_ff", K=1.5, sign=1)
        p = ModelParams(alpha=0.5, coupling="monotone_ff", K=1.5, epsilon=0.01)
        grid = Grid1D(200)
        st = build_traveling_wave(profile, wave, p, grid)
        masses = []
        traj = advance(
            st,
            0.5,
            p,
            SolverConfig(store_every=10**6),
            observer=lambda s: masses.append(float(np.sum(s.m) * s.dx)),
        )
        assert traj.reason is Termination.COMPLETED
        assert np.max(np.abs(np.array(masses) - masses[0])) <= 1e-12

    def test_immediate_blow_up_below_floor(self):
        grid = Grid1D(16)
        p = ModelParams(alpha=1.0)
        st = validate_state(grid, np.ones(16), np.full(16, 1e-12))
        traj = advance(st, 1.0, p, SolverConfig())
        assert traj.reason is Termination.BLOW_UP
        assert traj.n_steps == 0

    def test_step_cap(self):
        grid = Grid1D(64)
        p = ModelParams(alpha=1.0)
        st = constant_state(1.0, 1.0, grid)
        traj = advance(st, 10.0, p, SolverConfig(max_steps=5))
        assert traj.reason is Termination.STEP_CAP
        assert traj.n_steps == 5

    def test_observer_called_per_step(self):
        grid = Grid1D(32)
        p = ModelParams(alpha=1.0)
        st = constant_state(1.0, 1.0, grid)
        times = []
        traj = advance(st, 0.1, p, SolverConfig(), observer=lambda s: times.append(s.t))
        assert len(times) == traj.n_steps + 1  # initial state plus each step
        assert times == sorted(times)

    def test_stored_states_validate(self):
        profile = ProfileSpec()
        wave = WaveSpec(coupling="antimonotone", K=0.5, sign=1)
        p = ModelParams(alpha=1.0, coupling="antimonotone", K=0.5)
        grid = Grid1D(64)
        st = build_traveling_wave(profile, wave, p, grid)
        traj = advance(st, 0.2, p, SolverConfig(store_every=10))
        for state in traj.states:
            validate_state(grid, state.v, state.m, t=state.t)
        assert np.all(np.diff(traj.times) > 0)

    def test_bad_time_interval(self):
        grid = Grid1D(16)
        st = constant_state(1.0, 1.0, grid)
        with pytest.raises(Exception):
            advance(st, 0.0, ModelParams(alpha=1.0), SolverConfig())


class TestWaveConvergenceShort:
    def test_order_between_two_resolutions(self):
        # short horizon keeps this fast; the full study lives in acceptance
        profile = ProfileSpec()
        wave = WaveSpec(coupling="monotone_ff", K=1.5, sign=1)
        p = ModelParams(alpha=0.5, coupling="monotone_ff", K=1.5)
        errors = []
        for n in (100, 200):
            grid = Grid1D(n)
            st = build_traveling_wave(profile, wave, p, grid)
            traj = advance(st, 0.25, p, SolverConfig(store_every=10**6))
            exact = exact_traveling_wave_at(profile, wave, p, grid, 0.25)
            errors.append(float(np.mean(np.abs(traj.final_state.m - exact.m))))
        order = np.log2(errors[0] / errors[1])
        assert order >= 0.8
