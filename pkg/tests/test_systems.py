"""Right-hand-side structure tests for the five flow variants."""

import numpy as np
import pytest

from driftflow.errors import DegenerateMixture, TailNotConverged, VacuumGas
from driftflow.initial_data import DataRecipe, df_state, euler_ns_state, tns_state
from driftflow.spectral import (
    Grid,
    PhysParams,
    SpectralField,
    div,
    from_physical,
    grad,
    l2_norm,
    laplacian,
    leray_project,
    multiply,
    pointwise,
    to_physical,
)
from driftflow.systems import (
    StateDF,
    StateEulerNS,
    StateTNS,
    asymptotic_profile,
    effective_mixed_velocity,
    linear_rhs_euler_ns,
    mass,
    momentum_rhs_df_conservative,
    momentum_rhs_df_nonconservative,
    pressure_terms,
    relative_velocity_residual,
    rhs_df,
    rhs_df_scaled,
    rhs_euler_ns,
    rhs_euler_ns_scaled,
    rhs_tns,
    total_momentum_rate,
)

from conftest import random_field, small_field

GRID = Grid(2, 32, 4.0 * np.pi)
PAR = PhysParams(tau=0.3, mu=0.7, lam=-0.2, gamma=3.0)


def smooth_state(seed=0, amplitude=0.05, grid=GRID):
    return euler_ns_state(grid, DataRecipe(amplitude=amplitude, rho_amplitude=amplitude,
                                           seed=seed, k_band=(0.4, 1.6)))


def zero_scalar(grid):
    return SpectralField(grid, np.zeros(grid.shape, dtype=np.complex128))


def zero_vector(grid):
    return SpectralField(grid, np.zeros((grid.dim,) + grid.shape, dtype=np.complex128))


def equilibrium(rho_bar=0.4, grid=GRID):
    rho = zero_scalar(grid)
    rho.coeffs[(0,) * grid.dim] = rho_bar
    return StateEulerNS(rho, zero_vector(grid), zero_scalar(grid), zero_vector(grid))


def state_norm(st):
    return max(l2_norm(f) for f in st.fields().values())


class TestPressureTerms:
    def test_zero_at_equilibrium(self):
        a = zero_scalar(GRID)
        g, f = pressure_terms(a, 3.0)
        assert l2_norm(g) == 0.0 and l2_norm(f) == 0.0

    def test_cubic_law_gives_minus_a(self, rng):
        a = small_field(GRID, rng, 0.1)
        a.coeffs[0, 0] = 0.0
        g, _ = pressure_terms(a, 3.0)
        assert np.max(np.abs(g.coeffs + a.coeffs)) < 1e-12

    def test_quadratic_law_gives_zero(self, rng):
        a = small_field(GRID, rng, 0.1)
        g, _ = pressure_terms(a, 2.0)
        assert l2_norm(g) < 1e-13

    def test_vacuum_rejected(self):
        a = from_physical(GRID, -0.95 * np.ones(GRID.shape))
        with pytest.raises(VacuumGas):
            pressure_terms(a, 3.0)


class TestEulerNS:
    def test_equilibrium_is_fixed_point(self):
        d = rhs_euler_ns(equilibrium(), PAR)
        assert state_norm(d) < 1e-14

    def test_aligned_velocities_kill_drag(self, rng):
        st = smooth_state(3)
        st = StateEulerNS(st.rho, st.v.copy(), st.a, st.v)
        d = rhs_euler_ns(st, PAR)
        # the drag-free evaluation at enormous tau must agree on every field
        d_free = rhs_euler_ns(st, PhysParams(tau=1e12, mu=PAR.mu, lam=PAR.lam, gamma=PAR.gamma))
        for k in ("rho", "u", "a", "v"):
            num = l2_norm(d.fields()[k] - d_free.fields()[k])
            assert num < 1e-11 * max(state_norm(d), 1e-6)

    def test_rhs_linearizes_to_symbol(self):
        # halving the amplitude quarters the nonlinear residual
        resid = []
        for delta in (2e-3, 1e-3):
            st = smooth_state(5, amplitude=delta)
            st = StateEulerNS(st.rho * (delta / 0.05 / (delta / 0.05)), st.u, st.a, st.v)
            full = rhs_euler_ns(st, PAR)
            lin = linear_rhs_euler_ns(st, PAR)
            diff = max(
                l2_norm(full.u - lin.u), l2_norm(full.a - lin.a), l2_norm(full.v - lin.v)
            )
            resid.append(diff)
        ratio = resid[0] / resid[1]
        assert 3.5 < ratio < 4.5

    def test_split_rhs_consistency(self, rng):
        st = smooth_state(7)
        full = rhs_euler_ns(st, PAR)
        nl = rhs_euler_ns(st, PAR, include_linear=False)
        lin = linear_rhs_euler_ns(st, PAR)
        for k in ("rho", "u", "a", "v"):
            diff = l2_norm(full.fields()[k] - (nl.fields()[k] + lin.fields()[k]))
            assert diff < 1e-12 * max(1.0, l2_norm(full.fields()[k]))

    def test_mass_rate_is_exactly_zero(self):
        st = smooth_state(9)
        d = rhs_euler_ns(st, PAR)
        assert abs(np.real(d.rho.zero_mode())) < 1e-17
        assert abs(np.real(d.a.zero_mode())) < 1e-17

    def test_total_momentum_rate_vanishes(self):
        st = smooth_state(11)
        assert total_momentum_rate(st, PAR) < 1e-12

    def test_relative_velocity_identity(self):
        st = smooth_state(13)
        assert relative_velocity_residual(st, PAR) < 1e-9

    def test_relative_velocity_identity_at_equilibrium(self):
        assert relative_velocity_residual(equilibrium(), PAR) == 0.0


class TestDriftFlux:
    def test_equilibrium(self):
        st = StateDF(equilibrium().rho, zero_scalar(GRID), zero_vector(GRID))
        d = rhs_df(st, PAR)
        assert state_norm(d) < 1e-14

    def test_vanishing_dispersed_phase_is_single_phase_flow(self, rng):
        base = df_state(GRID, DataRecipe(amplitude=0.04, seed=1, k_band=(0.4, 1.6)))
        st = StateDF(zero_scalar(GRID), base.a, base.v)
        d = rhs_df(st, PAR)
        # independent single-phase assembly
        a_ph = to_physical(st.a)
        v_ph = to_physical(st.v)
        visc = PAR.mu * laplacian(st.v).coeffs + (PAR.mu + PAR.lam) * (
            grad(div(st.v)).coeffs
        )
        adv = np.zeros_like(v_ph)
        for i in range(GRID.dim):
            adv[i] = np.sum(v_ph * to_physical(grad(st.v.component(i))), axis=0)
        pcoef = (1.0 + a_ph) ** (PAR.gamma - 2.0)
        dv_ref = pointwise(GRID, -adv - (pcoef - 1.0) * to_physical(grad(st.a))
                           + (1.0 / (1.0 + a_ph) - 1.0) * to_physical(
                               SpectralField(GRID, visc)))
        dv_ref = SpectralField(GRID, dv_ref.coeffs - grad(st.a).coeffs + visc)
        assert l2_norm(d.v - dv_ref) < 1e-11 * max(1.0, l2_norm(d.v))

    def test_conservative_momentum_crosscheck(self):
        # needs enough spectral headroom that the 1/(rho+n) tail is negligible
        grid = Grid(2, 64, 4.0 * np.pi)
        st = df_state(grid, DataRecipe(amplitude=0.02, rho_amplitude=0.02,
                                       seed=2, k_band=(0.4, 1.2)))
        cons = momentum_rhs_df_conservative(st, PAR)
        noncons = momentum_rhs_df_nonconservative(st, PAR)
        rel = l2_norm(cons - noncons) / max(l2_norm(cons), 1e-30)
        assert rel < 1e-8

    def test_degenerate_mixture_rejected(self):
        rho = from_physical(GRID, -0.97 * np.ones(GRID.shape))
        st = StateDF(rho, zero_scalar(GRID), zero_vector(GRID))
        with pytest.raises(DegenerateMixture):
            rhs_df(st, PAR)


class TestTNS:
    def test_frozen_density_without_flow(self, rng):
        varrho = random_field(GRID, rng)
        st = StateTNS(varrho, zero_vector(GRID))
        d = rhs_tns(st, PAR)
        assert state_norm(d) < 1e-14

    def test_taylor_green_projection_vanishes(self):
        x = GRID.coords()
        k0 = 2.0 * np.pi / GRID.length * 2
        w_ph = np.stack([
            np.sin(k0 * x[0]) * np.cos(k0 * x[1]),
            -np.cos(k0 * x[0]) * np.sin(k0 * x[1]),
        ])
        w = from_physical(GRID, w_ph)
        st = StateTNS(zero_scalar(GRID), w)
        d = rhs_tns(st, PAR, include_linear=False)
        # the cellular-vortex advection term is a pure gradient
        assert l2_norm(d.w) < 1e-12 * l2_norm(w)

    def test_energy_identity_at_rhs_level(self, rng):
        st = tns_state(GRID, DataRecipe(amplitude=0.1, seed=4, k_band=(0.4, 2.0)))
        d = rhs_tns(st, PAR)
        w_ph = to_physical(st.w)
        dw_ph = to_physical(d.w)
        dE = np.sum(w_ph * dw_ph) * GRID.cell_volume
        grad_sq = 0.0
        for i in range(GRID.dim):
            gw = to_physical(grad(st.w.component(i)))
            grad_sq += np.sum(gw**2) * GRID.cell_volume
        assert abs(dE + PAR.mu * grad_sq) < 1e-8 * max(abs(dE), 1.0)

    def test_density_mean_conserved(self, rng):
        st = tns_state(GRID, DataRecipe(amplitude=0.1, seed=5))
        d = rhs_tns(st, PAR)
        assert abs(np.real(d.varrho.zero_mode())) < 1e-17


class TestScaledSystems:
    def test_unit_parameters_match_unscaled_df(self):
        st = df_state(GRID, DataRecipe(amplitude=0.04, seed=6, k_band=(0.4, 1.6)))
        a = rhs_df_scaled(st, 1.0, PAR)
        b = rhs_df(st, PAR)
        for k in ("rho", "a", "v"):
            assert l2_norm(a.fields()[k] - b.fields()[k]) < 1e-12

    def test_unit_parameters_match_unscaled_euler_ns(self):
        st = smooth_state(8)
        a = rhs_euler_ns_scaled(st, 1.0, PAR.tau, PAR)
        b = rhs_euler_ns(st, PAR)
        for k in ("rho", "u", "a", "v"):
            assert l2_norm(a.fields()[k] - b.fields()[k]) < 1e-12

    def test_rescaling_transform_commutes_with_rhs(self):
        # (rho, n-1, v)(t, x) = eps*(scaled fields)(eps^2 t, eps x): the rhs of
        # the scaled system is eps^{-3} times the transformed unscaled rhs
        eps = 0.5
        mu_bar, lam_bar = 0.8, -0.3
        par_unscaled = PhysParams(tau=1.0, mu=mu_bar, lam=lam_bar, gamma=3.0)
        par_scaled = PhysParams(tau=1.0, eps=eps, mu=mu_bar, lam=lam_bar, gamma=3.0)
        st = df_state(GRID, DataRecipe(amplitude=0.03, rho_amplitude=0.03, seed=9,
                                       k_band=(0.6, 1.8)))
        d_unscaled = rhs_df(st, par_unscaled)

        shrunk = Grid(GRID.dim, GRID.npts, eps * GRID.length)
        scaled_state = StateDF(*[SpectralField(shrunk, f.coeffs / eps)
                                 for f in (st.rho, st.a, st.v)])
        d_scaled = rhs_df_scaled(scaled_state, eps, par_scaled)
        for k in ("rho", "a", "v"):
            want = d_unscaled.fields()[k].coeffs / eps**3
            got = d_scaled.fields()[k].coeffs
            assert np.max(np.abs(got - want)) < 1e-11 * max(np.max(np.abs(want)), 1e-12)

    def test_quiescent_gas_reduces_to_incompressible_transport(self):
        base = tns_state(GRID, DataRecipe(amplitude=0.05, seed=10, k_band=(0.4, 1.6)))
        st = StateDF(zero_scalar(GRID), zero_scalar(GRID), base.w)
        d = rhs_df_scaled(st, 0.25, PAR)
        assert l2_norm(d.a) < 1e-13  # div-free velocity produces no gas response
        dw_tns = rhs_tns(StateTNS(zero_scalar(GRID), base.w), PAR)
        sol, _ = leray_project(d.v)
        assert l2_norm(sol - dw_tns.w) < 1e-11 * max(l2_norm(dw_tns.w), 1e-12)


class TestMixedVelocity:
    def test_aligned_velocities(self):
        st = smooth_state(12)
        st = StateEulerNS(st.rho, st.v.copy(), st.a, st.v)
        V = effective_mixed_velocity(st)
        assert l2_norm(V - st.v) < 1e-12

    def test_no_dispersed_phase(self):
        st = smooth_state(14)
        st = StateEulerNS(zero_scalar(GRID), st.u, st.a, st.v)
        V = effective_mixed_velocity(st)
        assert l2_norm(V - st.v) < 1e-12

    def test_equal_densities_average(self, rng):
        a = small_field(GRID, rng, 0.05)
        a.coeffs[0, 0] = 0.0
        n_ph = 1.0 + to_physical(a)
        rho = from_physical(GRID, n_ph)
        u = small_field(GRID, rng, 0.05, ncomp=2)
        v = small_field(GRID, rng, 0.05, ncomp=2)
        st = StateEulerNS(rho, u, a, v)
        V = effective_mixed_velocity(st)
        avg = 0.5 * (u + v)
        assert l2_norm(V - avg) < 1e-11

    def test_identity_linking_v_and_mismatch(self):
        st = smooth_state(16)
        V = effective_mixed_velocity(st)
        rho_ph = to_physical(st.rho)
        mix = rho_ph + 1.0 + to_physical(st.a)
        expected = pointwise(GRID, (rho_ph / mix) * (to_physical(st.u) - to_physical(st.v)))
        assert l2_norm((V - st.v) - expected) < 1e-12


class TestAsymptoticProfile:
    def test_still_fluid_keeps_initial_density(self, rng):
        rho0 = random_field(GRID, rng)
        times = np.linspace(0, 5, 11)
        zeros = [np.zeros(GRID.shape, dtype=np.complex128) for _ in times]
        prof, tail = asymptotic_profile(times, zeros, rho0)
        assert np.array_equal(prof.coeffs, rho0.coeffs)
        assert tail == 0.0

    def test_mass_of_profile_matches_initial(self, rng):
        rho0 = random_field(GRID, rng)
        rho0.coeffs[0, 0] = 0.7
        times = np.linspace(0, 3, 7)
        rng2 = np.random.default_rng(0)
        fluxes = []
        for t in times:
            f = random_field(GRID, rng2, ncomp=2) * np.exp(-3.0 * t) * 1e-9
            fluxes.append(div(f).coeffs)
        prof, _ = asymptotic_profile(times, fluxes, rho0, strict=False)
        assert abs(mass(prof) - mass(rho0)) < 1e-12

    def test_unsettled_tail_rejected(self, rng):
        rho0 = random_field(GRID, rng)
        times = np.linspace(0, 1, 5)
        big = [div(random_field(GRID, np.random.default_rng(3), ncomp=2)).coeffs
               for _ in times]
        with pytest.raises(TailNotConverged):
            asymptotic_profile(times, big, rho0)
