"""
States and right-hand sides for the five flow variants:

  euler_ns          pressureless phase (rho, u) drag-coupled to a viscous
                    compressible phase (n = 1 + a, v)
  df                one-velocity two-phase drift-flux system (rho, a, v)
  tns               passive density transported by incompressible flow
  euler_ns_scaled   Mach-scaled variant with drag rate 1/(eps*tau)
  df_scaled         Mach-scaled drift-flux variant

Velocity equations are advanced in non-conservative form; transport
equations in divergence form, so their zero Fourier mode is exactly
invariant.  The pressure law is P(n) = n^gamma / gamma, hence P'(1) = 1 and
the pressure coefficients

    g(a) = 1 - (1+a)^(gamma-2),    f(a) = -a / (1+a)

are closed-form.  Composite nonlinearities are evaluated pointwise on the
physical grid, transformed, and dealiased once.

Every rhs takes ``include_linear``: with False it returns only the part
complementary to the constant-coefficient symbol that an exponential
integrator treats exactly (drag, acoustics, viscosity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMixture, StepRejected, TailNotConverged, VacuumGas
from .spectral import (
    Grid,
    PhysParams,
    SpectralField,
    div,
    grad,
    grad_div,
    l2_norm,
    laplacian,
    leray_project,
    pointwise,
    to_physical,
)

N_MIN = 0.1          # admissibility floor for the gas density 1 + a
MIX_FLOOR = 0.05     # admissibility floor for the mixture density
RHO_NEG_TOL = 1e-10  # absolute floor of the rho >= 0 truncation tolerance
RHO_NEG_REL = 1e-5   # relative part: dealiasing ripple scales with sup|rho|


# ---------------------------------------------------------------------------
# states


@dataclass
class StateEulerNS:
    rho: SpectralField
    u: SpectralField
    a: SpectralField
    v: SpectralField

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    def fields(self):
        return {"rho": self.rho, "u": self.u, "a": self.a, "v": self.v}

    def copy(self):
        return StateEulerNS(self.rho.copy(), self.u.copy(), self.a.copy(), self.v.copy())

    def validate(self):
        a_ph = to_physical(self.a)
        if float(np.min(1.0 + a_ph)) <= N_MIN:
            raise VacuumGas(f"min(1+a) = {np.min(1.0 + a_ph):.4g} <= {N_MIN}")
        rho_ph = to_physical(self.rho)
        tol = max(RHO_NEG_TOL, RHO_NEG_REL * float(np.max(np.abs(rho_ph))))
        if float(np.min(rho_ph)) < -tol:
            raise VacuumGas(f"min(rho) = {np.min(rho_ph):.4g} < -{tol:g}")
        return self


@dataclass
class StateDF:
    rho: SpectralField
    a: SpectralField
    v: SpectralField

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    def fields(self):
        return {"rho": self.rho, "a": self.a, "v": self.v}

    def copy(self):
        return StateDF(self.rho.copy(), self.a.copy(), self.v.copy())

    def validate(self):
        mix = to_physical(self.rho) + 1.0 + to_physical(self.a)
        if float(np.min(mix)) <= 0.0:
            raise DegenerateMixture(f"min(rho + n) = {np.min(mix):.4g} <= 0")
        return self


@dataclass
class StateTNS:
    varrho: SpectralField
    w: SpectralField

    @property
    def grid(self) -> Grid:
        return self.varrho.grid

    def fields(self):
        return {"varrho": self.varrho, "w": self.w}

    def copy(self):
        return StateTNS(self.varrho.copy(), self.w.copy())

    def validate(self):
        d = div(self.w)
        if l2_norm(d) > 1e-10 * max(1.0, l2_norm(self.w)):
            raise StepRejected("transport velocity is not divergence-free")
        return self


# ---------------------------------------------------------------------------
# helpers


def _advect(vel_ph: np.ndarray, f: SpectralField) -> np.ndarray:
    """(vel . grad) f in physical space; f scalar or vector."""
    g = f.grid
    if f.is_vector:
        out = np.zeros((g.dim,) + g.shape)
        for i in range(g.dim):
            gi = to_physical(grad(f.component(i)))
            out[i] = np.sum(vel_ph * gi, axis=0)
        return out
    gf = to_physical(grad(f))
    return np.sum(vel_ph * gf, axis=0)


def _div_flux(grid: Grid, dens_ph: np.ndarray, vel_ph: np.ndarray) -> SpectralField:
    """div(dens * vel) in divergence form: exact zero mean."""
    flux = pointwise(grid, dens_ph[np.newaxis] * vel_ph)
    return div(flux)


def pressure_terms(a: SpectralField, gamma: float) -> tuple[SpectralField, SpectralField]:
    """The pointwise pressure coefficients g(a) and f(a), dealiased."""
    a_ph = to_physical(a)
    n_ph = 1.0 + a_ph
    if float(np.min(n_ph)) <= N_MIN:
        raise VacuumGas(f"min(1+a) = {np.min(n_ph):.4g} <= {N_MIN}")
    g_ph = 1.0 - n_ph ** (gamma - 2.0)
    f_ph = -a_ph / n_ph
    return pointwise(a.grid, g_ph), pointwise(a.grid, f_ph)


def _visc(v: SpectralField, mu: float, lam: float) -> SpectralField:
    return mu * laplacian(v) + (mu + lam) * grad_div(v)


# ---------------------------------------------------------------------------
# euler_ns


def rhs_euler_ns(state: StateEulerNS, params: PhysParams, include_linear: bool = True) -> StateEulerNS:
    """
    d/dt rho = -div(rho u)
    d/dt u   = -u.grad u - (1/tau)(u - v)
    d/dt a   = -div v - div(a v)
    d/dt v   = -v.grad v - grad a + mu lap v + (mu+lam) grad div v
               + (1/tau) rho (u - v) + g(a) grad a
               + f(a)(mu lap v + (mu+lam) grad div v) + (1/tau) f(a) rho (u-v)
    """
    g = state.grid
    tau, mu, lam, gamma = params.tau, params.mu, params.lam, params.gamma

    rho_ph = to_physical(state.rho)
    u_ph = to_physical(state.u)
    v_ph = to_physical(state.v)
    a_ph = to_physical(state.a)
    n_ph = 1.0 + a_ph
    if float(np.min(n_ph)) <= N_MIN:
        raise VacuumGas(f"min(1+a) = {np.min(n_ph):.4g} <= {N_MIN}")

    drho = -1.0 * _div_flux(g, rho_ph, u_ph)
    du = pointwise(g, -_advect(u_ph, state.u))
    da = -1.0 * _div_flux(g, a_ph, v_ph)

    grad_a_ph = to_physical(grad(state.a))
    visc_v = _visc(state.v, mu, lam)
    visc_ph = to_physical(visc_v)
    fa = -a_ph / n_ph
    ga = 1.0 - n_ph ** (gamma - 2.0)
    rel_ph = u_ph - v_ph
    drag_v = (rho_ph / tau) * rel_ph * (1.0 + fa)  # 1 + f(a) = 1/(1+a)
    dv = pointwise(g, -_advect(v_ph, state.v) + ga * grad_a_ph + fa * visc_ph + drag_v)

    if include_linear:
        du = SpectralField(g, du.coeffs - (state.u.coeffs - state.v.coeffs) / tau)
        da = da - div(state.v)
        dv = SpectralField(g, dv.coeffs - grad(state.a).coeffs + visc_v.coeffs)
    return StateEulerNS(drho, du, da, dv)


def linear_rhs_euler_ns(state: StateEulerNS, params: PhysParams) -> StateEulerNS:
    """The constant-coefficient part alone (drag, acoustics, viscosity)."""
    g = state.grid
    zero = SpectralField(g, np.zeros_like(state.rho.coeffs))
    du = SpectralField(g, -(state.u.coeffs - state.v.coeffs) / params.tau)
    da = -1.0 * div(state.v)
    dv = SpectralField(g, -grad(state.a).coeffs + _visc(state.v, params.mu, params.lam).coeffs)
    return StateEulerNS(zero, du, da, dv)


# ---------------------------------------------------------------------------
# drift-flux


def _mixture(rho_ph, a_ph):
    mix = rho_ph + 1.0 + a_ph
    if float(np.min(mix)) <= MIX_FLOOR:
        raise DegenerateMixture(f"min(rho + n) = {np.min(mix):.4g} <= {MIX_FLOOR}")
    return mix


def rhs_df(state: StateDF, params: PhysParams, include_linear: bool = True) -> StateDF:
    """
    d/dt rho = -div(rho v)
    d/dt a   = -div v - div(a v)
    d/dt v   = -v.grad v - (P'(1+a)/(rho+1+a)) grad a
               + (mu lap v + (mu+lam) grad div v)/(rho+1+a)
    """
    g = state.grid
    mu, lam, gamma = params.mu, params.lam, params.gamma
    rho_ph = to_physical(state.rho)
    a_ph = to_physical(state.a)
    v_ph = to_physical(state.v)
    mix = _mixture(rho_ph, a_ph)

    drho = -1.0 * _div_flux(g, rho_ph, v_ph)
    da = -1.0 * _div_flux(g, a_ph, v_ph)

    grad_a_ph = to_physical(grad(state.a))
    visc_v = _visc(state.v, mu, lam)
    visc_ph = to_physical(visc_v)
    pcoef = (1.0 + a_ph) ** (gamma - 1.0) / mix  # P'(n)/(rho+n)
    dv = pointwise(
        g, -_advect(v_ph, state.v) - (pcoef - 1.0) * grad_a_ph + (1.0 / mix - 1.0) * visc_ph
    )

    if include_linear:
        da = da - div(state.v)
        dv = SpectralField(g, dv.coeffs - grad(state.a).coeffs + visc_v.coeffs)
    return StateDF(drho, da, dv)


def momentum_rhs_df_conservative(state: StateDF, params: PhysParams) -> SpectralField:
    """d/dt((rho+n)v) in conservative form; cross-check for rhs_df."""
    g = state.grid
    rho_ph = to_physical(state.rho)
    a_ph = to_physical(state.a)
    v_ph = to_physical(state.v)
    mix = rho_ph + 1.0 + a_ph
    out = np.zeros((g.dim,) + g.shape, dtype=np.complex128)
    for i in range(g.dim):
        row = pointwise(g, mix * v_ph[i] * v_ph)  # row i of (rho+n) v x v
        out[i] = -div(row).coeffs
    press = pointwise(g, (1.0 + a_ph) ** params.gamma / params.gamma)
    out -= grad(press).coeffs
    out += _visc(state.v, params.mu, params.lam).coeffs
    return SpectralField(g, out)


def momentum_rhs_df_nonconservative(state: StateDF, params: PhysParams) -> SpectralField:
    """d/dt((rho+n)v) rebuilt from the non-conservative evaluation."""
    g = state.grid
    d = rhs_df(state, params)
    rho_ph = to_physical(state.rho)
    a_ph = to_physical(state.a)
    v_ph = to_physical(state.v)
    mix = rho_ph + 1.0 + a_ph
    dmix_ph = to_physical(d.rho) + to_physical(d.a)
    dv_ph = to_physical(d.v)
    return pointwise(g, mix * dv_ph + dmix_ph * v_ph)


# ---------------------------------------------------------------------------
# transport-Navier-Stokes


def rhs_tns(state: StateTNS, params: PhysParams, include_linear: bool = True) -> StateTNS:
    """
    d/dt varrho = -div(varrho w)
    d/dt w      = P(-w.grad w) + mu lap w      (P the solenoidal projector)
    """
    g = state.grid
    w_ph = to_physical(state.w)
    varrho_ph = to_physical(state.varrho)
    dvarrho = -1.0 * _div_flux(g, varrho_ph, w_ph)
    adv = pointwise(g, -_advect(w_ph, state.w))
    dw, _ = leray_project(adv)
    if include_linear:
        dw = SpectralField(g, dw.coeffs + params.mu * laplacian(state.w).coeffs)
    return StateTNS(dvarrho, dw)


# ---------------------------------------------------------------------------
# scaled variants


def _pressure_slope_ratio(x: np.ndarray, gamma: float) -> np.ndarray:
    """(P'(1+x) - 1)/x, smoothly completed with value gamma-1 at x = 0."""
    out = np.empty_like(x)
    small = np.abs(x) < 1e-8
    out[small] = (gamma - 1.0) + 0.5 * (gamma - 1.0) * (gamma - 2.0) * x[small]
    xb = x[~small]
    out[~small] = ((1.0 + xb) ** (gamma - 1.0) - 1.0) / xb
    return out


def rhs_df_scaled(state: StateDF, eps: float, params: PhysParams, include_linear: bool = True) -> StateDF:
    """
    Mach-scaled drift-flux system.  The stiff pressure gradient enters only
    through the linear acoustic part (1/eps) grad a; the remaining pressure
    contribution is the O(1) pointwise coefficient
    (a*(P'(1+eps a)-1)/(eps a) - rho - a) / (1 + eps(rho+a)).
    """
    g = state.grid
    mu, lam, gamma = params.mu, params.lam, params.gamma
    rho_ph = to_physical(state.rho)
    a_ph = to_physical(state.a)
    v_ph = to_physical(state.v)
    m_ph = 1.0 + eps * (rho_ph + a_ph)
    if float(np.min(m_ph)) <= MIX_FLOOR:
        raise DegenerateMixture(f"min(1 + eps(rho+a)) = {np.min(m_ph):.4g} <= {MIX_FLOOR}")

    drho = -1.0 * _div_flux(g, rho_ph, v_ph)
    da = -1.0 * _div_flux(g, a_ph, v_ph)

    grad_a_ph = to_physical(grad(state.a))
    visc_v = _visc(state.v, mu, lam)
    visc_ph = to_physical(visc_v)
    pr = a_ph * _pressure_slope_ratio(eps * a_ph, gamma)
    dv = pointwise(
        g,
        -_advect(v_ph, state.v)
        - ((pr - rho_ph - a_ph) / m_ph) * grad_a_ph
        + (1.0 / m_ph - 1.0) * visc_ph,
    )

    if include_linear:
        da = da - (1.0 / eps) * div(state.v)
        dv = SpectralField(g, dv.coeffs - grad(state.a).coeffs / eps + visc_v.coeffs)
    return StateDF(drho, da, dv)


def rhs_euler_ns_scaled(
    state: StateEulerNS, eps: float, tau: float, params: PhysParams, include_linear: bool = True
) -> StateEulerNS:
    """
    Mach-scaled drag-coupled system with friction rate 1/(eps*tau); the
    combined-limit regime uses tau = eps.
    """
    g = state.grid
    mu, lam, gamma = params.mu, params.lam, params.gamma
    kappa = 1.0 / (eps * tau)
    rho_ph = to_physical(state.rho)
    u_ph = to_physical(state.u)
    v_ph = to_physical(state.v)
    a_ph = to_physical(state.a)
    m_ph = 1.0 + eps * a_ph
    if float(np.min(m_ph)) <= MIX_FLOOR:
        raise VacuumGas(f"min(1 + eps a) = {np.min(m_ph):.4g} <= {MIX_FLOOR}")

    drho = -1.0 * _div_flux(g, rho_ph, u_ph)
    du = pointwise(g, -_advect(u_ph, state.u))
    da = -1.0 * _div_flux(g, a_ph, v_ph)

    grad_a_ph = to_physical(grad(state.a))
    visc_v = _visc(state.v, mu, lam)
    visc_ph = to_physical(visc_v)
    pr = a_ph * _pressure_slope_ratio(eps * a_ph, gamma)
    rel_ph = u_ph - v_ph
    drag_v = rho_ph * rel_ph / (tau * m_ph)
    dv = pointwise(
        g,
        -_advect(v_ph, state.v)
        - ((pr - a_ph) / m_ph) * grad_a_ph
        + (1.0 / m_ph - 1.0) * visc_ph
        + drag_v,
    )

    if include_linear:
        du = SpectralField(g, du.coeffs - kappa * (state.u.coeffs - state.v.coeffs))
        da = da - (1.0 / eps) * div(state.v)
        dv = SpectralField(g, dv.coeffs - grad(state.a).coeffs / eps + visc_v.coeffs)
    return StateEulerNS(drho, du, da, dv)


# ---------------------------------------------------------------------------
# derived quantities


def effective_mixed_velocity(state: StateEulerNS, eps: float | None = None) -> SpectralField:
    """
    Density-weighted velocity combining the two phases into one unknown:
    (rho u + n v)/(rho + n), or, in the Mach-scaled setting, the analogue
    with weights eps*rho/(1 + eps rho + eps a).
    """
    g = state.grid
    rho_ph = to_physical(state.rho)
    a_ph = to_physical(state.a)
    u_ph = to_physical(state.u)
    v_ph = to_physical(state.v)
    if eps is None:
        mix = rho_ph + 1.0 + a_ph
        if float(np.min(mix)) <= MIX_FLOOR:
            raise DegenerateMixture(f"min(rho+n) = {np.min(mix):.4g} <= {MIX_FLOOR}")
        w = rho_ph / mix
    else:
        mix = 1.0 + eps * (rho_ph + a_ph)
        if float(np.min(mix)) <= MIX_FLOOR:
            raise DegenerateMixture(f"min(1+eps(rho+a)) = {np.min(mix):.4g} <= {MIX_FLOOR}")
        w = eps * rho_ph / mix
    return pointwise(g, w * u_ph + (1.0 - w) * v_ph)


def relative_velocity_residual(state: StateEulerNS, params: PhysParams) -> float:
    """
    Relative L2 mismatch between d/dt(u - v) computed from the two phase
    equations and from the damped relative-velocity equation; an algebraic
    identity of the implementation, expected at roundoff level.
    """
    g = state.grid
    d = rhs_euler_ns(state, params)
    lhs = SpectralField(g, d.u.coeffs - d.v.coeffs)

    tau, mu, lam, gamma = params.tau, params.mu, params.lam, params.gamma
    u_ph = to_physical(state.u)
    v_ph = to_physical(state.v)
    a_ph = to_physical(state.a)
    rho_ph = to_physical(state.rho)
    n_ph = 1.0 + a_ph
    fa = -a_ph / n_ph
    ga = 1.0 - n_ph ** (gamma - 2.0)
    visc_ph = to_physical(_visc(state.v, mu, lam))
    rel_ph = u_ph - v_ph
    f1_ph = ga * to_physical(grad(state.a)) + fa * visc_ph
    f2_ph = fa * rho_ph * rel_ph / tau
    rhs_ph = (-_advect(u_ph, state.u) + _advect(v_ph, state.v)
              - (rho_ph / tau) * rel_ph - f1_ph - f2_ph)
    rhs_f = pointwise(g, rhs_ph)
    out = SpectralField(
        g,
        -(state.u.coeffs - state.v.coeffs) / tau
        + grad(state.a).coeffs
        - _visc(state.v, mu, lam).coeffs
        + rhs_f.coeffs,
    )
    scale = max(l2_norm(lhs), l2_norm(out), 1e-300)
    return l2_norm(lhs - out) / scale


def asymptotic_profile(
    times: np.ndarray,
    div_flux_coeffs: list[np.ndarray],
    rho0: SpectralField,
    tail_tol: float = 1e-8,
    strict: bool = True,
) -> tuple[SpectralField, float]:
    """
    Terminal density profile rho0 - integral of div(rho u) over the recorded
    window, by trapezoid in time.  Returns (profile, final flux L2 norm);
    in strict mode the final flux norm must be below ``tail_tol``.
    """
    g = rho0.grid
    times = np.asarray(times, dtype=np.float64)
    stack = np.stack(div_flux_coeffs)
    tail = float(np.sqrt(g.volume * np.sum(np.abs(stack[-1]) ** 2)))
    if strict and tail > tail_tol:
        raise TailNotConverged(f"final ||div(rho u)||_L2 = {tail:.3e} > {tail_tol:g}")
    integ = np.trapezoid(stack, times, axis=0)
    return SpectralField(g, rho0.coeffs - integ), tail


def mass(f: SpectralField) -> float:
    """Integral of a scalar field over the torus."""
    return float(np.real(f.zero_mode())) * f.grid.volume


def total_momentum_rate(state: StateEulerNS, params: PhysParams) -> float:
    """
    |d/dt integral(rho u + n v)| implied by the rhs, using only pointwise
    products of band-limited fields so the drag cancellation is exact.
    """
    g = state.grid
    d = rhs_euler_ns(state, params)
    rho_ph = to_physical(state.rho)
    n_ph = 1.0 + to_physical(state.a)
    u_ph = to_physical(state.u)
    v_ph = to_physical(state.v)
    du_ph = to_physical(d.u)
    dv_ph = to_physical(d.v)
    drho_ph = to_physical(d.rho)
    da_ph = to_physical(d.a)
    rate = (rho_ph * du_ph + drho_ph * u_ph + n_ph * dv_ph + da_ph * v_ph)
    per_comp = np.sum(rate, axis=tuple(range(1, rate.ndim))) * g.cell_volume
    return float(np.max(np.abs(per_comp)))
