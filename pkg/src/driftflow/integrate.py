"""
Time stepping with the stiff constant-coefficient part (drag, acoustics,
viscosity) applied exactly per Fourier mode and the remaining nonlinearity
treated explicitly.

Per mode, both velocities are split along the wavevector direction and its
orthogonal complement.  The potential components together with the gas
density follow the 3x3 drag-acoustic solution operator; the solenoidal
components follow the 2x2 drag-heat operator; the dispersed density has no
linear part.  Because the drag sits inside the exponential, the time step is
set by advection alone and never by the friction time.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import systems as sysmod
from .besov import BlockTimeSeries, block_lp_spectrum, family_for
from .errors import Diverged, StepRejected
from .linear import green_compressible, green_incompressible, acoustic_eigenvalues, _exp_diff
from .spectral import Grid, PhysParams, SpectralField, to_physical
from .systems import StateDF, StateEulerNS, StateTNS


@dataclass(frozen=True)
class Scheme:
    """Time-stepping configuration."""

    kind: str = "exp_rk2"      # exp_euler | exp_rk2 | imex_bdf2
    dt: float | None = None    # None: advective CFL estimate
    cfl_safety: float = 0.4
    dt_max: float = 0.1
    linear_only: bool = False  # drop the nonlinearity (exactness checks)
    ramp: bool = True          # refine dt through the initial drag layer

    def __post_init__(self):
        if self.kind not in ("exp_euler", "exp_rk2", "imex_bdf2"):
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")


# ---------------------------------------------------------------------------
# system descriptors


def _drag_rate(system: str, params: PhysParams) -> float | None:
    if system == "euler_ns":
        return 1.0 / params.tau
    if system == "euler_ns_scaled":
        return 1.0 / (params.eps * params.tau)
    return None


def _wave_speed(system: str, params: PhysParams) -> float:
    return 1.0 / params.eps if system.endswith("_scaled") else 1.0


def nonlinear_rhs(system: str, state, params: PhysParams):
    if system == "euler_ns":
        return sysmod.rhs_euler_ns(state, params, include_linear=False)
    if system == "euler_ns_scaled":
        return sysmod.rhs_euler_ns_scaled(state, params.eps, params.tau, params, include_linear=False)
    if system == "df":
        return sysmod.rhs_df(state, params, include_linear=False)
    if system == "df_scaled":
        return sysmod.rhs_df_scaled(state, params.eps, params, include_linear=False)
    if system == "tns":
        return sysmod.rhs_tns(state, params, include_linear=False)
    raise ValueError(f"unknown system {system!r}")


def full_rhs(system: str, state, params: PhysParams):
    if system == "euler_ns":
        return sysmod.rhs_euler_ns(state, params)
    if system == "euler_ns_scaled":
        return sysmod.rhs_euler_ns_scaled(state, params.eps, params.tau, params)
    if system == "df":
        return sysmod.rhs_df(state, params)
    if system == "df_scaled":
        return sysmod.rhs_df_scaled(state, params.eps, params)
    if system == "tns":
        return sysmod.rhs_tns(state, params)
    raise ValueError(f"unknown system {system!r}")


def _state_fields(state):
    return [getattr(state, f.name) for f in dataclasses.fields(state)]


def _rebuild(state, coeff_list):
    cls = state.__class__
    g = state.grid
    return cls(*[SpectralField(g, c) for c in coeff_list])


def state_lincomb(a: float, x, b: float = 0.0, y=None):
    """a*x + b*y on all fields of a state."""
    xs = _state_fields(x)
    if y is None:
        return _rebuild(x, [a * f.coeffs for f in xs])
    ys = _state_fields(y)
    return _rebuild(x, [a * fx.coeffs + b * fy.coeffs for fx, fy in zip(xs, ys)])


# ---------------------------------------------------------------------------
# exponential mode tables


@dataclass
class ModePropagatorTable:
    """Per-mode exact solution operator of the linear symbol over one step."""

    system: str
    grid: Grid
    dt: float
    # 3x3 on (e.u, a, e.v) for drag systems; 2x2 on (a, e.v) otherwise
    g00: np.ndarray | None = None
    g01: np.ndarray | None = None
    g02: np.ndarray | None = None
    g11: np.ndarray | None = None
    g12: np.ndarray | None = None
    g21: np.ndarray | None = None
    g22: np.ndarray | None = None
    # solenoidal parts: drag 2x2 (p00, p01, p11) or plain heat (p11)
    p00: np.ndarray | None = None
    p01: np.ndarray | None = None
    p11: np.ndarray | None = None

    @property
    def has_drag(self) -> bool:
        return self.p00 is not None


def precompute_mode_propagators(
    grid: Grid, params: PhysParams, dt: float, system: str = "euler_ns"
) -> ModePropagatorTable:
    """Assemble the exact one-step solution operator for every lattice mode."""
    xi = grid.kmag.ravel()
    shape = grid.shape
    kappa = _drag_rate(system, params)
    c = _wave_speed(system, params)
    nu, mu = params.nu, params.mu
    tab = ModePropagatorTable(system=system, grid=grid, dt=dt)

    if system == "tns":
        tab.p11 = np.exp(-mu * grid.k2 * dt)
        return tab

    if kappa is None:
        l2, l3 = acoustic_eigenvalues(xi, nu, c)
        d = _exp_diff(l2, l3, dt)
        e3 = np.exp(l3 * dt)
        aa = (e3 - l3 * d).reshape(shape)
        av = (-c * xi * d).reshape(shape)
        va = (c * xi * d).reshape(shape)
        vv = (e3 + l2 * d).reshape(shape)
        # (a, s_v) with s_v = e.v_hat; the i-factors of the potential variables
        # turn the real acoustic entries into +-i couplings
        tab.g11, tab.g12 = aa, 1j * av
        tab.g21, tab.g22 = -1j * va, vv
        tab.p11 = np.exp(-mu * grid.k2 * dt)
        return tab

    gc = green_compressible(xi, kappa, nu, c, dt)
    tab.g00 = gc["uu"].reshape(shape)
    tab.g01 = (-1j * gc["ua"]).reshape(shape)
    tab.g02 = gc["uv"].reshape(shape)
    tab.g11 = gc["aa"].reshape(shape)
    tab.g12 = (1j * gc["av"]).reshape(shape)
    tab.g21 = (-1j * gc["va"]).reshape(shape)
    tab.g22 = gc["vv"].reshape(shape)
    gi = green_incompressible(xi, kappa, mu, dt)
    tab.p00 = gi["uu"].reshape(shape)
    tab.p01 = gi["uv"].reshape(shape)
    tab.p11 = gi["vv"].reshape(shape)
    return tab


def _split_parallel(grid: Grid, vec: np.ndarray):
    s = np.sum(grid.ehat * vec, axis=0)
    perp = vec - grid.ehat * s[np.newaxis]
    return s, perp


def apply_propagator(tab: ModePropagatorTable, state):
    """One exact linear step; pure per-mode arithmetic, no transforms."""
    g = tab.grid
    if tab.system == "tns":
        return StateTNS(
            SpectralField(g, state.varrho.coeffs.copy()),
            SpectralField(g, tab.p11 * state.w.coeffs),
        )

    if tab.system in ("df", "df_scaled"):
        sv, vperp = _split_parallel(g, state.v.coeffs)
        a = state.a.coeffs
        a_new = tab.g11 * a + tab.g12 * sv
        sv_new = tab.g21 * a + tab.g22 * sv
        v_new = g.ehat * sv_new[np.newaxis] + tab.p11 * vperp
        return StateDF(
            SpectralField(g, state.rho.coeffs.copy()),
            SpectralField(g, a_new),
            SpectralField(g, v_new),
        )

    su, uperp = _split_parallel(g, state.u.coeffs)
    sv, vperp = _split_parallel(g, state.v.coeffs)
    a = state.a.coeffs
    su_new = tab.g00 * su + tab.g01 * a + tab.g02 * sv
    a_new = tab.g11 * a + tab.g12 * sv
    sv_new = tab.g21 * a + tab.g22 * sv
    uperp_new = tab.p00 * uperp + tab.p01 * vperp
    vperp_new = tab.p11 * vperp
    u_new = g.ehat * su_new[np.newaxis] + uperp_new
    v_new = g.ehat * sv_new[np.newaxis] + vperp_new
    return StateEulerNS(
        SpectralField(g, state.rho.coeffs.copy()),
        SpectralField(g, u_new),
        SpectralField(g, a_new),
        SpectralField(g, v_new),
    )


# ---------------------------------------------------------------------------
# implicit resolvent for the IMEX scheme


@dataclass
class ResolventTable:
    """(I - alpha*L)^{-1} per mode, in the same layout as the propagator."""

    system: str
    grid: Grid
    alpha: float
    params: PhysParams


def apply_resolvent(tab: ResolventTable, state):
    g = tab.grid
    alpha = tab.alpha
    params = tab.params
    mu, nu = params.mu, params.nu
    c = _wave_speed(tab.system, params)
    kappa = _drag_rate(tab.system, params)
    k2 = g.k2
    kmag = g.kmag

    if tab.system == "tns":
        return StateTNS(
            SpectralField(g, state.varrho.coeffs.copy()),
            SpectralField(g, state.w.coeffs / (1.0 + alpha * mu * k2)),
        )

    # acoustic block: solve  a + i*alpha*c*xi*sv = b_a ;
    #                        sv*(1 + alpha*nu*xi^2) + i*alpha*c*xi*a = b_sv
    det = 1.0 + alpha * nu * k2 + alpha**2 * c**2 * k2

    if tab.system in ("df", "df_scaled"):
        sv, vperp = _split_parallel(g, state.v.coeffs)
        a = state.a.coeffs
        sv_new = (sv - 1j * alpha * c * kmag * a) / det
        a_new = a - 1j * alpha * c * kmag * sv_new
        v_new = g.ehat * sv_new[np.newaxis] + vperp / (1.0 + alpha * mu * k2)
        return StateDF(SpectralField(g, state.rho.coeffs.copy()),
                       SpectralField(g, a_new), SpectralField(g, v_new))

    su, uperp = _split_parallel(g, state.u.coeffs)
    sv, vperp = _split_parallel(g, state.v.coeffs)
    a = state.a.coeffs
    sv_new = (sv - 1j * alpha * c * kmag * a) / det
    a_new = a - 1j * alpha * c * kmag * sv_new
    su_new = (su + alpha * kappa * sv_new) / (1.0 + alpha * kappa)
    vperp_new = vperp / (1.0 + alpha * mu * k2)
    uperp_new = (uperp + alpha * kappa * vperp_new) / (1.0 + alpha * kappa)
    return StateEulerNS(
        SpectralField(g, state.rho.coeffs.copy()),
        SpectralField(g, g.ehat * su_new[np.newaxis] + uperp_new),
        SpectralField(g, a_new),
        SpectralField(g, g.ehat * sv_new[np.newaxis] + vperp_new),
    )


# ---------------------------------------------------------------------------
# steppers


class Stepper:
    """Bundles the tables and nonlinearity for a fixed (system, dt)."""

    def __init__(self, system: str, grid: Grid, params: PhysParams, scheme: Scheme, dt: float):
        self.system = system
        self.grid = grid
        self.params = params
        self.scheme = scheme
        self.dt = dt
        if scheme.kind == "exp_euler":
            self.e_full = precompute_mode_propagators(grid, params, dt, system)
        elif scheme.kind == "exp_rk2":
            self.e_half = precompute_mode_propagators(grid, params, 0.5 * dt, system)
        else:  # imex_bdf2
            self.e_half = precompute_mode_propagators(grid, params, 0.5 * dt, system)
            self.resolvent = ResolventTable(system, grid, 2.0 * dt / 3.0, params)
            self._prev = None
            self._prev_nl = None

    def _nl(self, state):
        if self.scheme.linear_only:
            return state_lincomb(0.0, state)
        return nonlinear_rhs(self.system, state, self.params)

    def step(self, state):
        dt = self.dt
        if self.scheme.kind == "exp_euler":
            k1 = self._nl(state)
            return apply_propagator(self.e_full, state_lincomb(1.0, state, dt, k1))
        if self.scheme.kind == "exp_rk2":
            k1 = self._nl(state)
            mid = apply_propagator(self.e_half, state_lincomb(1.0, state, 0.5 * dt, k1))
            k2 = self._nl(mid)
            half = apply_propagator(self.e_half, state)
            return apply_propagator(self.e_half, state_lincomb(1.0, half, dt, k2))
        # imex_bdf2 with an exponential midpoint start step
        nl_n = self._nl(state)
        if self._prev is None:
            mid = apply_propagator(self.e_half, state_lincomb(1.0, state, 0.5 * dt, nl_n))
            k2 = self._nl(mid)
            half = apply_propagator(self.e_half, state)
            new = apply_propagator(self.e_half, state_lincomb(1.0, half, dt, k2))
        else:
            lhs = state_lincomb(4.0 / 3.0, state, -1.0 / 3.0, self._prev)
            force = state_lincomb(2.0, nl_n, -1.0, self._prev_nl)
            new = apply_resolvent(self.resolvent, state_lincomb(1.0, lhs, 2.0 * dt / 3.0, force))
        self._prev = state
        self._prev_nl = nl_n
        return new


# ---------------------------------------------------------------------------
# observers


class ScalarObserver:
    kind = "scalar"

    def __init__(self, name: str, fn: Callable):
        self.name = name
        self.fn = fn

    def sample(self, state, t):
        return float(self.fn(state, t))


class BlockObserver:
    """Per-block Lp norms of a derived field; feeds the time-then-frequency norms."""

    kind = "blocks"

    def __init__(self, name: str, selector: Callable, p: float = 2.0):
        self.name = name
        self.selector = selector
        self.p = p

    def sample(self, state, t):
        f = self.selector(state)
        return block_lp_spectrum(f, self.p, family_for(f.grid))


class FieldObserver:
    """Stores full coefficient arrays of a derived field (time integrals)."""

    kind = "fields"

    def __init__(self, name: str, selector: Callable):
        self.name = name
        self.selector = selector

    def sample(self, state, t):
        return self.selector(state).coeffs.copy()


class CheckpointObserver:
    kind = "checkpoint"

    def __init__(self, name: str = "checkpoints"):
        self.name = name

    def sample(self, state, t):
        return state.copy()


@dataclass
class Trajectory:
    times: np.ndarray
    scalars: dict
    blocks: dict     # name -> BlockTimeSeries
    fields: dict     # name -> list of coeff arrays
    checkpoints: list
    meta: dict

    def block_series(self, name: str) -> BlockTimeSeries:
        return self.blocks[name]


# ---------------------------------------------------------------------------
# driver


def estimate_dt(state, scheme: Scheme) -> float:
    sup = 1e-12
    for f in _state_fields(state):
        if f.is_vector:
            sup = max(sup, float(np.max(np.sqrt(np.sum(to_physical(f) ** 2, axis=0)))))
    dt = scheme.cfl_safety * state.grid.dx / sup
    return min(dt, scheme.dt_max)


def _amplitude(state) -> float:
    return max(float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2))) for f in _state_fields(state))


def integrate(
    state0,
    T: float,
    scheme: Scheme,
    params: PhysParams,
    system: str = "euler_ns",
    observers: Sequence = (),
    sample_dt: float | None = None,
    validate_every: int = 25,
    divergence_factor: float = 1e3,
) -> Trajectory:
    """
    Advance ``state0`` to time T, sampling the observers along the way.

    When the drag rate is stiff relative to the main step, an initial ramp
    phase with dt proportional to the friction time resolves the relaxation
    layer (and is sampled every step so time quadratures see it); stability
    itself never requires the ramp since the drag is integrated exactly.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    grid = state0.grid
    dt_main = scheme.dt if scheme.dt is not None else estimate_dt(state0, scheme)
    dt_main = min(dt_main, T) if T > 0 else dt_main

    kappa = _drag_rate(system, params)
    phases = []
    t_ramp = 0.0
    if T > 0 and scheme.ramp and kappa is not None and 1.0 / kappa < 0.5 * dt_main:
        t_ramp = min(24.0 / kappa, 0.25 * T)
        n_ramp = max(1, int(np.ceil(t_ramp / (1.0 / (6.0 * kappa)))))
        phases.append((t_ramp, n_ramp, True))
    if T > t_ramp:
        n_main = max(1, int(np.ceil((T - t_ramp) / dt_main)))
        phases.append((T - t_ramp, n_main, False))

    if sample_dt is None:
        sample_dt = max(dt_main, T / 2000.0) if T > 0 else 1.0

    times = [0.0]
    scalars = {o.name: [] for o in observers if o.kind == "scalar"}
    blocks = {o.name: [] for o in observers if o.kind == "blocks"}
    fields = {o.name: [] for o in observers if o.kind == "fields"}
    checkpoints = []

    def take_sample(state, t):
        for o in observers:
            val = o.sample(state, t)
            if o.kind == "scalar":
                scalars[o.name].append(val)
            elif o.kind == "blocks":
                blocks[o.name].append(val)
            elif o.kind == "fields":
                fields[o.name].append(val)
            elif o.kind == "checkpoint":
                checkpoints.append((t, val))

    state = state0.copy()
    take_sample(state, 0.0)
    amp0 = _amplitude(state)
    masses0 = {k: f.zero_mode().copy() for k, f in state.fields().items() if not f.is_vector}

    t0 = 0.0
    steps_done = 0
    next_sample = sample_dt
    for span, nsteps, dense in phases:
        dt = span / nsteps
        stepper = Stepper(system, grid, params, scheme, dt)
        for i in range(nsteps):
            state = stepper.step(state)
            t = t0 + (i + 1) * dt
            steps_done += 1
            if steps_done % validate_every == 0:
                if not np.all(np.isfinite(state.fields()[next(iter(state.fields()))].coeffs.view(np.float64))):
                    raise Diverged(f"non-finite state at t = {t:.4g}")
                if _amplitude(state) > divergence_factor * max(amp0, 1e-300):
                    raise Diverged(f"amplitude grew by more than {divergence_factor:g} at t = {t:.4g}")
                try:
                    state.validate()
                except Exception as exc:
                    raise StepRejected(str(exc)) from exc
            at_end = (i == nsteps - 1) and (t0 + span >= T - 1e-12)
            if dense or t >= next_sample - 1e-12 or at_end:
                if abs(t - times[-1]) > 1e-12:
                    times.append(t)
                    take_sample(state, t)
                while next_sample <= t + 1e-12:
                    next_sample += sample_dt
        t0 += span

    drift = 0.0
    for k, z0 in masses0.items():
        z1 = state.fields()[k].zero_mode()
        drift = max(drift, abs(z1 - z0) / max(abs(z0), 1e-30))
    meta = {
        "system": system,
        "dt_main": dt_main,
        "t_ramp": t_ramp,
        "steps": steps_done,
        "mass_drift": float(np.real(drift)),
        "final_state": state,
    }
    blocks_out = {}
    fam = family_for(grid)
    for name, rows in blocks.items():
        blocks_out[name] = BlockTimeSeries(
            times=np.array(times), j_values=fam.j_values, values=np.array(rows).T
        )
    return Trajectory(
        times=np.array(times),
        scalars={k: np.array(v) for k, v in scalars.items()},
        blocks=blocks_out,
        fields=fields,
        checkpoints=checkpoints,
        meta=meta,
    )
