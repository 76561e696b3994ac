"""Pseudo-spectral weak solutions of 2D incompressible Euler on the torus.

Vorticity-streamfunction formulation: the scalar vorticity is advanced with
the classical 4-stage explicit integrator, velocity is recovered through the
spectral Biot-Savart map (which enforces the divergence constraint
identically), and the quadratic advection term is evaluated pointwise in
conservative form ``div(u w)`` and 2/3-dealiased, so it coincides with the
Galerkin product of band-limited fields and its spatial mean vanishes exactly
in spectral form.  Pressure never enters the time loop; it is recovered
diagnostically from the div-div Poisson equation.

Energy and enstrophy of the dealiased semi-discretization are conserved in
continuous time; all recorded drift is the integrator's and shrinks like
dt^4.  Under-resolved runs are legal but show up as admissibility violations
in the energy ledger, which is a checked property, never an enforced one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ConfigurationError, SolverAbort, StepSizeError
from .grid_fields import (
    PeriodicGrid,
    ScalarField,
    VelocityField,
    curl_2d,
    divergence,
    gradient,
    inner,
    lp_norm,
    max_norm,
)

__all__ = [
    "SolverState",
    "Trajectory",
    "TimeProfile",
    "WeakTestFunction",
    "cosine_window",
    "linear_window",
    "step",
    "solve",
    "recover_pressure",
    "admissibility_check",
    "AdmissibilityReport",
    "weak_residual",
    "kinetic_energy",
    "enstrophy",
]

DEFAULT_CFL = 0.5


def kinetic_energy(u: VelocityField) -> float:
    """``0.5 * int |u|^2``."""
    return 0.5 * lp_norm(u, 2.0) ** 2


def enstrophy(w: ScalarField) -> float:
    """``int w^2`` of the scalar vorticity."""
    return lp_norm(w, 2.0) ** 2


def _velocity_hats(grid: PeriodicGrid, w_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Biot-Savart in spectral form: u = perp-grad of the streamfunction."""
    psi = -w_hat * grid.inv_k_squared
    u1 = -1j * grid.deriv_wavenumber(1) * psi
    u2 = 1j * grid.deriv_wavenumber(0) * psi
    return u1, u2


def _advection_tendency(grid: PeriodicGrid, w_hat: np.ndarray) -> np.ndarray:
    """``-div(u w)`` with dealiased pointwise products (zero mean exactly)."""
    u1_hat, u2_hat = _velocity_hats(grid, w_hat)
    u1 = grid.irfftn(u1_hat)
    u2 = grid.irfftn(u2_hat)
    w = grid.irfftn(w_hat)
    f1 = grid.rfftn(u1 * w)
    f2 = grid.rfftn(u2 * w)
    f1 *= grid.dealias_mask
    f2 *= grid.dealias_mask
    return -(1j * grid.deriv_wavenumber(0) * f1 + 1j * grid.deriv_wavenumber(1) * f2)


def _rk4(grid: PeriodicGrid, w_hat: np.ndarray, dt: float,
         rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    k1 = rhs(w_hat)
    k2 = rhs(w_hat + (0.5 * dt) * k1)
    k3 = rhs(w_hat + (0.5 * dt) * k2)
    k4 = rhs(w_hat + dt * k3)
    return w_hat + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _materialize(grid: PeriodicGrid, time: float, w_hat: np.ndarray) -> "SolverState":
    u1_hat, u2_hat = _velocity_hats(grid, w_hat)
    velocity = VelocityField(
        [ScalarField.from_hat(grid, u1_hat), ScalarField.from_hat(grid, u2_hat)],
        divergence_free=True,
    )
    vorticity = ScalarField.from_hat(grid, w_hat.copy())
    return SolverState(time, velocity, vorticity)


@dataclass
class SolverState:
    """One time slice: velocity (divergence-free), scalar vorticity, and the
    diagnostically recovered zero-mean pressure (computed lazily)."""

    time: float
    velocity: VelocityField
    vorticity: ScalarField
    _pressure: Optional[ScalarField] = field(default=None, repr=False)

    @property
    def grid(self) -> PeriodicGrid:
        return self.velocity.grid

    @property
    def pressure(self) -> ScalarField:
        if self._pressure is None:
            self._pressure = recover_pressure(self.velocity)
        return self._pressure

    def max_speed(self) -> float:
        return self.velocity.max_speed()

    def admissible_dt(self, cfl: float = DEFAULT_CFL) -> float:
        speed = self.max_speed()
        if speed == 0.0:
            return math.inf
        return cfl * self.grid.spacing / speed


@dataclass
class Trajectory:
    """Time-ordered solver states with the kinetic-energy ledger."""

    states: list[SolverState]
    dt: float
    config: dict
    energy_ledger: list[float]

    def __post_init__(self):
        times = [s.time for s in self.states]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError("trajectory times must be strictly increasing")
        if len(self.energy_ledger) != len(self.states):
            raise ConfigurationError("energy ledger must have one entry per state")

    @property
    def times(self) -> list[float]:
        return [s.time for s in self.states]

    @property
    def grid(self) -> PeriodicGrid:
        return self.states[0].grid

    def final(self) -> SolverState:
        return self.states[-1]


def _check_cfl(state_speed: float, grid: PeriodicGrid, dt: float, cfl: float) -> None:
    if dt <= 0.0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    if state_speed == 0.0:
        return
    limit = cfl * grid.spacing / state_speed
    if dt > limit:
        raise StepSizeError(
            f"dt={dt} violates the CFL bound; admissible dt <= {limit}", limit
        )


def step(state: SolverState, dt: float, cfl: float = DEFAULT_CFL) -> SolverState:
    """Advance one RK4 step; rejects steps beyond the CFL bound."""
    grid = state.grid
    _check_cfl(state.max_speed(), grid, dt, cfl)
    w_hat = state.vorticity.hat * grid.dealias_mask
    new_hat = _rk4(grid, w_hat, dt, lambda w: _advection_tendency(grid, w))
    if not np.all(np.isfinite(new_hat)):
        raise SolverAbort(f"non-finite vorticity after step at t={state.time}", state.time)
    return _materialize(grid, state.time + dt, new_hat)


def _run_loop(
    grid: PeriodicGrid,
    w_hat: np.ndarray,
    T: float,
    dt: float,
    snapshot_stride: int,
    cfl: float,
    rhs: Callable[[np.ndarray], np.ndarray],
    materialize: Callable[[float, np.ndarray], SolverState],
) -> list[SolverState]:
    n_steps = round(T / dt)
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ConfigurationError(f"T={T} must be a positive integer multiple of dt={dt}")
    states = [materialize(0.0, w_hat)]
    _check_cfl(states[0].max_speed(), grid, dt, cfl)
    for k in range(1, n_steps + 1):
        w_hat = _rk4(grid, w_hat, dt, rhs)
        t = k * dt
        if not np.all(np.isfinite(w_hat)):
            raise SolverAbort(f"non-finite state at t={t}", t)
        if k % snapshot_stride == 0 or k == n_steps:
            state = materialize(t, w_hat)
            # CFL is re-audited at snapshot cadence against the evolved speed.
            _check_cfl(state.max_speed(), grid, dt, cfl)
            states.append(state)
    return states


def solve(
    u0: VelocityField,
    T: float,
    dt: float,
    snapshot_stride: int = 1,
    cfl: float = DEFAULT_CFL,
    config: Optional[dict] = None,
) -> Trajectory:
    """Integrate from divergence-free initial data, recording snapshots every
    ``snapshot_stride`` steps (the final state is always recorded)."""
    grid = u0.grid
    if grid.dims != 2:
        raise ConfigurationError("the solver supports dims=2 only")
    if snapshot_stride < 1:
        raise ConfigurationError("snapshot_stride must be >= 1")
    ref = max(max_norm(u0), 1e-300)
    if max_norm(divergence(u0)) > 1e-8 * ref:
        raise ConfigurationError("initial velocity is not divergence-free")
    w_hat = curl_2d(u0).hat * grid.dealias_mask
    states = _run_loop(
        grid, w_hat, T, dt, snapshot_stride, cfl,
        lambda w: _advection_tendency(grid, w),
        lambda t, w: _materialize(grid, t, w),
    )
    ledger = [kinetic_energy(s.velocity) for s in states]
    cfg = dict(config or {})
    cfg.update({"T": T, "dt": dt, "snapshot_stride": snapshot_stride, "cfl": cfl,
                "grid_n": grid.n_per_axis})
    return Trajectory(states, dt, cfg, ledger)


def recover_pressure(u: VelocityField) -> ScalarField:
    """Zero-mean solution of ``-lap p = div div (u (x) u)`` (spectral)."""
    grid = u.grid
    acc = np.zeros(grid.rshape, dtype=complex)
    for i in range(grid.dims):
        ki = grid.deriv_wavenumber(i)
        for j in range(grid.dims):
            kj = grid.deriv_wavenumber(j)
            t_hat = grid.rfftn(u.components[i].values * u.components[j].values)
            t_hat *= grid.dealias_mask
            acc = acc + ki * kj * t_hat
    return ScalarField.from_hat(grid, -acc * grid.inv_k_squared)


@dataclass
class AdmissibilityReport:
    """Outcome of the energy-monotonicity audit over all ordered time pairs."""

    passed: bool
    max_violation: float
    worst_pair: Optional[tuple[float, float]]
    tolerance: float


def admissibility_check(traj: Trajectory, tolerance: float) -> AdmissibilityReport:
    """Verify the ledger never rises by more than ``tolerance`` between any
    ordered pair of recorded times."""
    times = traj.times
    ledger = traj.energy_ledger
    worst = 0.0
    worst_pair = None
    run_min = ledger[0]
    run_min_t = times[0]
    for t, e in zip(times[1:], ledger[1:]):
        gain = e - run_min
        if gain > worst:
            worst = gain
            worst_pair = (run_min_t, t)
        if e < run_min:
            run_min = e
            run_min_t = t
    return AdmissibilityReport(worst <= tolerance, worst, worst_pair, tolerance)


@dataclass(frozen=True)
class TimeProfile:
    """C^1 temporal weight on [0, T) with analytic integrals.

    ``antiderivative`` integrates ``value`` and ``antiderivative2`` integrates
    ``antiderivative`` (constants are irrelevant; only differences are used).
    They let the residual quadrature integrate the known profile exactly, so
    the only quadrature error left is the piecewise-linear reconstruction of
    the measured pairings.
    """

    value: Callable[[float], float]
    derivative: Callable[[float], float]
    antiderivative: Callable[[float], float]
    antiderivative2: Callable[[float], float]
    horizon: float


def cosine_window(T: float) -> TimeProfile:
    """``(1 + cos(pi t / T)) / 2``: unit mass at t=0, vanishing with zero
    slope at t=T."""
    w = math.pi / T
    return TimeProfile(
        value=lambda t: 0.5 * (1.0 + math.cos(w * t)),
        derivative=lambda t: -0.5 * w * math.sin(w * t),
        antiderivative=lambda t: 0.5 * t + 0.5 / w * math.sin(w * t),
        antiderivative2=lambda t: 0.25 * t * t - 0.5 / (w * w) * math.cos(w * t),
        horizon=T,
    )


def linear_window(T: float) -> TimeProfile:
    """``1 - t/T``: the gentlest C^1 weight vanishing at the horizon."""
    return TimeProfile(
        value=lambda t: 1.0 - t / T,
        derivative=lambda t: -1.0 / T,
        antiderivative=lambda t: t - t * t / (2.0 * T),
        antiderivative2=lambda t: t * t / 2.0 - t**3 / (6.0 * T),
        horizon=T,
    )


@dataclass
class WeakTestFunction:
    """Separable test function ``profile(t) * spatial(x)``.

    Vector-valued spatial parts must be discretely divergence-free and
    band-limited below the dealias cutoff; the temporal profile must vanish
    at the horizon.
    """

    spatial: Union[VelocityField, ScalarField]
    temporal: TimeProfile

    def __post_init__(self):
        grid = self.spatial.grid
        if isinstance(self.spatial, VelocityField):
            ref = max(max_norm(self.spatial), 1e-300)
            if max_norm(divergence(self.spatial)) > 1e-12 * ref:
                raise ConfigurationError("vector test function must be divergence-free")
            hats = [c.hat for c in self.spatial.components]
        else:
            hats = [self.spatial.hat]
        for h in hats:
            tail = np.abs(h[~grid.dealias_mask])
            if tail.size and tail.max() > 1e-12 * max(1.0, np.abs(h).max()):
                raise ConfigurationError(
                    "test function must be band-limited below the dealias cutoff"
                )
        if abs(self.temporal.value(self.temporal.horizon)) > 1e-12:
            raise ConfigurationError("temporal profile must vanish at the horizon")


def _integrate_against(values: Sequence[float], times: Sequence[float],
                       g: TimeProfile, weight: str) -> float:
    """Integrate the piecewise-linear interpolant of sampled ``values``
    against the analytic profile (weight ``"value"``) or its derivative
    (weight ``"derivative"``); the profile part is integrated exactly."""
    acc = 0.0
    for i in range(len(times) - 1):
        t0, t1 = times[i], times[i + 1]
        dt = t1 - t0
        a0 = values[i]
        slope = (values[i + 1] - a0) / dt
        if weight == "derivative":
            # int (a0 + s(t-t0)) g' = a0 dg + s (dt g1 - dG)
            dg = g.value(t1) - g.value(t0)
            dG = g.antiderivative(t1) - g.antiderivative(t0)
            acc += a0 * dg + slope * (dt * g.value(t1) - dG)
        else:
            # int (a0 + s(t-t0)) g = a0 dG + s (dt G1 - dG2)
            dG = g.antiderivative(t1) - g.antiderivative(t0)
            dG2 = g.antiderivative2(t1) - g.antiderivative2(t0)
            acc += a0 * dG + slope * (dt * g.antiderivative(t1) - dG2)
    return acc


def weak_residual(traj: Trajectory, test: WeakTestFunction) -> float:
    """Absolute defect of the weak formulation over the recorded span.

    Vector tests check the momentum identity (time integral of
    ``u . dpsi/dt + u(x)u : grad psi`` against the boundary pairing); scalar
    tests check the divergence identity ``int u . grad phi = 0``.  The spatial
    pairings are sampled at snapshots and reconstructed piecewise-linearly in
    time; the temporal profile is integrated exactly, so the residual floor
    is set by the solution's own variation, not by the window's derivatives.
    """
    times = traj.times
    g = test.temporal
    if isinstance(test.spatial, VelocityField):
        psi = test.spatial
        grad_psi = [gradient(c) for c in psi.components]
        momentum = []
        transport = []
        for s in traj.states:
            u = s.velocity
            momentum.append(inner(u, psi))
            tr = 0.0
            for i in range(u.grid.dims):
                for j in range(u.grid.dims):
                    tr += float(
                        np.sum(
                            u.components[i].values
                            * u.components[j].values
                            * grad_psi[i].components[j].values
                        )
                    )
            transport.append(tr * u.grid.cell_volume)
        integral = _integrate_against(momentum, times, g, "derivative")
        integral += _integrate_against(transport, times, g, "value")
        boundary = momentum[-1] * g.value(times[-1]) - momentum[0] * g.value(times[0])
        return abs(integral - boundary)

    grad_phi = gradient(test.spatial)
    vals = [inner(s.velocity, grad_phi) for s in traj.states]
    return abs(_integrate_against(vals, times, g, "value"))
