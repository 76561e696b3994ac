"""Inhomogeneous incompressible Euler and Euler-Boussinesq extensions.

The inhomogeneous system evolves ``(rho, u)`` with conservative spectral
transport of the density and the velocity form of the momentum equation,
``du/dt = -(u.grad)u - grad(p)/rho``; the pressure solves the
variable-coefficient equation ``div(grad(p)/rho) = -div((u.grad)u)`` by
preconditioned conjugate gradients (the constant-density spectral inverse is
the preconditioner), so the velocity stays exactly solenoidal.

The Boussinesq system keeps the homogeneous vorticity loop and adds the
buoyancy torque ``curl(theta g)`` plus conservative transport of ``theta``.
With ``theta = 0`` the torque is an exact zero array and the vorticity
arithmetic is identical to the homogeneous solver, so the reduction holds
value-for-value, not merely to a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .besov import besov_seminorm, fit_regularity_exponent
from .commutator import scaling_experiment, transport_commutator
from .errors import (
    ConfigurationError,
    PoissonConvergenceError,
    SolverAbort,
)
from .grid_fields import (
    PeriodicGrid,
    ScalarField,
    VelocityField,
    curl_2d,
    divergence,
    gradient,
    make_grid,
    max_norm,
    resample,
)
from .mollify import make_kernel, resolved_epsilon
from .solver import (
    DEFAULT_CFL,
    _advection_tendency,
    _check_cfl,
    _rk4,
    _velocity_hats,
    kinetic_energy,
)
from .uniqueness import (
    GronwallCertificate,
    LipschitzSeries,
    RelativeEnergySeries,
    RunConfig,
    gronwall_certify,
    one_sided_lipschitz,
    relative_energy,
)

__all__ = [
    "InhomState",
    "InhomTrajectory",
    "BoussinesqState",
    "BoussinesqTrajectory",
    "transport_step",
    "inhom_solve",
    "density_contraction_check",
    "DensityContractionReport",
    "boussinesq_solve",
    "boussinesq_uniqueness_experiment",
    "inhom_uniqueness_experiment",
]

POISSON_TOLERANCE = 1e-10
POISSON_MAX_ITER = 500


# ---------------------------------------------------------------------------
# shared spectral helpers


def _dealias_product_hat(grid: PeriodicGrid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    hat = grid.rfftn(a * b)
    hat *= grid.dealias_mask
    return hat


def _div_from_hats(grid: PeriodicGrid, hats: Sequence[np.ndarray]) -> np.ndarray:
    acc = np.zeros(grid.rshape, dtype=complex)
    for axis, h in enumerate(hats):
        acc = acc + 1j * grid.deriv_wavenumber(axis) * h
    return acc


def _transport_tendency(grid: PeriodicGrid, rho: np.ndarray, u: Sequence[np.ndarray]) -> np.ndarray:
    """``-div(rho u)`` in spectral form (zero mode exactly untouched)."""
    return -_div_from_hats(grid, [_dealias_product_hat(grid, rho, ui) for ui in u])


# ---------------------------------------------------------------------------
# density transport


def transport_step(
    rho: ScalarField, u: VelocityField, dt: float, cfl: float = DEFAULT_CFL
) -> ScalarField:
    """One 4-stage step of ``d(rho)/dt = -div(rho u)`` with ``u`` frozen."""
    grid = rho.grid
    if grid != u.grid:
        raise ConfigurationError("density and velocity must share a grid")
    _check_cfl(u.max_speed(), grid, dt, cfl)
    uvals = [c.values for c in u.components]

    def rhs(rho_hat: np.ndarray) -> np.ndarray:
        return _transport_tendency(grid, grid.irfftn(rho_hat), uvals)

    new_hat = _rk4(grid, rho.hat * grid.dealias_mask, dt, rhs)
    return ScalarField.from_hat(grid, new_hat)


# ---------------------------------------------------------------------------
# inhomogeneous solver


@dataclass
class InhomState:
    """One slice of the inhomogeneous system: positive density and a
    divergence-free velocity."""

    time: float
    density: ScalarField
    velocity: VelocityField

    @property
    def grid(self) -> PeriodicGrid:
        return self.density.grid

    def mass(self) -> float:
        return float(self.density.values.sum() * self.grid.cell_volume)

    def weighted_energy(self) -> float:
        mag2 = np.zeros(self.grid.shape)
        for c in self.velocity.components:
            mag2 += c.values * c.values
        return 0.5 * float(np.sum(self.density.values * mag2) * self.grid.cell_volume)


@dataclass
class InhomTrajectory:
    states: list[InhomState]
    dt: float
    config: dict
    energy_ledger: list[float]
    mass_ledger: list[float]

    @property
    def times(self) -> list[float]:
        return [s.time for s in self.states]

    @property
    def grid(self) -> PeriodicGrid:
        return self.states[0].grid

    def final(self) -> InhomState:
        return self.states[-1]


def _pressure_gradient_over_rho(
    grid: PeriodicGrid,
    beta: np.ndarray,
    rhs_div: np.ndarray,
    tol: float,
    max_iter: int,
):
    """Solve ``div(beta grad p) = rhs_div`` (beta = 1/rho) by preconditioned
    CG in physical space and return ``beta * grad p``.

    ``-div(beta grad .)`` is symmetric positive definite on zero-mean fields
    in the plain grid inner product; the preconditioner is the
    constant-coefficient spectral inverse with the mean of beta, exact for
    uniform density (then CG converges in a single iteration).
    """
    beta_mean = float(beta.mean())

    def grad_of(p_phys: np.ndarray):
        p_hat = grid.rfftn(p_phys)
        return [
            grid.irfftn(1j * grid.deriv_wavenumber(a) * p_hat)
            for a in range(grid.dims)
        ], p_hat

    def apply_op(p_phys: np.ndarray) -> np.ndarray:
        grads, _ = grad_of(p_phys)
        flux_hat = _div_from_hats(grid, [grid.rfftn(beta * gc) for gc in grads])
        return -grid.irfftn(flux_hat)

    def precondition(r_phys: np.ndarray) -> np.ndarray:
        r_hat = grid.rfftn(r_phys)
        return grid.irfftn(r_hat * grid.inv_k_squared) / beta_mean

    b = -grid.irfftn(rhs_div)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return [np.zeros(grid.shape) for _ in range(grid.dims)], 0
    x = np.zeros(grid.shape)
    r = b.copy()
    z = precondition(r)
    d = z.copy()
    rz = float(np.sum(r * z))
    for it in range(1, max_iter + 1):
        Ad = apply_op(d)
        dAd = float(np.sum(d * Ad))
        if dAd <= 0.0:
            raise PoissonConvergenceError(
                "pressure operator lost positivity (density too irregular?)",
                it,
                float(np.linalg.norm(r)),
            )
        step = rz / dAd
        x = x + step * d
        r = r - step * Ad
        if float(np.linalg.norm(r)) <= tol * b_norm:
            grads, _ = grad_of(x)
            return [beta * gc for gc in grads], it
        z = precondition(r)
        rz_new = float(np.sum(r * z))
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise PoissonConvergenceError(
        f"pressure solve did not reach {tol} in {max_iter} iterations",
        max_iter,
        float(np.linalg.norm(r)) / b_norm,
    )


def _inhom_velocity_tendency(
    grid: PeriodicGrid,
    rho: np.ndarray,
    u: Sequence[np.ndarray],
    tol: float,
    max_iter: int,
) -> list[np.ndarray]:
    """``-(u.grad)u - grad(p)/rho`` with the constraint-enforcing pressure,
    returned in spectral form and Leray-scrubbed of the CG residual."""
    adv_hats = []
    for i in range(grid.dims):
        row = [_dealias_product_hat(grid, u[i], u[j]) for j in range(grid.dims)]
        adv_hats.append(_div_from_hats(grid, row))
    beta = 1.0 / rho
    rhs_div = _div_from_hats(grid, adv_hats)  # div((u.grad)u) for div-free u
    bgp, _ = _pressure_gradient_over_rho(grid, beta, -rhs_div, tol, max_iter)
    f_hats = [-adv_hats[i] - grid.rfftn(bgp[i]) for i in range(grid.dims)]
    # scrub the leftover CG residual so stage velocities stay solenoidal
    k_dot = np.zeros(grid.rshape, dtype=complex)
    for a in range(grid.dims):
        k_dot = k_dot + grid.deriv_wavenumber(a) * f_hats[a]
    scale = k_dot * grid.inv_k_squared
    return [f_hats[a] - grid.deriv_wavenumber(a) * scale for a in range(grid.dims)]


def inhom_solve(
    rho0: ScalarField,
    u0: VelocityField,
    T: float,
    dt: float,
    snapshot_stride: int = 1,
    cfl: float = DEFAULT_CFL,
    poisson_tol: float = POISSON_TOLERANCE,
    poisson_max_iter: int = POISSON_MAX_ITER,
    config: Optional[dict] = None,
) -> InhomTrajectory:
    """Integrate the variable-density system from positive density and
    solenoidal velocity; the ledger records ``0.5 int rho |u|^2``."""
    grid = rho0.grid
    if grid.dims != 2:
        raise ConfigurationError("the inhomogeneous solver supports dims=2 only")
    if grid != u0.grid:
        raise ConfigurationError("density and velocity must share a grid")
    if float(rho0.values.min()) <= 0.0:
        raise ConfigurationError("initial density must be strictly positive")
    if max_norm(divergence(u0)) > 1e-8 * max(max_norm(u0), 1e-300):
        raise ConfigurationError("initial velocity is not divergence-free")
    n_steps = round(T / dt)
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ConfigurationError(f"T={T} must be a positive integer multiple of dt={dt}")

    rho_hat = rho0.hat * grid.dealias_mask
    u_hats = [c.hat * grid.dealias_mask for c in u0.components]

    def materialize(t: float) -> InhomState:
        rho = ScalarField.from_hat(grid, rho_hat.copy())
        vel = VelocityField(
            [ScalarField.from_hat(grid, h.copy()) for h in u_hats], divergence_free=True
        )
        return InhomState(t, rho, vel)

    def coupled_rhs(rh, uh):
        rho_phys = grid.irfftn(rh)
        u_phys = [grid.irfftn(h) for h in uh]
        d_rho = _transport_tendency(grid, rho_phys, u_phys)
        d_u = _inhom_velocity_tendency(grid, rho_phys, u_phys, poisson_tol, poisson_max_iter)
        return d_rho, d_u

    states = [materialize(0.0)]
    _check_cfl(states[0].velocity.max_speed(), grid, dt, cfl)
    for k in range(1, n_steps + 1):
        k1 = coupled_rhs(rho_hat, u_hats)
        k2 = coupled_rhs(
            rho_hat + 0.5 * dt * k1[0], [u + 0.5 * dt * d for u, d in zip(u_hats, k1[1])]
        )
        k3 = coupled_rhs(
            rho_hat + 0.5 * dt * k2[0], [u + 0.5 * dt * d for u, d in zip(u_hats, k2[1])]
        )
        k4 = coupled_rhs(
            rho_hat + dt * k3[0], [u + dt * d for u, d in zip(u_hats, k3[1])]
        )
        rho_hat = rho_hat + (dt / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        u_hats = [
            u + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + d)
            for u, a, b, c, d in zip(u_hats, k1[1], k2[1], k3[1], k4[1])
        ]
        t = k * dt
        if not all(np.all(np.isfinite(h)) for h in [rho_hat] + u_hats):
            raise SolverAbort(f"non-finite state at t={t}", t)
        if k % snapshot_stride == 0 or k == n_steps:
            state = materialize(t)
            if float(state.density.values.min()) <= 0.0:
                raise SolverAbort(f"density lost positivity at t={t}", t)
            _check_cfl(state.velocity.max_speed(), grid, dt, cfl)
            states.append(state)
    cfg = dict(config or {})
    cfg.update({"T": T, "dt": dt, "snapshot_stride": snapshot_stride, "cfl": cfl,
                "grid_n": grid.n_per_axis})
    return InhomTrajectory(
        states,
        dt,
        cfg,
        [s.weighted_energy() for s in states],
        [s.mass() for s in states],
    )


@dataclass
class DensityContractionReport:
    """Audit of ``0.5 int |rho - r|^2`` against the mollified transport
    commutator budget."""

    passed: bool
    max_violation: float
    worst_pair: Optional[tuple[float, float]]
    budget: float
    tolerance: float
    times: list[float]
    values: list[float]

    def to_json_dict(self) -> dict:
        return {
            "pass": self.passed,
            "max_violation": self.max_violation,
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
            "budget": self.budget,
            "tolerance": self.tolerance,
            "series": {"t": list(self.times), "D": list(self.values)},
        }


def _scalar_l2_half(grid: PeriodicGrid, a: np.ndarray, b: np.ndarray) -> float:
    d = a - b
    return 0.5 * float(np.sum(d * d) * grid.cell_volume)


def density_contraction_check(
    traj_a,
    traj_b,
    tolerance: float,
    working_epsilon: Optional[float] = None,
    field: str = "density",
) -> DensityContractionReport:
    """Verify the scalar-difference energy never grows beyond the mollified
    transport-commutator budget plus tolerance, over all ordered pairs.

    ``field`` selects which scalar to audit (density for the inhomogeneous
    system, theta for Boussinesq); both trajectories must share snapshot
    times.
    """
    times = traj_a.times
    if len(times) != len(traj_b.times) or any(
        abs(a - b) > 1e-12 for a, b in zip(times, traj_b.times)
    ):
        raise ConfigurationError("trajectories recorded different time axes")
    grid_a, grid_b = traj_a.grid, traj_b.grid
    cmp_grid = grid_a if grid_a.n_per_axis <= grid_b.n_per_axis else grid_b
    eps = working_epsilon if working_epsilon is not None else resolved_epsilon(cmp_grid)
    kernel = make_kernel(cmp_grid, eps)

    def scalar_of(state):
        return getattr(state, field) if field != "density" else state.density

    values = []
    pairing = []
    for sa, sb in zip(traj_a.states, traj_b.states):
        ra = resample(scalar_of(sa), cmp_grid)
        rb = resample(scalar_of(sb), cmp_grid)
        ua = resample(sa.velocity, cmp_grid)
        ub = resample(sb.velocity, cmp_grid)
        values.append(_scalar_l2_half(cmp_grid, ra.values, rb.values))
        tc_a = transport_commutator(ra, ua, kernel)
        tc_b = transport_commutator(rb, ub, kernel)
        diff_eps = ScalarField.from_hat(
            cmp_grid, (ra.hat - rb.hat) * kernel.multiplier
        )
        grad_diff = gradient(diff_eps)
        s = 0.0
        for i in range(cmp_grid.dims):
            s += float(
                np.sum(
                    (tc_a.components[i].values - tc_b.components[i].values)
                    * grad_diff.components[i].values
                )
            )
        pairing.append(abs(s * cmp_grid.cell_volume))
    budget = 0.0
    for i in range(len(times) - 1):
        budget += 0.5 * (pairing[i] + pairing[i + 1]) * (times[i + 1] - times[i])

    worst = 0.0
    worst_pair = None
    run_min = values[0]
    run_min_t = times[0]
    for t, d in zip(times[1:], values[1:]):
        gain = d - run_min - budget
        if gain > worst:
            worst = gain
            worst_pair = (run_min_t, t)
        if d < run_min:
            run_min = d
            run_min_t = t
    return DensityContractionReport(
        passed=worst <= tolerance,
        max_violation=worst,
        worst_pair=worst_pair,
        budget=budget,
        tolerance=tolerance,
        times=times,
        values=values,
    )


# ---------------------------------------------------------------------------
# Boussinesq


@dataclass
class BoussinesqState:
    """Temperature, divergence-free velocity, and the buoyancy direction."""

    time: float
    theta: ScalarField
    velocity: VelocityField
    g: tuple[float, float]

    @property
    def grid(self) -> PeriodicGrid:
        return self.theta.grid

    def theta_total(self) -> float:
        return float(self.theta.values.sum() * self.grid.cell_volume)


@dataclass
class BoussinesqTrajectory:
    states: list[BoussinesqState]
    dt: float
    config: dict
    energy_ledger: list[float]
    theta_ledger: list[float]

    @property
    def times(self) -> list[float]:
        return [s.time for s in self.states]

    @property
    def grid(self) -> PeriodicGrid:
        return self.states[0].grid

    def final(self) -> BoussinesqState:
        return self.states[-1]


def boussinesq_solve(
    theta0: ScalarField,
    u0: VelocityField,
    g: Sequence[float],
    T: float,
    dt: float,
    snapshot_stride: int = 1,
    cfl: float = DEFAULT_CFL,
    config: Optional[dict] = None,
) -> BoussinesqTrajectory:
    """Vorticity dynamics with buoyancy torque ``curl(theta g)`` and
    conservative transport of ``theta``.

    The vorticity tendency is the homogeneous advection term plus the torque,
    added afterwards; a vanishing ``theta`` therefore reproduces the
    homogeneous solver's arithmetic exactly.
    """
    grid = theta0.grid
    if grid.dims != 2:
        raise ConfigurationError("the Boussinesq solver supports dims=2 only")
    if grid != u0.grid:
        raise ConfigurationError("theta and velocity must share a grid")
    g = (float(g[0]), float(g[1]))
    if max_norm(divergence(u0)) > 1e-8 * max(max_norm(u0), 1e-300):
        raise ConfigurationError("initial velocity is not divergence-free")
    n_steps = round(T / dt)
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ConfigurationError(f"T={T} must be a positive integer multiple of dt={dt}")

    w_hat = curl_2d(u0).hat * grid.dealias_mask
    th_hat = theta0.hat * grid.dealias_mask
    torque_symbol = 1j * (g[1] * grid.deriv_wavenumber(0) - g[0] * grid.deriv_wavenumber(1))

    def velocity_from(wh):
        u1, u2 = _velocity_hats(grid, wh)
        return [grid.irfftn(u1), grid.irfftn(u2)]

    def rhs(wh, th):
        dw = _advection_tendency(grid, wh) + torque_symbol * th
        u = velocity_from(wh)
        dth = _transport_tendency(grid, grid.irfftn(th), u)
        return dw, dth

    def materialize(t):
        u1, u2 = _velocity_hats(grid, w_hat)
        vel = VelocityField(
            [ScalarField.from_hat(grid, u1), ScalarField.from_hat(grid, u2)],
            divergence_free=True,
        )
        return BoussinesqState(t, ScalarField.from_hat(grid, th_hat.copy()), vel, g)

    states = [materialize(0.0)]
    _check_cfl(states[0].velocity.max_speed(), grid, dt, cfl)
    for k in range(1, n_steps + 1):
        k1 = rhs(w_hat, th_hat)
        k2 = rhs(w_hat + 0.5 * dt * k1[0], th_hat + 0.5 * dt * k1[1])
        k3 = rhs(w_hat + 0.5 * dt * k2[0], th_hat + 0.5 * dt * k2[1])
        k4 = rhs(w_hat + dt * k3[0], th_hat + dt * k3[1])
        w_hat = w_hat + (dt / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        th_hat = th_hat + (dt / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        t = k * dt
        if not (np.all(np.isfinite(w_hat)) and np.all(np.isfinite(th_hat))):
            raise SolverAbort(f"non-finite state at t={t}", t)
        if k % snapshot_stride == 0 or k == n_steps:
            state = materialize(t)
            _check_cfl(state.velocity.max_speed(), grid, dt, cfl)
            states.append(state)
    cfg = dict(config or {})
    cfg.update({"T": T, "dt": dt, "snapshot_stride": snapshot_stride, "cfl": cfl,
                "grid_n": grid.n_per_axis, "g": list(g)})
    return BoussinesqTrajectory(
        states,
        dt,
        cfg,
        [kinetic_energy(s.velocity) for s in states],
        [s.theta_total() for s in states],
    )


# ---------------------------------------------------------------------------
# uniqueness experiments for the extended systems


@dataclass
class ExtendedUniquenessReport:
    """Homogeneous-style certificate plus the scalar-contraction audit."""

    times: list[float]
    energy: list[float]
    lipschitz: LipschitzSeries
    certificate: GronwallCertificate
    contraction: DensityContractionReport
    fitted_alpha: float
    required_alpha: float
    hypothesis_met: bool
    verdict: str
    alpha: float
    p_int: float
    working_epsilon: float
    quantity_alphas: dict

    def to_json_dict(self) -> dict:
        return {
            "series": {
                "t": list(self.times),
                "E": list(self.energy),
                "C": list(self.lipschitz.c_values),
            },
            "certificate": self.certificate.to_json_dict(),
            "contraction": self.contraction.to_json_dict(),
            "hypothesis": {
                "fitted_alpha": self.fitted_alpha,
                "required_alpha": self.required_alpha,
                "met": self.hypothesis_met,
                "per_quantity": dict(self.quantity_alphas),
            },
            "verdict": self.verdict,
            "alpha": self.alpha,
            "p": self.p_int,
            "working_epsilon": self.working_epsilon,
        }


def _fit_quantity(f, p_int: float) -> float:
    """Exponent fit that treats degenerate (constant) fields as maximally
    regular instead of unfittable."""
    try:
        return fit_regularity_exponent(f, p_int)
    except ConfigurationError:
        return 1.0


def _product_field(rho: ScalarField, u: VelocityField) -> VelocityField:
    return VelocityField.from_arrays(
        rho.grid, [rho.values * c.values for c in u.components]
    )


def _extended_experiment(
    solve_pair,
    scalar_name: str,
    alpha: float,
    p_int: float,
    epsilons: Sequence[float],
    contraction_tolerance: float,
    certify_tolerance: Optional[float],
) -> ExtendedUniquenessReport:
    traj_a, traj_b = solve_pair
    grid_a, grid_b = traj_a.grid, traj_b.grid
    if grid_a.n_per_axis > grid_b.n_per_axis:
        traj_a, traj_b = traj_b, traj_a
        grid_a, grid_b = grid_b, grid_a
    cmp_grid = grid_a
    times = traj_a.times
    if len(times) != len(traj_b.times) or any(
        abs(a - b) > 1e-12 for a, b in zip(times, traj_b.times)
    ):
        raise ConfigurationError("trajectories recorded different time axes")

    epsilons = sorted((float(e) for e in epsilons), reverse=True)
    reg_eps = resolved_epsilon(traj_b.grid)
    energy = []
    c_vals = []
    seminorms = []
    for sa, sb in zip(traj_a.states, traj_b.states):
        ua = resample(sa.velocity, cmp_grid)
        ub = resample(sb.velocity, cmp_grid)
        if scalar_name == "density":
            w = resample(sa.density, cmp_grid).values
            d2 = np.zeros(cmp_grid.shape)
            for x, y in zip(ua.components, ub.components):
                d = x.values - y.values
                d2 += d * d
            energy.append(0.5 * float(np.sum(w * d2) * cmp_grid.cell_volume))
        else:
            energy.append(relative_energy(ua, ub))
        v = sb.velocity
        c_vals.append(one_sided_lipschitz(v, reg_eps))
        seminorms.append(besov_seminorm(v, alpha, p_int).seminorm)

    # Besov hypothesis over every quantity the uniqueness statement lists,
    # for both legs.
    mid = len(times) // 2
    sa, sb = traj_a.states[mid], traj_b.states[mid]
    scal_a = getattr(sa, scalar_name)
    scal_b = getattr(sb, scalar_name)
    quantity_alphas = {
        scalar_name + "_a": _fit_quantity(scal_a, p_int),
        scalar_name + "_b": _fit_quantity(scal_b, p_int),
        "momentum_a": _fit_quantity(_product_field(scal_a, sa.velocity), p_int),
        "momentum_b": _fit_quantity(_product_field(scal_b, sb.velocity), p_int),
        "velocity_a": _fit_quantity(sa.velocity, p_int),
        "velocity_b": _fit_quantity(sb.velocity, p_int),
    }
    fitted_alpha = float(min(quantity_alphas.values()))
    required = 1.0 / 3.0
    met = fitted_alpha > required

    v0 = traj_b.states[0].velocity
    sweep = scaling_experiment(
        v0, "convective_commutator_lp", epsilons, p_int, alpha=alpha
    )
    rate = 2.0 * alpha - 1.0
    weight = 0.0
    for i in range(len(times) - 1):
        weight += 0.5 * (seminorms[i] ** 2 + seminorms[i + 1] ** 2) * (
            times[i + 1] - times[i]
        )
    c_fit = max(sweep.intercepts) if not sweep.vacuous else 0.0
    work_eps = min(epsilons)
    budget = c_fit * work_eps**rate * weight

    if certify_tolerance is None:
        def drift(tr):
            e0 = tr.energy_ledger[0]
            return max(abs(e - e0) for e in tr.energy_ledger)

        certify_tolerance = 10.0 * max(drift(traj_a), drift(traj_b), 1e-16)
    e_series = RelativeEnergySeries(times, energy)
    c_series = LipschitzSeries(times, c_vals, reg_eps)
    certificate = gronwall_certify(e_series, c_series, budget, certify_tolerance)
    # the contraction audit mollifies on the comparison grid, whose resolved
    # scale may be coarser than the velocity sweep's smallest epsilon
    contraction = density_contraction_check(
        traj_a, traj_b, contraction_tolerance,
        working_epsilon=max(work_eps, resolved_epsilon(cmp_grid)),
        field=scalar_name,
    )

    if not met:
        verdict = "hypothesis-not-met"
    elif certificate.passed and contraction.passed:
        verdict = "pass"
    else:
        verdict = "certificate-failed"
    return ExtendedUniquenessReport(
        times=times,
        energy=energy,
        lipschitz=c_series,
        certificate=certificate,
        contraction=contraction,
        fitted_alpha=fitted_alpha,
        required_alpha=required,
        hypothesis_met=met,
        verdict=verdict,
        alpha=float(alpha),
        p_int=float(p_int),
        working_epsilon=work_eps,
        quantity_alphas=quantity_alphas,
    )


def inhom_uniqueness_experiment(
    rho0: ScalarField,
    u0: VelocityField,
    cfg_a: RunConfig,
    cfg_b: RunConfig,
    alpha: float,
    p_int: float,
    epsilons: Sequence[float],
    *,
    contraction_tolerance: float = 1e-5,
    certify_tolerance: Optional[float] = None,
) -> ExtendedUniquenessReport:
    """A/B certification for the inhomogeneous system: weighted relative
    energy with C(t) from the finer run, plus the density contraction audit."""
    if abs(cfg_a.T - cfg_b.T) > 1e-12 or abs(cfg_a.cadence() - cfg_b.cadence()) > 1e-12:
        raise ConfigurationError("runs must share horizon and snapshot cadence")
    trajs = []
    for cfg in (cfg_a, cfg_b):
        grid = make_grid(2, cfg.grid_n)
        trajs.append(
            inhom_solve(
                resample(rho0, grid), resample(u0, grid), cfg.T, cfg.dt,
                snapshot_stride=cfg.snapshot_stride, cfl=cfg.cfl,
            )
        )
    return _extended_experiment(
        tuple(trajs), "density", alpha, p_int, epsilons,
        contraction_tolerance, certify_tolerance,
    )


def boussinesq_uniqueness_experiment(
    theta0: ScalarField,
    u0: VelocityField,
    g: Sequence[float],
    cfg_a: RunConfig,
    cfg_b: RunConfig,
    alpha: float,
    p_int: float,
    epsilons: Sequence[float],
    *,
    contraction_tolerance: float = 1e-5,
    certify_tolerance: Optional[float] = None,
) -> ExtendedUniquenessReport:
    """A/B certification for the Boussinesq system: homogeneous-style
    relative-energy certificate plus the theta contraction audit, with C(t)
    estimated from the finer run's velocity."""
    if abs(cfg_a.T - cfg_b.T) > 1e-12 or abs(cfg_a.cadence() - cfg_b.cadence()) > 1e-12:
        raise ConfigurationError("runs must share horizon and snapshot cadence")
    trajs = []
    for cfg in (cfg_a, cfg_b):
        grid = make_grid(2, cfg.grid_n)
        trajs.append(
            boussinesq_solve(
                resample(theta0, grid), resample(u0, grid), g, cfg.T, cfg.dt,
                snapshot_stride=cfg.snapshot_stride, cfl=cfg.cfl,
            )
        )
    return _extended_experiment(
        tuple(trajs), "theta", alpha, p_int, epsilons,
        contraction_tolerance, certify_tolerance,
    )
