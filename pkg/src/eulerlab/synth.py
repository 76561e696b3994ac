"""Deterministic generators of velocity fields with known structure.

All generators are pure functions of their arguments; randomness comes from a
Philox counter-based generator keyed on the caller's seed, so identical inputs
give bitwise-identical fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .grid_fields import (
    PeriodicGrid,
    ScalarField,
    VelocityField,
    leray_project,
)

__all__ = [
    "SynthSpec",
    "lacunary_field",
    "taylor_green",
    "taylor_green_pressure",
    "shear_flow",
    "random_divfree",
    "low_mode_divfree",
    "rigid_rotation_gradient",
    "field_from_spec",
]

KINDS = ("lacunary", "taylor_green", "shear", "random_divfree", "constant")

# Lattice directions probed per octave; four of them so no single axis
# dominates the translation statistics.
_OCTAVE_DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1))


@dataclass(frozen=True)
class SynthSpec:
    """Declarative description of a synthetic field."""

    kind: str
    alpha: Optional[float] = None
    j_max: Optional[int] = None
    seed: int = 0
    amplitude: float = 1.0
    slope: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown synth kind {self.kind!r}; choose from {KINDS}")
        if self.kind == "lacunary":
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ConfigurationError("lacunary fields need alpha in (0, 1)")
            if self.j_max is None or self.j_max < 1:
                raise ConfigurationError("lacunary fields need j_max >= 1")
        if self.kind == "random_divfree" and self.slope is None:
            raise ConfigurationError("random_divfree needs a spectral slope")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def lacunary_field(spec: SynthSpec, grid: PeriodicGrid) -> VelocityField:
    """Octave superposition with amplitudes 2^(-alpha j) at frequencies 2^j pi.

    Each octave carries the four lattice directions in seeded random order
    with random amplitude jitter, phase, and transverse orientation; every
    mode is transverse to its wavevector, so the field is divergence-free by
    construction and the closing Leray projection only scrubs roundoff.
    Translation differences then scale like |xi|^alpha between the finest and
    coarsest octave wavelengths.
    """
    if spec.kind != "lacunary":
        raise ConfigurationError(f"spec kind is {spec.kind!r}, not 'lacunary'")
    if grid.dims != 2:
        raise ConfigurationError("lacunary synthesis is implemented for dims=2 only")
    top = (1 << spec.j_max) * max(abs(c) for d in _OCTAVE_DIRECTIONS for c in d)
    if top > grid.dealias_kmax:
        raise ConfigurationError(
            f"finest octave j_max={spec.j_max} exceeds the dealiased band "
            f"(|k| <= {grid.dealias_kmax}) on n={grid.n_per_axis}"
        )
    gen = _rng(spec.seed)
    x = grid.meshgrid()
    out = [np.zeros(grid.shape) for _ in range(grid.dims)]
    # The box truncates the octave ladder below frequency pi; the coarsest
    # octave absorbs the missing infrared tail (geometric sum of the Taylor
    # responses of the absent octaves), otherwise dyadic-shift statistics sag
    # below the |xi|^alpha law as alpha -> 1.
    ir = 2.0 ** (2.0 - 2.0 * spec.alpha)
    ir_boost = np.sqrt(ir / (ir - 1.0))
    for j in range(1, spec.j_max + 1):
        scale = spec.amplitude * 2.0 ** (-spec.alpha * j)
        if j == 1:
            scale *= ir_boost
        order = gen.permutation(len(_OCTAVE_DIRECTIONS))
        for m in order:
            d = np.asarray(_OCTAVE_DIRECTIONS[m], dtype=float)
            amp = gen.uniform(0.75, 1.25)
            phase = gen.uniform(0.0, 2.0 * np.pi)
            sign = 1.0 if gen.integers(0, 2) == 1 else -1.0
            e = sign * np.array([-d[1], d[0]]) / np.linalg.norm(d)
            carrier = np.cos((1 << j) * np.pi * (d[0] * x[0] + d[1] * x[1]) + phase)
            for a in range(grid.dims):
                out[a] += scale * amp * e[a] * carrier
    return leray_project(VelocityField.from_arrays(grid, out))


def taylor_green(grid: PeriodicGrid, amplitude: float) -> VelocityField:
    """Steady 2D Euler cell flow ``A (sin(pi x1) cos(pi x2), -cos(pi x1) sin(pi x2))``."""
    if grid.dims != 2:
        raise ConfigurationError("taylor_green requires dims=2")
    x, y = grid.meshgrid()
    u1 = amplitude * np.sin(np.pi * x) * np.cos(np.pi * y)
    u2 = -amplitude * np.cos(np.pi * x) * np.sin(np.pi * y)
    return VelocityField.from_arrays(grid, [u1, u2], divergence_free=True)


def taylor_green_pressure(grid: PeriodicGrid, amplitude: float) -> ScalarField:
    """Pressure balancing the cell flow: ``(A^2/4)(cos(2 pi x1) + cos(2 pi x2))``.

    Derived from ``grad p = -(u . grad) u``; the advection term reduces to
    ``(A^2 pi / 2)(sin(2 pi x1), sin(2 pi x2))``.
    """
    x, y = grid.meshgrid()
    return ScalarField(
        grid, 0.25 * amplitude**2 * (np.cos(2 * np.pi * x) + np.cos(2 * np.pi * y))
    )


def shear_flow(grid: PeriodicGrid, profile: ScalarField) -> VelocityField:
    """Unidirectional flow ``(profile(x2), 0)``; divergence-free for any profile."""
    if grid.dims != 2:
        raise ConfigurationError("shear_flow requires dims=2")
    if profile.grid != grid:
        raise ConfigurationError("profile must live on the target grid")
    vals = profile.values
    if np.max(np.abs(vals - vals[:1, :])) > 1e-12 * max(1.0, np.abs(vals).max()):
        raise ConfigurationError("shear profile must depend on x2 only")
    return VelocityField.from_arrays(
        grid, [vals.copy(), np.zeros(grid.shape)], divergence_free=True
    )


def random_divfree(
    grid: PeriodicGrid, slope: float, seed: int, amplitude: float = 1.0
) -> VelocityField:
    """Power-law Gaussian field ``|u_hat(k)| ~ |k|^(-slope)``, solenoidal and
    band-limited to the dealiased range; max speed normalized to ``amplitude``."""
    gen = _rng(seed)
    n = grid.n_per_axis
    hats = []
    kmag2 = np.zeros(grid.rshape)
    for axis in range(grid.dims):
        f = (
            np.arange(n // 2 + 1, dtype=float)
            if axis == grid.dims - 1
            else np.fft.fftfreq(n, 1.0 / n)
        )
        shape = [1] * grid.dims
        shape[axis] = -1
        kmag2 = kmag2 + (f.reshape(shape)) ** 2
    with np.errstate(divide="ignore"):
        envelope = np.where(kmag2 > 0.0, np.sqrt(kmag2) ** (-slope), 0.0)
    envelope *= grid.dealias_mask
    for _ in range(grid.dims):
        noise = gen.standard_normal(grid.shape)
        hats.append(np.fft.rfftn(noise) * envelope)
    comps = [grid.irfftn(h) for h in hats]
    u = leray_project(VelocityField.from_arrays(grid, comps))
    speed = u.max_speed()
    if speed == 0.0:
        return u
    arrays = [amplitude / speed * c.values for c in u.components]
    return VelocityField.from_arrays(grid, arrays, divergence_free=True)


def _low_mode_mask(grid: PeriodicGrid, kmax: int) -> np.ndarray:
    n = grid.n_per_axis
    mask = np.ones(grid.rshape, dtype=bool)
    for axis in range(grid.dims):
        f = (
            np.arange(n // 2 + 1, dtype=float)
            if axis == grid.dims - 1
            else np.fft.fftfreq(n, 1.0 / n)
        )
        shape = [1] * grid.dims
        shape[axis] = -1
        mask &= (np.abs(f) <= kmax).reshape(shape)
    return mask


def low_mode_scalar(
    grid: PeriodicGrid, kmax: int, seed: int, amplitude: float = 1.0
) -> ScalarField:
    """Gaussian scalar confined to integer modes ``|k_i| <= kmax``, sup-norm
    normalized to ``amplitude``."""
    if kmax < 1 or kmax > grid.dealias_kmax:
        raise ConfigurationError(
            f"kmax must lie in [1, {grid.dealias_kmax}] on n={grid.n_per_axis}"
        )
    noise = _rng(seed).standard_normal(grid.shape)
    vals = grid.irfftn(np.fft.rfftn(noise) * _low_mode_mask(grid, kmax))
    top = np.abs(vals).max()
    if top > 0.0:
        vals *= amplitude / top
    return ScalarField(grid, vals)


def low_mode_divfree(
    grid: PeriodicGrid, kmax: int, seed: int, amplitude: float = 1.0
) -> VelocityField:
    """Gaussian solenoidal field confined to integer modes ``|k_i| <= kmax``;
    max speed normalized to ``amplitude``.  Useful as a weak-formulation test
    function (band-limited far below the dealias cutoff)."""
    if kmax < 1 or kmax > grid.dealias_kmax:
        raise ConfigurationError(
            f"kmax must lie in [1, {grid.dealias_kmax}] on n={grid.n_per_axis}"
        )
    gen = _rng(seed)
    mask = _low_mode_mask(grid, kmax)
    comps = []
    for _ in range(grid.dims):
        noise = gen.standard_normal(grid.shape)
        comps.append(grid.irfftn(np.fft.rfftn(noise) * mask))
    u = leray_project(VelocityField.from_arrays(grid, comps))
    speed = u.max_speed()
    if speed == 0.0:
        return u
    return VelocityField.from_arrays(
        grid, [amplitude / speed * c.values for c in u.components],
        divergence_free=True,
    )


def rigid_rotation_gradient(grid: PeriodicGrid, rate: float = 1.0) -> np.ndarray:
    """Constant antisymmetric gradient tensor of the rotation ``rate*(-x2, x1)``.

    No nonconstant periodic velocity field has a pointwise antisymmetric
    gradient (Korn rigidity forces such a field to be affine, and periodicity
    kills the linear part), so the rotation enters the laboratory only at the
    gradient-tensor level, shaped like :func:`grid_fields.gradient_tensor`
    output.
    """
    if grid.dims != 2:
        raise ConfigurationError("rigid_rotation_gradient requires dims=2")
    out = np.zeros((2, 2) + grid.shape)
    out[0, 1] = -rate
    out[1, 0] = rate
    return out


def field_from_spec(spec: SynthSpec, grid: PeriodicGrid) -> VelocityField:
    """Dispatch a :class:`SynthSpec` to its generator."""
    if spec.kind == "lacunary":
        return lacunary_field(spec, grid)
    if spec.kind == "taylor_green":
        return taylor_green(grid, spec.amplitude)
    if spec.kind == "shear":
        profile = grid.sample_scalar(lambda *xs: spec.amplitude * np.sin(np.pi * xs[1]))
        return shear_flow(grid, profile)
    if spec.kind == "random_divfree":
        return random_divfree(grid, spec.slope, spec.seed, spec.amplitude)
    if spec.kind == "constant":
        arrays = [np.full(grid.shape, spec.amplitude)] + [
            np.zeros(grid.shape) for _ in range(grid.dims - 1)
        ]
        return VelocityField.from_arrays(grid, arrays, divergence_free=True)
    raise ConfigurationError(f"unknown synth kind {spec.kind!r}")
