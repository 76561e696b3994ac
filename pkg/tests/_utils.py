"""Shared helpers for the test suite: deterministic random fields and oracles."""

import numpy as np

from eulerlab.grid_fields import (
    PeriodicGrid,
    ScalarField,
    VelocityField,
    leray_project,
)


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def random_band_limited_scalar(grid: PeriodicGrid, kmax: int, seed: int) -> ScalarField:
    """Gaussian field with spectrum truncated to |k_i| <= kmax (integer units)."""
    noise = rng(seed).standard_normal(grid.shape)
    hat = np.fft.rfftn(noise)
    n = grid.n_per_axis
    mask = np.ones(grid.rshape, dtype=bool)
    for axis in range(grid.dims):
        if axis == grid.dims - 1:
            f = np.arange(n // 2 + 1)
        else:
            f = np.fft.fftfreq(n, 1.0 / n)
        shape = [1] * grid.dims
        shape[axis] = -1
        mask &= (np.abs(f) <= kmax).reshape(shape)
    hat *= mask
    values = np.fft.irfftn(hat, s=grid.shape, axes=tuple(range(grid.dims)))
    values /= max(np.abs(values).max(), 1e-300)
    return ScalarField(grid, values)


def random_band_limited_velocity(
    grid: PeriodicGrid, kmax: int, seed: int, divfree: bool = False
) -> VelocityField:
    comps = [
        random_band_limited_scalar(grid, kmax, seed + 101 * (a + 1))
        for a in range(grid.dims)
    ]
    u = VelocityField(comps)
    return leray_project(u) if divfree else u


def fd4_gradient(values: np.ndarray, axis: int, spacing: float) -> np.ndarray:
    """4th-order centered finite difference on the periodic lattice."""
    f1 = np.roll(values, -1, axis=axis)
    f2 = np.roll(values, -2, axis=axis)
    b1 = np.roll(values, 1, axis=axis)
    b2 = np.roll(values, 2, axis=axis)
    return (-f2 + 8.0 * f1 - 8.0 * b1 + b2) / (12.0 * spacing)


def direct_convolution(values: np.ndarray, kernel) -> np.ndarray:
    """Physical-space quadrature convolution over the kernel support (oracle)."""
    kvals = kernel.values.values
    out = np.zeros_like(values)
    support = np.argwhere(kvals != 0.0)
    for idx in support:
        shift = tuple(int(i) for i in idx)
        out += kvals[shift] * np.roll(values, shift, axis=(0, 1))
    return out * kernel.grid.cell_volume
