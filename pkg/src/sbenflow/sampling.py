"""Seeded band-limited random fields for the property suites.

All generators draw from a caller-supplied numpy Generator and build fields
from low-wavenumber Fourier modes only (|k| <= kmax componentwise, strictly
below the grid Nyquist), so sampled fields are smooth, have exactly zero
content in the stencil null modes, and runs are reproducible from the seed.
"""

from __future__ import annotations

import numpy as np

from .fields import Grid2P, ScalarField, VectorField, _ddx, _ddy


def _mode_table(grid: Grid2P, kmax: int):
    if 2 * kmax >= min(grid.nx, grid.ny):
        raise ValueError(f"kmax={kmax} too large for {grid.nx}x{grid.ny} grid")
    modes = []
    for kx in range(-kmax, kmax + 1):
        for ky in range(-kmax, kmax + 1):
            if kx == 0 and ky == 0:
                continue
            # one representative per +-k pair
            if kx < 0 or (kx == 0 and ky < 0):
                continue
            modes.append((kx, ky))
    return modes


def random_scalar(grid: Grid2P, rng: np.random.Generator, kmax: int = 3,
                  amplitude: float = 1.0) -> ScalarField:
    """Zero-mean random trigonometric polynomial."""
    x, y = grid.x(), grid.y()
    data = np.zeros(grid.shape)
    modes = _mode_table(grid, kmax)
    coeffs = rng.normal(size=len(modes))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(modes))
    for (kx, ky), c, p in zip(modes, coeffs, phases):
        data += c * np.cos(2.0 * np.pi * (kx * x / grid.lx + ky * y / grid.ly) + p)
    data *= amplitude / max(1, np.sqrt(len(modes)))
    return ScalarField(grid, data)


def random_vector(grid: Grid2P, rng: np.random.Generator, kmax: int = 3,
                  amplitude: float = 1.0) -> VectorField:
    comps = [random_scalar(grid, rng, kmax, amplitude).data for _ in range(3)]
    return VectorField(grid, np.stack(comps))


def random_solenoidal(grid: Grid2P, rng: np.random.Generator, kmax: int = 3,
                      amplitude: float = 1.0) -> VectorField:
    """Random field with exactly zero discrete divergence.

    In-plane part is the discrete curl of a random stream function (the
    central-difference operators commute, so div vanishes to round-off);
    the out-of-plane component is unconstrained.
    """
    psi = random_scalar(grid, rng, kmax, amplitude)
    vz = random_scalar(grid, rng, kmax, amplitude)
    data = np.stack([_ddy(grid, psi.data), -_ddx(grid, psi.data), vz.data])
    return VectorField(grid, data)
