"""Periodic uniform-grid machinery shared by the grid-based modules.

All operators here assume fields sampled on the periodic box [-L, L)^N
described by a :class:`~infogauge.density.GridSpec`.  Finite differences
are 2nd-order central stencils with wrap-around; spectral operators use
the exact DFT wavenumbers 2*pi*j/(2L).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def riemann(spec, field: np.ndarray) -> float:
    """Riemann sum of ``field`` over the grid (sum * cell volume)."""
    return float(np.sum(field)) * spec.cell_volume


def expectation(density_values: np.ndarray, field: np.ndarray, cell_volume: float) -> float:
    """Expectation of ``field`` under a density sampled on the same grid."""
    return float(np.sum(density_values * field)) * cell_volume


@lru_cache(maxsize=64)
def _axis_wavenumbers(n: int, spacing: float) -> np.ndarray:
    # 2*pi*fftfreq gives the exact angular wavenumbers 2*pi*j/(n*h)
    return 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)


@lru_cache(maxsize=64)
def _rfft_axis_wavenumbers(n: int, spacing: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.rfftfreq(n, d=spacing)


def k_squared(spec) -> np.ndarray:
    """|k|^2 on the half-spectrum (rfftn layout, real-valued)."""
    return _k_squared_cached(spec.points, spec.spacing)


@lru_cache(maxsize=64)
def _k_squared_cached(points: tuple, spacing: tuple) -> np.ndarray:
    axes = []
    for i, (n, h) in enumerate(zip(points, spacing)):
        if i == len(points) - 1:
            axes.append(_rfft_axis_wavenumbers(n, h))
        else:
            axes.append(_axis_wavenumbers(n, h))
    grids = np.meshgrid(*axes, indexing="ij", sparse=True)
    k2 = np.zeros(tuple(len(a) for a in axes))
    for g in grids:
        k2 = k2 + g**2
    return k2


def spectral_multiply(spec, field: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    """Apply a real Fourier multiplier to a real field.

    The multiplier acts on the rfftn half-spectrum; Hermitian symmetry is
    implied by the rfft layout so the output is real to machine precision.
    """
    spectrum = np.fft.rfftn(field)
    axes = tuple(range(field.ndim))
    return np.fft.irfftn(spectrum * multiplier, s=field.shape, axes=axes)


def spectral_laplacian(spec, field: np.ndarray) -> np.ndarray:
    """Laplacian via the exact multiplier -|k|^2."""
    return spectral_multiply(spec, field, -k_squared(spec))


def gradient_central(spec, field: np.ndarray) -> list[np.ndarray]:
    """2nd-order central first derivatives along each axis, periodic wrap."""
    out = []
    for axis, h in enumerate(spec.spacing):
        out.append((np.roll(field, -1, axis=axis) - np.roll(field, 1, axis=axis)) / (2.0 * h))
    return out


def second_derivative_central(spec, field: np.ndarray, axis: int) -> np.ndarray:
    h = spec.spacing[axis]
    return (np.roll(field, -1, axis=axis) - 2.0 * field + np.roll(field, 1, axis=axis)) / (h * h)


def laplacian_central(spec, field: np.ndarray) -> np.ndarray:
    out = np.zeros_like(field)
    for axis in range(spec.dims):
        out += second_derivative_central(spec, field, axis)
    return out


def hessian_central(spec, field: np.ndarray) -> list[list[np.ndarray]]:
    """Full Hessian: pure second derivatives on the diagonal, mixed partials
    by nested first-derivative stencils."""
    n = spec.dims
    grads = gradient_central(spec, field)
    hess = [[None] * n for _ in range(n)]
    for a in range(n):
        hess[a][a] = second_derivative_central(spec, field, a)
        for b in range(a + 1, n):
            hb = spec.spacing[b]
            mixed = (np.roll(grads[a], -1, axis=b) - np.roll(grads[a], 1, axis=b)) / (2.0 * hb)
            hess[a][b] = mixed
            hess[b][a] = mixed
    return hess


def mesh_points(spec) -> np.ndarray:
    """All grid points as an array of shape (n_points, dims)."""
    grids = np.meshgrid(*spec.axes(), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)
