"""Least-squares phase unwrapping and vortex (residue) detection.

The unwrapped phase θ is the least-squares solution of ∇θ = (wrapped
gradient), obtained by solving the Poisson equation ∇²θ = ∇·(wrapped
gradient) with a fast cosine transform (Neumann boundaries, default) or an
FFT (periodic boundaries).  When the wrapped gradient is curl-free (no
residues) the result is congruent to the input modulo 2π and the rounding
step makes the congruence exact.

Residues are quantized circulations of the wrapped gradient around grid
plaquettes; a charge ±1 marks a phase vortex, around which no single-valued
unwrapping exists.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dctn, idctn

__all__ = ["wrap_to_pi", "phase_residues", "unwrap_least_squares"]

_TAU = 2.0 * np.pi


def wrap_to_pi(x: np.ndarray) -> np.ndarray:
    """Wrap values to the principal interval (−π, π]."""
    return np.pi - np.mod(np.pi - x, _TAU)


def phase_residues(phase: np.ndarray) -> np.ndarray:
    """Plaquette charges of the wrapped phase gradient.

    Returns an (nx−1, ny−1) integer array; entry (i, j) is the winding
    number of the loop through grid points (i,j) → (i+1,j) → (i+1,j+1) →
    (i,j+1), so ±1 flags a singly charged vortex inside the plaquette.
    """
    dx = wrap_to_pi(np.diff(phase, axis=0))      # (nx-1, ny)
    dy = wrap_to_pi(np.diff(phase, axis=1))      # (nx, ny-1)
    loop = dx[:, :-1] + dy[1:, :] - dx[:, 1:] - dy[:-1, :]
    return np.rint(loop / _TAU).astype(int)


def _poisson_dct(rho: np.ndarray) -> np.ndarray:
    nx, ny = rho.shape
    r = dctn(rho, type=2, norm="ortho")
    ix = np.arange(nx)[:, None]
    jy = np.arange(ny)[None, :]
    denom = 2.0 * (np.cos(np.pi * ix / nx) + np.cos(np.pi * jy / ny) - 2.0)
    denom[0, 0] = 1.0
    r = r / denom
    r[0, 0] = 0.0
    return idctn(r, type=2, norm="ortho")


def _poisson_fft(rho: np.ndarray) -> np.ndarray:
    nx, ny = rho.shape
    r = np.fft.fft2(rho)
    ix = np.fft.fftfreq(nx) * nx
    jy = np.fft.fftfreq(ny) * ny
    denom = (2.0 * np.cos(_TAU * ix[:, None] / nx)
             + 2.0 * np.cos(_TAU * jy[None, :] / ny) - 4.0)
    denom[0, 0] = 1.0
    r = r / denom
    r[0, 0] = 0.0
    return np.real(np.fft.ifft2(r))


def unwrap_least_squares(phase: np.ndarray, boundary: str = "neumann"):
    """Unwrap a 2D phase map; returns (theta, residues).

    The solution is pinned so that θ equals the wrapped input at the first
    residue-free point (up placement of 2π sheets elsewhere).  With no
    residues the output is congruent to the input modulo 2π; with residues
    the least-squares surface is returned as-is and the caller should mask
    the cores using the residue map.
    """
    phase = np.asarray(phase, dtype=float)
    res = phase_residues(phase)

    if boundary == "neumann":
        dx = wrap_to_pi(np.diff(phase, axis=0))
        dy = wrap_to_pi(np.diff(phase, axis=1))
        rho = np.zeros_like(phase)
        rho[:-1, :] += dx
        rho[1:, :] -= dx
        rho[:, :-1] += dy
        rho[:, 1:] -= dy
        theta = _poisson_dct(rho)
    elif boundary == "periodic":
        # exact only for zero net winding around the torus; a uniform ramp
        # lies outside the range of the periodic gradient and is lost
        dx = wrap_to_pi(np.roll(phase, -1, 0) - phase)
        dy = wrap_to_pi(np.roll(phase, -1, 1) - phase)
        rho = dx - np.roll(dx, 1, 0) + dy - np.roll(dy, 1, 1)
        theta = _poisson_fft(rho)
    else:
        raise ValueError("boundary must be 'neumann' or 'periodic'")

    theta = theta + (phase.flat[0] - theta.flat[0])
    if not np.any(res):
        theta = phase + _TAU * np.rint((theta - phase) / _TAU)
    return theta, res
