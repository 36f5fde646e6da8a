import math

import numpy as np
import pytest

from nlsx.grid import Field, make_grid


def gaussian_field(grid, amplitude=1.0, width=1.0, center=(0.0, 0.0), time=0.0):
    x = grid.x
    xx = x[:, None] - center[0]
    yy = x[None, :] - center[1]
    vals = amplitude * np.exp(-(xx**2 + yy**2) / width**2)
    return Field(grid, vals.astype(np.complex128), time)


def plane_wave(grid, amplitude=1.0, mode=(1, 0), time=0.0):
    """e^{i k0.x} with k0 = pi*(jx, jy)/L, an exact grid mode."""
    kx = math.pi * mode[0] / grid.half_width
    ky = math.pi * mode[1] / grid.half_width
    x = grid.x
    phase = kx * x[:, None] + ky * x[None, :]
    return Field(grid, amplitude * np.exp(1j * phase), time)


def band_limited_field(grid, rng, k_modes=4, amplitude=1.0, time=0.0):
    """Random smooth field from a few low-k Fourier modes."""
    n = grid.n
    coeffs = np.zeros((n, n), dtype=np.complex128)
    idx = list(range(-k_modes, k_modes + 1))
    for j in idx:
        for k in idx:
            coeffs[j % n, k % n] = rng.normal() + 1j * rng.normal()
    from scipy import fft as sfft

    vals = sfft.ifft2(coeffs)
    vals *= amplitude / np.abs(vals).max()
    return Field(grid, vals, time)


@pytest.fixture(scope="session")
def grid128():
    return make_grid(128, 10.0)


@pytest.fixture(scope="session")
def grid64():
    return make_grid(64, 8.0)


@pytest.fixture(scope="session")
def ground_states():
    """Certified ground-state profiles for both nonlinearity flavors."""
    from nlsx.ground_state import certify, find_ground_state

    out = {}
    for mu in (0, 1):
        profile = find_ground_state(mu)
        out[mu] = (profile, certify(profile))
    return out
