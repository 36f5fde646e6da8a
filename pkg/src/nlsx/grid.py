"""Periodic-box discretization of the plane and the conserved/variational
functionals evaluated on sampled complex fields.

The box is [-L, L)^2 sampled on an n x n grid (n a power of two) with
spacing dx = 2L/n; quadrature is the periodic rectangle rule, which is
spectrally accurate for smooth integrands that decay before the edge.
Wavenumbers are k_j = pi*j/L for j in [-n/2, n/2).
"""

import math
from dataclasses import dataclass, field as dataclass_field
from functools import cached_property

import numpy as np
from scipy import fft as sfft

from . import kernels
from .kernels import FOUR_PI, KernelOverflowError


class GridMismatchError(ValueError):
    """Two objects live on different grids."""


class AmplitudeRangeError(ValueError):
    """A field's amplitude is out of the evaluable range of the kernels."""


class BoundaryMassError(ValueError):
    """Too much mass touches the box boundary for the operation to make sense."""


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid2D:
    """Square periodic grid: n points per axis on [-half_width, half_width)."""

    n: int
    half_width: float

    @property
    def dx(self):
        return 2.0 * self.half_width / self.n

    @cached_property
    def x(self):
        """Per-axis sample coordinates -L + j*dx (includes the origin)."""
        return -self.half_width + self.dx * np.arange(self.n)

    @cached_property
    def wavenumbers(self):
        """Per-axis spectral frequencies pi*j/L, j in [-n/2, n/2), fft order."""
        return 2.0 * math.pi * sfft.fftfreq(self.n, d=self.dx)

    @cached_property
    def k_sq(self):
        k = self.wavenumbers
        return k[:, None] ** 2 + k[None, :] ** 2

    @cached_property
    def radius(self):
        x = self.x
        return np.hypot(x[:, None], x[None, :])

    @property
    def cell_area(self):
        return self.dx * self.dx


def make_grid(n, half_width):
    """Build a grid; n must be a power of two >= 16 and half_width > 0."""
    n = int(n)
    if not _is_power_of_two(n) or n < 16:
        raise ValueError(f"n must be a power of two >= 16, got {n}")
    half_width = float(half_width)
    if not (half_width > 0.0) or not math.isfinite(half_width):
        raise ValueError(f"half_width must be positive and finite, got {half_width}")
    return Grid2D(n=n, half_width=half_width)


@dataclass(frozen=True)
class Field:
    """Complex field sampled on a Grid2D at simulation time `time`.

    values[j, k] = u(x_j, y_k), row-major.  Snapshots are immutable:
    operations return new Field objects and never mutate inputs.
    """

    grid: Grid2D
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        if vals.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"values shape {vals.shape} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(vals.view(np.float64))):
            raise ValueError("field values must be finite (no NaN/Inf)")
        object.__setattr__(self, "values", vals)


def zero_field(grid, time=0.0):
    return Field(grid, np.zeros((grid.n, grid.n), dtype=np.complex128), time)


def _check_same_grid(a_grid, b_grid):
    if a_grid != b_grid:
        raise GridMismatchError(f"grid mismatch: {a_grid} vs {b_grid}")


def mass(field):
    """Squared L2 norm by the periodic rectangle rule."""
    v = field.values
    return float(np.sum(v.real**2 + v.imag**2) * field.grid.cell_area)


def grad_norm_sq(field):
    """Squared L2 norm of the gradient, evaluated spectrally."""
    g = field.grid
    uh = sfft.fft2(field.values)
    return float(
        np.sum(g.k_sq * (uh.real**2 + uh.imag**2)) * g.cell_area / g.n**2
    )


def gradient(field):
    """Spectral partial derivatives (du/dx, du/dy).

    The Nyquist mode is zeroed for these odd-order derivatives to avoid the
    asymmetric [-n/2, n/2) mode introducing a spurious imaginary part.
    """
    g = field.grid
    k = g.wavenumbers.copy()
    k[g.n // 2] = 0.0
    uh = sfft.fft2(field.values)
    ux = sfft.ifft2(1j * k[:, None] * uh)
    uy = sfft.ifft2(1j * k[None, :] * uh)
    return ux, uy


def lp_norm(field, p):
    """L^p norm for even integer p."""
    if p < 2 or p % 2 != 0:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    rho = np.abs(field.values) ** 2
    return float((np.sum(rho ** (p // 2)) * field.grid.cell_area) ** (1.0 / p))


def edge_mass_fraction(field, radius=None):
    """Fraction of the total mass outside |x| > radius (default: L/2).

    Recorded with every evolution report because the periodic box cannot
    represent mass that reaches its edge.
    """
    g = field.grid
    if radius is None:
        radius = 0.5 * g.half_width
    rho = field.values.real**2 + field.values.imag**2
    total = float(np.sum(rho))
    if total == 0.0:
        return 0.0
    outside = float(np.sum(rho[g.radius > radius]))
    return outside / total


def is_radial(field, tol=1e-8):
    """True if |u| is (numerically) invariant under axis flips and transpose."""
    a = np.abs(field.values)
    scale = a.max()
    if scale == 0.0:
        return True
    flipped_x = np.roll(a[::-1, :], 1, axis=0)  # x -> -x on the -L+j*dx grid
    flipped_y = np.roll(a[:, ::-1], 1, axis=1)
    err = max(
        np.max(np.abs(a - flipped_x)),
        np.max(np.abs(a - flipped_y)),
        np.max(np.abs(a - a.T)),
    )
    return err <= tol * scale


@dataclass(frozen=True)
class FunctionalReport:
    """All conserved/variational quantities of one field at one time.

    energy = grad_sq/2 - potential_integral, action = energy + mass/2,
    p_functional = mass/2 - potential_integral, and i_functional is the
    virial functional grad_sq - integral of h(4 pi |u|^2)/(4 pi).
    """

    mass: float
    grad_sq: float
    potential_integral: float
    energy: float
    action: float
    p_functional: float
    i_functional: float
    lp_norms: dict

    def __post_init__(self):
        scale = max(1.0, abs(self.action))
        if abs(self.action - self.energy - 0.5 * self.mass) > 1e-12 * scale:
            raise AssertionError("FunctionalReport: action != energy + mass/2")
        if abs(self.energy - 0.5 * self.grad_sq + self.potential_integral) > 1e-12 * scale:
            raise AssertionError("FunctionalReport: energy != grad_sq/2 - potential")


def functionals(field, mu):
    """Evaluate every functional of the report from one set of samples."""
    g = field.grid
    v = field.values
    rho = v.real**2 + v.imag**2
    da = g.cell_area
    try:
        pot = float(np.sum(kernels.big_F(rho, mu)) * da)
        h_int = float(np.sum(kernels.h_kernel(FOUR_PI * rho, mu)) * da / FOUR_PI)
    except KernelOverflowError as exc:
        raise AmplitudeRangeError(
            f"amplitude out of evaluable range: {exc}"
        ) from exc
    m = float(np.sum(rho) * da)
    gsq = grad_norm_sq(field)
    lp = {2: math.sqrt(m)}
    for p in (4, 6, 8):
        lp[p] = float((np.sum(rho ** (p // 2)) * da) ** (1.0 / p))
    return FunctionalReport(
        mass=m,
        grad_sq=gsq,
        potential_integral=pot,
        energy=0.5 * gsq - pot,
        action=0.5 * gsq + 0.5 * m - pot,
        p_functional=0.5 * m - pot,
        i_functional=gsq - h_int,
        lp_norms=lp,
    )


def variance(field, edge_tol=1e-6):
    """Second moment of |u|^2 about the box center.

    Meaningless once mass reaches the box edge, so it requires the mass
    within r <= L/2 to be at least (1 - edge_tol) of the total.
    """
    frac = edge_mass_fraction(field)
    if frac > edge_tol:
        raise BoundaryMassError(
            f"mass touching boundary: fraction {frac:.3e} beyond r = L/2 "
            f"exceeds {edge_tol:.1e}"
        )
    g = field.grid
    rho = field.values.real**2 + field.values.imag**2
    return float(np.sum(g.radius**2 * rho) * g.cell_area)


# ---------------------------------------------------------------------------
# Virial weight: the compactly-flattened radial weight R^2 theta(r/R) built
# from a C^2 bump zeta, plus the plateau cutoff chi.  theta solves
# theta'' = zeta with theta(0) = theta'(0) = 0, so the weight equals r^2
# exactly for r <= R and grows linearly (slope 3R) for r >= 2R.
# ---------------------------------------------------------------------------

_TABLE_NODES = 4096


def _smoothstep(t):
    """Quintic p with p(0)=0, p(1)=1 and two vanishing derivatives at both ends."""
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def _smoothstep_d1(t):
    t = np.clip(t, 0.0, 1.0)
    return 30.0 * t**2 * (t - 1.0) ** 2


def _smoothstep_d2(t):
    t = np.clip(t, 0.0, 1.0)
    return 60.0 * t * (2.0 * t - 1.0) * (t - 1.0)


def _smoothstep_int1(t):
    """P(t) = integral of p from 0 to t."""
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (2.5 - 3.0 * t + t**2)


def _smoothstep_int2(t):
    """Integral of P from 0 to t."""
    t = np.clip(t, 0.0, 1.0)
    return t**5 * (0.5 - 0.5 * t + t**2 / 7.0)


def zeta(r):
    """C^2 bump: 2 on [0,1], quintic blend down to 0 on [1,2], 0 beyond."""
    r = np.asarray(r, dtype=np.float64)
    return 2.0 * _smoothstep(2.0 - r)


def zeta_d1(r):
    r = np.asarray(r, dtype=np.float64)
    return -2.0 * _smoothstep_d1(2.0 - r)


def zeta_d2(r):
    r = np.asarray(r, dtype=np.float64)
    return 2.0 * _smoothstep_d2(2.0 - r)


def zeta_int(r):
    """eta(r) = integral of zeta from 0 to r (closed form; 3 for r >= 2)."""
    r = np.asarray(r, dtype=np.float64)
    out = np.where(r <= 1.0, 2.0 * r, 3.0 - 2.0 * _smoothstep_int1(2.0 - r))
    return out


_THETA_AT_2 = 26.0 / 7.0  # theta(2) for the quintic blend


def theta(r):
    """theta(r) = double integral of zeta; r^2 on [0,1], linear beyond 2."""
    r = np.asarray(r, dtype=np.float64)
    mid = 1.0 + 3.0 * (r - 1.0) - 2.0 / 7.0 + 2.0 * _smoothstep_int2(2.0 - r)
    out = np.where(r <= 1.0, r * r, mid)
    out = np.where(r >= 2.0, _THETA_AT_2 + 3.0 * (r - 2.0), out)
    return out


def chi(r):
    """Plateau cutoff: 1 on [0, 1/2], quintic blend to 0 at 1, 0 beyond."""
    r = np.asarray(r, dtype=np.float64)
    return _smoothstep(2.0 * (1.0 - r))


@dataclass(frozen=True)
class VirialWeight:
    """Radial virial weight phi_R(r) = R^2 theta(r/R) with its cutoff chi(r/R).

    theta_samples holds the radial table: columns are r, phi_R and its first
    four radial derivatives.  weight_grid/chi_grid are the same functions
    sampled on the grid for quadrature.
    """

    grid: Grid2D
    radius: float
    r_nodes: np.ndarray
    theta_samples: np.ndarray  # (nodes, 5): phi, phi', phi'', phi''', phi''''
    chi_samples: np.ndarray
    weight_grid: np.ndarray = dataclass_field(repr=False, default=None)
    chi_grid: np.ndarray = dataclass_field(repr=False, default=None)


def _weight_tables(r, radius):
    rho = r / radius
    phi = radius**2 * theta(rho)
    d1 = radius * zeta_int(rho)
    d2 = zeta(rho)
    d3 = zeta_d1(rho) / radius
    d4 = zeta_d2(rho) / radius**2
    return phi, d1, d2, d3, d4


def make_virial_weight(grid, radius):
    """Tabulate the virial weight for a given cutoff radius.

    Requires 0 < 2*radius < half_width so the varying part of the weight is
    fully supported inside the box.
    """
    radius = float(radius)
    if not (0.0 < 2.0 * radius < grid.half_width):
        raise ValueError(
            f"radius too large for box: need 0 < 2*radius < {grid.half_width}, "
            f"got radius={radius}"
        )
    r_nodes = np.linspace(0.0, grid.half_width * math.sqrt(2.0), _TABLE_NODES)
    cols = _weight_tables(r_nodes, radius)
    table = np.stack(cols, axis=1)
    chi_tab = chi(r_nodes / radius)
    rr = grid.radius
    weight_grid = radius**2 * theta(rr / radius)
    chi_grid = chi(rr / radius)
    return VirialWeight(
        grid=grid,
        radius=radius,
        r_nodes=r_nodes,
        theta_samples=table,
        chi_samples=chi_tab,
        weight_grid=weight_grid,
        chi_grid=chi_grid,
    )


def localized_virial(field, weight):
    """Quadrature of phi_R * |u|^2 over the box."""
    _check_same_grid(field.grid, weight.grid)
    rho = field.values.real**2 + field.values.imag**2
    return float(np.sum(weight.weight_grid * rho) * field.grid.cell_area)


def cutoff_apply(field, weight):
    """Multiply the field by the plateau cutoff chi(r/R)."""
    _check_same_grid(field.grid, weight.grid)
    return Field(field.grid, weight.chi_grid * field.values, field.time)
