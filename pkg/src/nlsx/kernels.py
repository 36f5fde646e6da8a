"""Pointwise kernels of the exponential nonlinearity.

All public functions are pure real-to-real maps of the squared amplitude
rho = |u|^2 or of the scaled variable s = 4*pi*rho.  The complex phase is
always applied by the caller (the nonlinear term acting on u is
``multiplier(|u|^2, mu) * u``).

Every kernel switches to a Taylor polynomial below ``SERIES_CUTOFF`` because
the direct expressions lose all significant digits near s = 0 (they vanish to
second or third order).  Arguments with 4*pi*rho beyond ``EXP_ARG_LIMIT``
raise :class:`KernelOverflowError` instead of silently returning inf, so that
callers can tell "amplitude blow-up in progress" from numerical poison.
"""

import math
from fractions import Fraction

import numpy as np

FOUR_PI = 4.0 * math.pi
# Double-double tail of 4*pi: 4*pi = FOUR_PI + FOUR_PI_LO to ~1e-32.
# (1.2246...e-16 is the standard tail of pi beyond math.pi.)
FOUR_PI_LO = 4.0 * 1.2246467991473532e-16

# Exponent-argument guard: exp(s) for s > ~709 overflows a double.
EXP_ARG_LIMIT = 700.0

# Below this s the direct expressions are evaluated by degree-20 Taylor
# polynomials.  Both branches are accurate to a few ulp in [0.5, 1.5], so the
# switch point is uncritical; 1.0 leaves a wide margin on each side.
SERIES_CUTOFF = 1.0
SERIES_DEGREE = 20


class KernelOverflowError(ArithmeticError):
    """Amplitude out of evaluable range: 4*pi*|u|^2 exceeds the exp guard."""

    def __init__(self, arg, limit=EXP_ARG_LIMIT):
        self.arg = float(arg)
        self.limit = float(limit)
        super().__init__(
            f"exponent argument {self.arg:.6g} exceeds the overflow guard "
            f"{self.limit:g}; amplitude out of evaluable range"
        )


def _poly_coeffs(term):
    """Descending-order float coefficients c_n = term(n), n = 0..SERIES_DEGREE.

    Coefficients are built as exact rationals and rounded once, so each float
    coefficient is correctly rounded.
    """
    asc = [float(term(n)) for n in range(SERIES_DEGREE + 1)]
    return np.array(asc[::-1], dtype=np.float64)


def _frac(n):
    return Fraction(1, math.factorial(n))


# e^s - 1                       = sum_{n>=1} s^n/n!
_C_EXPM1 = _poly_coeffs(lambda n: _frac(n) if n >= 1 else 0)
# e^s - 1 - s                   = sum_{n>=2} s^n/n!
_C_EXPM1_M1 = _poly_coeffs(lambda n: _frac(n) if n >= 2 else 0)
# e^s - 1 - s - s^2/2           = sum_{n>=3} s^n/n!
_C_EXPM1_M2 = _poly_coeffs(lambda n: _frac(n) if n >= 3 else 0)
# s e^s - e^s + 1               = sum_{n>=2} (n-1) s^n/n!
_C_H_CORE = _poly_coeffs(lambda n: (n - 1) * _frac(n) if n >= 2 else 0)
# s e^s - e^s + 1 - s^2/2       = sum_{n>=3} (n-1) s^n/n!
_C_H1 = _poly_coeffs(lambda n: (n - 1) * _frac(n) if n >= 3 else 0)
# s e^s - 2 e^s + s + 2         = sum_{n>=3} (n-2) s^n/n!
_C_G = _poly_coeffs(lambda n: (n - 2) * _frac(n) if n >= 3 else 0)
# s^2 e^s/2 - s e^s + e^s - 1   = sum_{n>=3} (n-1)(n-2)/2 s^n/n!
_C_K1_CORE = _poly_coeffs(
    lambda n: Fraction((n - 1) * (n - 2), 2) * _frac(n) if n >= 3 else 0
)


def _check_mu(mu):
    if mu not in (0, 1):
        raise ValueError(f"mu must be 0 or 1, got {mu!r}")
    return int(mu)


def _prepare(s, name):
    s = np.asarray(s, dtype=np.float64)
    if not np.all(np.isfinite(s)):
        raise ValueError(f"{name} must be finite")
    if np.any(s < 0.0):
        raise ValueError(f"{name} must be nonnegative")
    smax = s.max() if s.size else 0.0
    if smax > EXP_ARG_LIMIT:
        raise KernelOverflowError(smax)
    return s


def _two_branch(s, coeffs, direct):
    """Evaluate series(s) where s < SERIES_CUTOFF, direct(s) elsewhere."""
    small = s < SERIES_CUTOFF
    out = np.empty_like(s)
    if small.any():
        ssm = s[small]
        out[small] = np.polyval(coeffs, ssm)
    big = ~small
    if big.any():
        with np.errstate(over="ignore"):
            out[big] = direct(s[big])
    if not np.all(np.isfinite(out)):
        # kernels that multiply e^s by s^2/2 overflow slightly before the
        # argument guard itself does
        raise KernelOverflowError(s.max() if s.size else 0.0)
    return out


def _ret(out, scalar_in):
    return float(out) if scalar_in else out


_SPLITTER = 134217729.0  # 2^27 + 1, Veltkamp splitting constant


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


_FP_HI, _FP_LO = _split(FOUR_PI)


def _scaled_arg(rho):
    """Compensated product 4*pi*rho: returns (s, ds) with s + ds correct to
    ~1e-32 relative.  exp's condition number (~s) would otherwise turn the
    product rounding into an s*eps/2 relative error at large rho.
    """
    s = FOUR_PI * rho
    chb = _SPLITTER * rho
    r_hi = chb - (chb - rho)
    r_lo = rho - r_hi
    err = ((_FP_HI * r_hi - s) + _FP_HI * r_lo + _FP_LO * r_hi) + _FP_LO * r_lo
    ds = err + FOUR_PI_LO * rho
    return s, ds


# Direct-branch expressions, grouped to keep cancellation mild for s >= ~0.5.


def _mult1_direct(s):
    return np.expm1(s) - s


def _f0_direct(s):
    return np.expm1(s) - s


def _f1_direct(s):
    return (np.expm1(s) - s) - 0.5 * s * s


def _h_core_direct(s):
    e1 = np.expm1(s)
    return s * e1 - (e1 - s)


def _h1_direct(s):
    return _h_core_direct(s) - 0.5 * s * s


def _g_direct(s):
    e1 = np.expm1(s)
    return s * e1 - 2.0 * (e1 - s)


def _k1_core_direct(s):
    e1 = np.expm1(s)
    return e1 * (0.5 * s * s - s + 1.0) - s * (1.0 - 0.5 * s)


def multiplier(rho, mu):
    """Nonlinearity multiplier m(rho) = e^{4 pi rho} - 1 - 4 pi mu rho.

    The cubic-type nonlinear term acting on u is m(|u|^2) * u.  Always >= 0.
    """
    mu = _check_mu(mu)
    scalar = np.isscalar(rho) or np.ndim(rho) == 0
    rho = np.asarray(rho, dtype=np.float64)
    if not np.all(np.isfinite(rho)):
        raise ValueError("rho must be finite")
    if np.any(rho < 0.0):
        raise ValueError("rho must be nonnegative")
    s, ds = _scaled_arg(rho)
    s = _prepare(s, "4*pi*rho")
    if mu == 0:
        out = _two_branch(s, _C_EXPM1, np.expm1)
        big = s >= SERIES_CUTOFF  # d/ds(e^s - 1) = E + 1
        out[big] += (out[big] + 1.0) * ds[big]
    else:
        out = _two_branch(s, _C_EXPM1_M1, _mult1_direct)
        big = s >= SERIES_CUTOFF  # d/ds(e^s - 1 - s) = E
        out[big] += (out[big] + s[big]) * ds[big]
    return _ret(out, scalar)


def big_F(rho, mu):
    """Nonlinear potential density F(rho) with 8*pi*F = e^s - 1 - s - mu s^2/2,
    s = 4 pi rho.  Nonnegative; its integral enters the conserved energy.
    """
    mu = _check_mu(mu)
    scalar = np.isscalar(rho) or np.ndim(rho) == 0
    rho = np.asarray(rho, dtype=np.float64)
    if not np.all(np.isfinite(rho)):
        raise ValueError("rho must be finite")
    if np.any(rho < 0.0):
        raise ValueError("rho must be nonnegative")
    s, ds = _scaled_arg(rho)
    s = _prepare(s, "4*pi*rho")
    big = s >= SERIES_CUTOFF
    if mu == 0:
        core = _two_branch(s, _C_EXPM1_M1, _f0_direct)
        # d/ds(e^s - 1 - s) = core + s
        core[big] += (core[big] + s[big]) * ds[big]
    else:
        core = _two_branch(s, _C_EXPM1_M2, _f1_direct)
        # d/ds(e^s - 1 - s - s^2/2) = core + s^2/2
        core[big] += (core[big] + 0.5 * s[big] * s[big]) * ds[big]
    return _ret(core / (8.0 * math.pi), scalar)


def h_kernel(s, mu):
    """h(s) = s e^s - e^s + 1 - mu s^2/2.

    The virial density: conj(u) f(u) - 2 F(u) = h(4 pi |u|^2) / (4 pi).
    """
    mu = _check_mu(mu)
    scalar = np.isscalar(s) or np.ndim(s) == 0
    s = _prepare(np.asarray(s, dtype=np.float64), "s")
    if mu == 0:
        out = _two_branch(s, _C_H_CORE, _h_core_direct)
    else:
        # the -s^2/2 is folded into the series; subtracting it from the core
        # would wipe out all digits near s = 0 (h_1 vanishes to third order)
        out = _two_branch(s, _C_H1, _h1_direct)
    return _ret(out, scalar)


def g_kernel(s, mu):
    """g(s) = s(e^s - 1 - mu s) - 2(e^s - 1 - s - mu s^2/2) = s e^s - 2 e^s + s + 2.

    The mu-terms cancel algebraically, so the value is the same for mu = 0, 1.
    Nonnegative for s >= 0; its integral is conj(u) f(u) - 4 F(u) up to 4 pi.
    """
    _check_mu(mu)
    scalar = np.isscalar(s) or np.ndim(s) == 0
    s = _prepare(np.asarray(s, dtype=np.float64), "s")
    out = _two_branch(s, _C_G, _g_direct)
    return _ret(out, scalar)


def k1_kernel(s):
    """k1(s) = (s^2 e^s/2 - s e^s + e^s - 1) / (4 pi), with k1(s) >= s^3/(24 pi)."""
    scalar = np.isscalar(s) or np.ndim(s) == 0
    s = _prepare(np.asarray(s, dtype=np.float64), "s")
    core = _two_branch(s, _C_K1_CORE, _k1_core_direct)
    return _ret(core / FOUR_PI, scalar)


def m_kernel(s):
    """m(s) = s e^s - e^s - s^2 e^s/2 + 1 = -(4 pi) k1(s); nonpositive for s >= 0."""
    scalar = np.isscalar(s) or np.ndim(s) == 0
    s = _prepare(np.asarray(s, dtype=np.float64), "s")
    core = _two_branch(s, _C_K1_CORE, _k1_core_direct)
    return _ret(-core, scalar)
