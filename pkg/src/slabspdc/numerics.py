"""Small numerical kernels shared by the solvers.

Kept dependency-light on purpose: the mode solver's root finder and the
spectrum oracle's quadrature are both checked against scipy in the tests,
so they must not be scipy themselves.
"""

import math

import numpy as np

from .errors import QuadratureNonConvergence

#: Speed of light in vacuum, um/fs.
C_UM_PER_FS = 0.299792458

_SERIES_CUTOFF = 1e-4


def sinc(x):
    """Unnormalized sinc, sin(x)/x, exact at the removable singularity.

    Accepts scalars or arrays. Below |x| < 1e-4 a short Taylor series is
    used instead of the quotient.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    return out[()] if out.ndim == 0 else out


def cosc(x):
    """cos(x)/x. Singular at 0, so no series branch."""
    return np.cos(x) / x


def omega_from_wavelength(wavelength):
    """Angular frequency (rad/fs) of a vacuum wavelength in um."""
    return 2.0 * math.pi * C_UM_PER_FS / wavelength


def wavelength_from_omega(omega):
    return 2.0 * math.pi * C_UM_PER_FS / omega


def bracketed_root(f, a, b, tol=0.0, maxiter=200):
    """Root of ``f`` on ``[a, b]`` by bisection with secant refinement.

    Every iteration halves the bracket and then tries one secant step from
    the bracket ends; the secant point is kept only if it lands strictly
    inside, so the bracket stays valid throughout. Iteration stops when
    ``|f| <= tol``, the bracket collapses to floating-point resolution, or
    ``maxiter`` is reached.

    Returns
    -------
    x : float
        The bracket point with the smallest ``|f|``.
    fx : float
        ``f(x)``.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a, fa
    if fb == 0.0:
        return b, fb
    if (fa > 0) == (fb > 0):
        raise ValueError("root is not bracketed")

    best = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        fm = f(m)
        if abs(fm) < abs(best[1]):
            best = (m, fm)
        if fm == 0.0 or abs(fm) <= tol:
            break
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm

        s = b - fb * (b - a) / (fb - fa)
        if a < s < b:
            fs = f(s)
            if abs(fs) < abs(best[1]):
                best = (s, fs)
            if fs == 0.0 or abs(fs) <= tol:
                break
            if (fs > 0) == (fa > 0):
                a, fa = s, fs
            else:
                b, fb = s, fs

        if b - a <= 4.0 * np.finfo(float).eps * max(abs(a), abs(b), 1e-300):
            break
    return best


_GL_LO = np.polynomial.legendre.leggauss(10)
_GL_HI = np.polynomial.legendre.leggauss(20)


def _gauss(f, a, b, rule):
    nodes, weights = rule
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * np.dot(weights, f(mid + half * nodes))


def adaptive_quad(f, a, b, atol=1e-14, rtol=1e-13, max_depth=30):
    """Integrate a vectorized (possibly complex) ``f`` over ``[a, b]``.

    Each panel is estimated by 10- and 20-point Gauss-Legendre rules; a
    panel whose two estimates disagree by more than its share of the
    tolerance is split in half. Raises QuadratureNonConvergence if any
    panel needs more than ``max_depth`` splits.
    """
    total = 0.0
    stack = [(a, b, 0)]
    whole = b - a
    while stack:
        lo, hi, depth = stack.pop()
        coarse = _gauss(f, lo, hi, _GL_LO)
        fine = _gauss(f, lo, hi, _GL_HI)
        share = (hi - lo) / whole
        if abs(fine - coarse) <= max(atol * share, rtol * abs(fine)):
            total = total + fine
            continue
        if depth >= max_depth:
            raise QuadratureNonConvergence(
                f"adaptive refinement exceeded depth {max_depth} on [{lo}, {hi}]"
            )
        mid = 0.5 * (lo + hi)
        stack.append((lo, mid, depth + 1))
        stack.append((mid, hi, depth + 1))
    return total
