"""TE modes of a symmetric slab waveguide.

All lengths are in um, times in fs and angles in rad. Material indices are
constants, so every bit of dispersion computed here is modal.

The guidance condition for the TE mode of order ``mu`` reads, with
``x = pi * H * n_z / lambda`` and ``V = pi * H * NA / lambda``
(``NA = sqrt(n_c**2 - n_cl**2)``),

    cos(x - mu*pi/2) = x / V,     x in [mu*pi/2, (mu+1)*pi/2)

which for mu = 0 and mu = 1 is equivalent to ``cosc(x) = 1/V`` and
``sinc(x) = 1/V``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CutoffError, DomainError, EmptyCurve, StencilError
from .numerics import bracketed_root, cosc, omega_from_wavelength, sinc

__all__ = [
    "SlabGeometry",
    "ModeIndex",
    "ModeSolution",
    "DispersionCurve",
    "TaylorCoefficients",
    "transcendental_residual",
    "solve_mode",
    "cutoff_wavelength",
    "dispersion_curve",
    "taylor_coefficients",
]


@dataclass(frozen=True)
class SlabGeometry:
    """Cross-section of a symmetric planar waveguide.

    Parameters
    ----------
    H : float
        Core height, um.
    n_c, n_cl : float
        Core and cladding refractive indices, ``n_c > n_cl > 0``.
    L_y : float
        Core width, um. Only enters the (normalized) spatial amplitude.
    """

    H: float
    n_c: float
    n_cl: float
    L_y: float = 1.0

    def __post_init__(self):
        if not (self.H > 0 and self.L_y > 0):
            raise DomainError("core height and width must be positive")
        if not (self.n_c > self.n_cl > 0):
            raise DomainError(
                f"guiding needs n_c > n_cl > 0, got n_c={self.n_c}, n_cl={self.n_cl}"
            )

    @property
    def numerical_aperture(self):
        return math.sqrt(self.n_c**2 - self.n_cl**2)

    def v_number(self, wavelength):
        """Half the normalized frequency, ``pi * H * NA / lambda``."""
        return math.pi * self.H * self.numerical_aperture / wavelength


@dataclass(frozen=True)
class ModeIndex:
    """Spatial mode order plus a free-form polarization/wave label."""

    mu: int
    label: str = ""

    def __post_init__(self):
        if int(self.mu) != self.mu or self.mu < 0:
            raise DomainError(f"mode order must be a non-negative integer, got {self.mu}")

    @property
    def odd(self):
        return self.mu % 2 == 1


@dataclass(frozen=True)
class ModeSolution:
    n_eff: float
    n_z: float
    beta: float
    k_z: float
    wavelength: float
    mu: int

    @property
    def omega(self):
        return omega_from_wavelength(self.wavelength)


def transcendental_residual(geometry, mu, wavelength, n_z, form="auto"):
    """Signed residual of the TE guidance condition.

    Parameters
    ----------
    geometry : SlabGeometry
    mu : int
        Mode order.
    wavelength : float
        Vacuum wavelength, um.
    n_z : float
        Transverse index ``sqrt(n_c**2 - n_eff**2)``.
    form : {"auto", "cos"}
        ``"auto"`` uses ``cosc(x) - 1/V`` for mu = 0, ``sinc(x) - 1/V`` for
        mu = 1 and the cosine form otherwise; ``"cos"`` always uses
        ``cos(x - mu*pi/2) - n_z/NA``.

    Returns
    -------
    float
        Zero exactly when ``n_z`` solves the mode-``mu`` equation.
    """
    if not wavelength > 0:
        raise DomainError("wavelength must be positive")
    na = geometry.numerical_aperture
    if not 0 < n_z <= na:
        raise DomainError(
            f"n_z={n_z!r} outside (0, {na!r}]: no guided solution there"
        )
    x = math.pi * geometry.H * n_z / wavelength
    if form == "auto" and mu in (0, 1):
        rhs = 1.0 / geometry.v_number(wavelength)
        lhs = cosc(x) if mu == 0 else sinc(x)
        return float(lhs - rhs)
    if form not in ("auto", "cos"):
        raise ValueError(f"unknown residual form {form!r}")
    return math.cos(x - mu * math.pi / 2) - n_z / na


def cutoff_wavelength(geometry, mu):
    """Longest wavelength at which mode ``mu`` is guided (inf for mu = 0)."""
    if mu == 0:
        return math.inf
    return 2.0 * geometry.H * geometry.numerical_aperture / mu


def solve_mode(geometry, mu, wavelength):
    """Solve for the TE mode of order ``mu`` at one vacuum wavelength.

    The root is searched on the branch ``x in [mu*pi/2, (mu+1)*pi/2)`` so
    the returned solution has the requested order.

    Raises
    ------
    CutoffError
        If the branch holds no sign change, i.e. the mode is not guided.
    """
    if not wavelength > 0:
        raise DomainError("wavelength must be positive")
    v = geometry.v_number(wavelength)
    shift = mu * math.pi / 2

    def g(x):
        return math.cos(x - shift) - x / v

    lo, hi = shift, shift + math.pi / 2
    if g(lo) <= 0.0:
        raise CutoffError(mu, wavelength)
    x, _ = bracketed_root(g, lo, hi)

    n_z = x * wavelength / (math.pi * geometry.H)
    n_eff = math.sqrt(geometry.n_c**2 - n_z**2)
    k0 = 2.0 * math.pi / wavelength
    return ModeSolution(
        n_eff=n_eff, n_z=n_z, beta=n_eff * k0, k_z=n_z * k0, wavelength=wavelength, mu=mu
    )


@dataclass(frozen=True, eq=False)
class DispersionCurve:
    """One mode sampled on a wavelength grid.

    ``samples[j]`` is None where the grid point lies past cut-off.
    """

    mode: ModeIndex
    geometry: SlabGeometry
    wavelengths: np.ndarray
    samples: tuple = field(repr=False)

    @property
    def guided(self):
        return np.array([s is not None for s in self.samples])

    def _column(self, name):
        return np.array([np.nan if s is None else getattr(s, name) for s in self.samples])

    @property
    def n_eff(self):
        return self._column("n_eff")

    @property
    def beta(self):
        return self._column("beta")

    @property
    def k_z(self):
        return self._column("k_z")

    @property
    def omega(self):
        return omega_from_wavelength(self.wavelengths)

    @property
    def guided_range(self):
        """(min, max) guided wavelength on the grid."""
        lam = self.wavelengths[self.guided]
        return float(lam.min()), float(lam.max())

    def covers(self, wavelength):
        lo, hi = self.guided_range
        return lo < wavelength < hi

    def beta_derivative(self, order=1):
        """d^k beta / d omega^k on the guided samples of the grid.

        Uses second-order differences on the (non-uniform in omega) grid.
        Returns ``(wavelengths, values)`` restricted to guided samples.
        """
        if order not in (1, 2):
            raise ValueError("only first and second derivatives are provided")
        mask = self.guided
        if mask.sum() < order + 1:
            raise StencilError(
                f"{int(mask.sum())} guided samples cannot support a derivative of order {order}"
            )
        w = self.omega[mask]
        out = self.beta[mask]
        for _ in range(order):
            out = np.gradient(out, w)
        return self.wavelengths[mask], out


def dispersion_curve(geometry, mu, lambda_min, lambda_max, n_samples, label=""):
    """Sample mode ``mu`` on a uniform wavelength grid.

    Grid points past cut-off are kept as ``None`` rather than dropped or
    interpolated. Raises EmptyCurve if nothing is guided.
    """
    if not 0 < lambda_min < lambda_max:
        raise DomainError("need 0 < lambda_min < lambda_max")
    if n_samples < 2:
        raise DomainError("need at least two samples")
    grid = np.linspace(lambda_min, lambda_max, n_samples)
    samples = []
    for lam in grid:
        try:
            samples.append(solve_mode(geometry, mu, float(lam)))
        except CutoffError:
            samples.append(None)
    if all(s is None for s in samples):
        raise EmptyCurve(f"mode {mu} is cut off over [{lambda_min}, {lambda_max}] um")
    return DispersionCurve(ModeIndex(mu, label), geometry, grid, tuple(samples))


@dataclass(frozen=True)
class TaylorCoefficients:
    """Second-order expansion of the phase mismatch around degeneracy.

    ``delta_beta(Omega) = delta_beta0 + D*Omega + B*Omega**2``, with Omega
    the signal detuning from ``omega_p / 2`` in rad/fs.

    ``kz`` holds the transverse wavenumbers (pump, signal, idler) at the
    expansion point; ``wavelength_pump`` is the pump vacuum wavelength.
    """

    delta_beta0: float
    D: float
    B: float
    wavelength_pump: float = math.nan
    kz: tuple = (math.nan, math.nan, math.nan)

    @property
    def omega_pump(self):
        return omega_from_wavelength(self.wavelength_pump)

    def delta_beta(self, omega, quadratic=True):
        omega = np.asarray(omega, dtype=float)
        out = self.delta_beta0 + self.D * omega
        if quadratic:
            out = out + self.B * omega * omega
        return out


def _stencil_betas(curve, omega0, h):
    betas = []
    for j in (-2, -1, 0, 1, 2):
        lam = omega_from_wavelength(omega0 + j * h)
        try:
            betas.append(solve_mode(curve.geometry, curve.mode.mu, lam).beta)
        except CutoffError as exc:
            raise StencilError(
                f"stencil point at {lam!r} um is past cut-off for mode {curve.mode.mu}"
            ) from exc
    return betas


def _first(b, h):
    return (b[0] - 8.0 * b[1] + 8.0 * b[3] - b[4]) / (12.0 * h)


def _second(b, h):
    return (-b[0] + 16.0 * b[1] - 30.0 * b[2] + 16.0 * b[3] - b[4]) / (12.0 * h * h)


def taylor_coefficients(curve_p, curve_s, curve_i, wavelength_pump, rel_step=1e-3):
    """Phase-mismatch coefficients at the degenerate point.

    Derivatives of beta with respect to angular frequency come from 5-point
    central differences on freshly solved points with step
    ``rel_step * omega_p / 2``; the tabulated grids only set the window the
    expansion point must fall inside.

    Returns
    -------
    TaylorCoefficients
        ``delta_beta0 = beta_s + beta_i - beta_p``,
        ``D = beta_s' - beta_i'`` and ``B = (beta_s'' + beta_i'') / 2``.
    """
    lam_sub = 2.0 * wavelength_pump
    if not curve_p.covers(wavelength_pump):
        raise StencilError(f"pump wavelength {wavelength_pump} um outside the pump curve")
    for curve in (curve_s, curve_i):
        if not curve.covers(lam_sub):
            raise StencilError(
                f"subharmonic wavelength {lam_sub} um outside the mode-{curve.mode.mu} curve"
            )

    omega_p = omega_from_wavelength(wavelength_pump)
    omega0 = 0.5 * omega_p
    h = rel_step * omega0

    try:
        pump = solve_mode(curve_p.geometry, curve_p.mode.mu, wavelength_pump)
    except CutoffError as exc:
        raise StencilError(str(exc)) from exc
    bs = _stencil_betas(curve_s, omega0, h)
    bi = _stencil_betas(curve_i, omega0, h)

    sol_s = solve_mode(curve_s.geometry, curve_s.mode.mu, lam_sub)
    sol_i = solve_mode(curve_i.geometry, curve_i.mode.mu, lam_sub)
    return TaylorCoefficients(
        delta_beta0=bs[2] + bi[2] - pump.beta,
        D=_first(bs, h) - _first(bi, h),
        B=(_second(bs, h) + _second(bi, h)) / 2.0,
        wavelength_pump=wavelength_pump,
        kz=(pump.k_z, sol_s.k_z, sol_i.k_z),
    )
