"""Biphoton spectral amplitudes of layered cores.

Three independent routes to ``|Phi(Omega)|^2`` live here:

* the coherent layer sum of closed-form single-layer amplitudes
  (:func:`layer_amplitude`, :func:`layer_sum`), which is the production path;
* the two double-sum closed forms, one per structure family
  (:func:`closed_form_aperiodic`, :func:`closed_form_pc`);
* adaptive quadrature of the raw phase integral
  (:func:`oracle_direct_integration`), which never uses a sinc.

Amplitudes are in arbitrary units: the spatial prefactor and chi_0 are 1.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ChannelForbidden, DomainError
from .numerics import adaptive_quad, sinc
from .structures import APERIODIC, PHOTONIC_CRYSTAL, default_qpm_offset, phase_mismatch_profile, \
    signal_wavelength_from_detuning

# Below this |delta_beta| the aperiodic closed form's 1/delta_beta^2 prefactor
# is replaced by the equivalent layer sum.
_CLOSED_FORM_FLOOR = 1e-8


@dataclass(frozen=True)
class TriModeChannel:
    """Mode orders of pump, signal and idler for one SPDC pathway."""

    mu_p: int
    mu_s: int
    mu_i: int
    label_s: str = "s"
    label_i: str = "i"

    @property
    def modes(self):
        return (self.mu_p, self.mu_s, self.mu_i)

    @property
    def odd_count(self):
        return sum(mu % 2 for mu in self.modes)

    @property
    def allowed(self):
        return self.odd_count % 2 == 0

    def swapped(self):
        """Signal and idler modes exchanged, e.g. |0,1> -> |1,0>."""
        return TriModeChannel(self.mu_p, self.mu_i, self.mu_s, self.label_s, self.label_i)

    @property
    def name(self):
        return f"p{self.mu_p}_s{self.mu_s}_i{self.mu_i}"


@dataclass(frozen=True)
class SpatialAmplitude:
    value: float
    channel: TriModeChannel
    kz: tuple


def spatial_amplitude(geometry, channel, kz_p, kz_s, kz_i, A0=1.0):
    """Transverse overlap of the three mode profiles.

    Computes ``A0 * (2/H) * integral_{-H/2}^{H/2} u_p u_s u_i dz`` with
    ``u = cos(k_z z)`` for even and ``sin(k_z z)`` for odd modes, in closed
    form as a signed sum of four sinc terms. The signs follow from writing
    each profile as exponentials; channels with an odd number of odd modes
    cancel pairwise and return exactly 0.0.
    """
    kz = (kz_p, kz_s, kz_i)
    if not channel.allowed:
        return SpatialAmplitude(0.0, channel, kz)
    odd = [mu % 2 == 1 for mu in channel.modes]
    half_h = 0.5 * geometry.H
    total = 0.0
    for s_s in (1, -1):
        for s_i in (1, -1):
            weight = (s_s if odd[1] else 1) * (s_i if odd[2] else 1)
            total += weight * sinc((kz_p + s_s * kz_s + s_i * kz_i) * half_h)
    sign = -1.0 if channel.odd_count % 4 == 2 else 1.0
    return SpatialAmplitude(float(A0 * 0.5 * sign * total), channel, kz)


def layer_amplitude(delta_beta, length, phase, chi_sign, A):
    """Spectral amplitude generated inside one layer.

    ``l * chi * A * exp(-i*(phase + delta_beta*l/2)) * sinc(delta_beta*l/2)``;
    broadcasts over array inputs.
    """
    half = 0.5 * np.asarray(delta_beta) * length
    return length * chi_sign * A * np.exp(-1j * (phase + half)) * sinc(half)


def accumulated_phase(profile, lengths, m):
    """Phase ``sum_{n<m} delta_beta_n * l_n`` reached at the start of layer m (1-based)."""
    if not 1 <= m <= len(profile):
        raise DomainError(f"layer index {m} outside 1..{len(profile)}")
    return math.fsum(d * l for d, l in zip(profile[: m - 1], lengths[: m - 1]))


def layer_sum(lengths, signs, profile, A=1.0):
    """Coherent sum of layer amplitudes.

    ``profile`` has shape ``(N,)`` or ``(G, N)``; the result has shape
    ``()`` or ``(G,)``.
    """
    profile = np.asarray(profile, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    steps = profile * lengths
    phases = np.cumsum(steps, axis=-1) - steps
    return layer_amplitude(profile, lengths, phases, np.asarray(signs), A).sum(axis=-1)


def closed_form_aperiodic(l0, varsigma, N, A, delta_beta):
    """|Phi|^2 of an aperiodically poled core with uniform mismatch.

    Layers ``l_m = l0 + (m-1)*varsigma`` with alternating nonlinearity::

        |Phi|^2 = 4 A^2 / db^2 * sum_m [ sin^2(db l_m/2)
                  + 2 sum_p (-1)^p sin(db l_m/2) sin(db l_{m+p}/2) cos(zeta_mp) ]

        zeta_mp = db * p * (l0 + (m + p/2 - 1) * varsigma)

    Where ``|db| < 1e-8`` the equivalent layer sum is evaluated instead.
    """
    db = np.atleast_1d(np.asarray(delta_beta, dtype=float))
    lengths = l0 + varsigma * np.arange(N)
    signs = (-1) ** np.arange(N)
    out = np.empty_like(db)

    tiny = np.abs(db) < _CLOSED_FORM_FLOOR
    if tiny.any():
        prof = np.repeat(db[tiny, None], N, axis=1)
        out[tiny] = np.abs(layer_sum(lengths, signs, prof, A)) ** 2
    d = db[~tiny]
    if d.size:
        s = np.sin(np.outer(d, lengths) / 2.0)
        acc = (s * s).sum(axis=1)
        m = np.arange(1, N + 1)
        for p in range(1, N):
            mm = m[: N - p]
            zeta = np.outer(d, p * (l0 + (mm + p / 2.0 - 1.0) * varsigma))
            acc += 2.0 * (-1) ** p * (s[:, : N - p] * s[:, p:] * np.cos(zeta)).sum(axis=1)
        out[~tiny] = 4.0 * A * A / (d * d) * acc
    out = np.maximum(out, 0.0)
    return out[0] if np.ndim(delta_beta) == 0 else out


def _closed_form_pc_base(l, N, alpha, A, base):
    base = np.atleast_1d(np.asarray(base, dtype=float))
    ramp = alpha * l * np.arange(N)
    dm = base[:, None] + ramp[None, :]
    s = sinc(dm * l / 2.0)
    acc = (s * s).sum(axis=1)
    m = np.arange(1, N + 1)
    for p in range(1, N):
        mm = m[: N - p]
        zeta = p * l * (base[:, None] + alpha * l * (mm[None, :] - 1.0 + p / 2.0))
        acc += 2.0 * (s[:, : N - p] * s[:, p:] * np.cos(zeta)).sum(axis=1)
    return np.maximum(A * A * l * l * acc, 0.0)


def closed_form_pc(l, N, alpha, B, A, omega, offset=0.0):
    """|Phi|^2 of the chirped photonic-crystal core.

    With ``db_m = B*Omega + offset + alpha*(m-1)*l``::

        |Phi|^2 = A^2 l^2 sum_m [ sinc^2(db_m l/2)
                  + 2 sum_p sinc(db_m l/2) sinc(db_{m+p} l/2) cos(zeta_mp) ]

        zeta_mp = p*l*(B*Omega + offset + alpha*l*(m - 1 + p/2))

    ``B`` is the linear mismatch slope; pass a precomputed mismatch as
    ``offset`` with ``B = 0`` to use any other detuning dependence.
    """
    base = B * np.asarray(omega, dtype=float) + offset
    out = _closed_form_pc_base(l, N, alpha, A, base)
    return out[0] if np.ndim(base) == 0 else out


def oracle_direct_integration(structure, profile, A=1.0, signs=None):
    """Phi by adaptive quadrature of the raw phase integral.

    Integrates ``chi_m * A * exp(-i*(phase_m + db_m * t))`` over every layer
    with 10/20-point Gauss-Legendre panels; the phase carried into each layer
    is the running integral of the mismatch over the preceding layers.
    """
    if structure.N == 0:
        raise DomainError("empty structure")
    if signs is None:
        signs = structure.effective_signs
    total = 0j
    phase = 0.0
    for layer, db, chi in zip(structure.layers, profile, signs):
        length = layer.length

        def integrand(t, db=db, phase=phase):
            return np.exp(-1j * (phase + db * t))

        total += chi * A * adaptive_quad(integrand, 0.0, length, atol=1e-14 * length)
        phase += db * length
    return total


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Complex spectral amplitude of one channel on a detuning grid.

    Amplitudes are in arbitrary units (spatial prefactor and chi_0 set to 1;
    see ``scale`` if the result was normalized).
    """

    omega: np.ndarray
    wavelength_signal: np.ndarray
    amplitude: np.ndarray
    channel: TriModeChannel
    structure: object
    coeffs: object
    qpm_offset: float
    spatial: float
    quadratic: bool = True
    forbidden: bool = False
    scale: float = 1.0
    extras: dict = field(default_factory=dict)

    @property
    def abs2(self):
        return np.abs(self.amplitude) ** 2

    def mismatch(self, omega=None):
        """Per-layer mismatch profile, shape ``(len(omega), N)``."""
        omega = self.omega if omega is None else omega
        return phase_mismatch_profile(
            self.structure, self.coeffs, omega, self.qpm_offset, quadratic=self.quadratic
        )


def total_spectrum(structure, channel, coeffs, omega, geometry, qpm_offset=None,
                   quadratic=True, amplitude=None, tuned_layer=1):
    """Biphoton spectrum of ``structure`` for one mode channel.

    Parameters
    ----------
    structure : LayeredStructure
    channel : TriModeChannel
    coeffs : TaylorCoefficients
        Mismatch expansion for this channel; its ``kz`` feed the spatial
        amplitude unless ``amplitude`` is given.
    omega : array_like
        Signal detuning grid, rad/fs.
    geometry : SlabGeometry
        Cross-section used for the spatial overlap.
    qpm_offset : float, optional
        Subtracted from ``delta_beta0``. Defaults to
        :func:`~slabspdc.structures.default_qpm_offset`.
    quadratic : bool
        Keep the ``B*Omega**2`` term of the mismatch expansion.

    A parity-forbidden channel yields an all-zero result, ``forbidden=True``
    and a :class:`ChannelForbidden` warning.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if omega.size == 0:
        raise DomainError("empty detuning grid")
    if qpm_offset is None:
        qpm_offset = default_qpm_offset(structure, coeffs, tuned_layer)
    lam_s = signal_wavelength_from_detuning(omega, coeffs.wavelength_pump)
    common = dict(omega=omega, wavelength_signal=lam_s, channel=channel,
                  structure=structure, coeffs=coeffs, qpm_offset=float(qpm_offset),
                  quadratic=quadratic)
    if not channel.allowed:
        warnings.warn(f"channel {channel.modes} violates the parity rule", ChannelForbidden,
                      stacklevel=2)
        return SpectrumResult(amplitude=np.zeros(omega.shape, complex), spatial=0.0,
                              forbidden=True, **common)
    if amplitude is None:
        amplitude = spatial_amplitude(geometry, channel, *coeffs.kz).value
    profile = phase_mismatch_profile(structure, coeffs, omega, qpm_offset, quadratic=quadratic)
    phi = layer_sum(structure.lengths, structure.effective_signs, profile, amplitude)
    return SpectrumResult(amplitude=phi, spatial=float(amplitude), **common)


def closed_form_spectrum(result):
    """The family's closed-form |Phi|^2 evaluated on ``result``'s grid."""
    st = result.structure
    if result.forbidden:
        return np.zeros_like(result.omega)
    base = result.coeffs.delta_beta(result.omega, quadratic=result.quadratic) - result.qpm_offset
    A = result.spatial * result.scale
    if st.kind == APERIODIC:
        return closed_form_aperiodic(st.base_length, st.chirp, st.N, A, base)
    if st.kind == PHOTONIC_CRYSTAL:
        return _closed_form_pc_base(st.base_length, st.N, st.alpha, A, base)
    raise DomainError(f"unknown structure kind {st.kind!r}")


def normalize(results):
    """Scale results by one common factor so the largest |Phi|^2 is 1."""
    peak = max((float(r.abs2.max()) for r in results), default=0.0)
    if peak == 0.0:
        return list(results)
    k = 1.0 / math.sqrt(peak)
    return [replace(r, amplitude=r.amplitude * k, scale=r.scale * k) for r in results]


def _branch_roots(coeffs, residual, target, quadratic):
    """Detunings where the expanded mismatch equals ``target``."""
    a = coeffs.B if quadratic else 0.0
    b = coeffs.D
    c = coeffs.delta_beta0 - residual - target
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b)) if b != 0 else -0.5 * sq
    roots = [q / a]
    if q != 0:
        roots.append(c / q)
    else:
        roots.append(-roots[0])
    return roots


def local_branch(coeffs, quadratic=True):
    """Detuning interval on which the mismatch is monotone and contains 0."""
    if not quadratic or coeffs.B == 0.0:
        return -math.inf, math.inf
    vertex = -coeffs.D / (2.0 * coeffs.B)
    if vertex > 0:
        return -math.inf, vertex
    if vertex < 0:
        return vertex, math.inf
    return -math.inf, math.inf


def mismatch_window(structure):
    """Interval of the uniform mismatch term holding the structure's response.

    Photonic crystal: wherever some layer has ``|db_m * l / 2| <= 8*pi``.
    Aperiodic: the first-order QPM band ``[pi/l_max, pi/l_min]`` widened by
    half its width or by eight coherent lobes ``16*pi/L``, whichever is
    larger.
    """
    if structure.kind == PHOTONIC_CRYSTAL:
        l = structure.base_length
        ramp = structure.alpha * l * np.arange(structure.N)
        reach = 16.0 * math.pi / l
        return float(np.min(-ramp) - reach), float(np.max(-ramp) + reach)
    lengths = structure.lengths
    lo, hi = math.pi / lengths.max(), math.pi / lengths.min()
    margin = max(0.5 * (hi - lo), 16.0 * math.pi / structure.total_length)
    return lo - margin, hi + margin


def default_grid(structure, coeffs, qpm_offset=None, n_points=2001, quadratic=True,
                 tuned_layer=1):
    """Uniform detuning grid covering the structure's mismatch window.

    Only the monotone branch of the mismatch expansion containing
    Omega = 0 is used (both sides when the expansion is even in Omega).
    """
    if qpm_offset is None:
        qpm_offset = default_qpm_offset(structure, coeffs, tuned_layer)
    if coeffs.D == 0.0 and (not quadratic or coeffs.B == 0.0):
        raise DomainError("mismatch does not depend on detuning; give an explicit grid")
    residual = qpm_offset
    lo_t, hi_t = mismatch_window(structure)
    b_lo, b_hi = local_branch(coeffs, quadratic)
    even = quadratic and coeffs.D == 0.0
    pts = []
    for t in (lo_t, hi_t):
        for r in _branch_roots(coeffs, residual, t, quadratic):
            if even or b_lo <= r <= b_hi:
                pts.append(r)
    if quadratic and coeffs.B != 0.0:
        vertex = -coeffs.D / (2.0 * coeffs.B)
        v_val = coeffs.delta_beta(vertex) - residual
        if lo_t <= v_val <= hi_t:
            pts.append(vertex)
    if even:
        pts += [-p for p in pts]
    if len(pts) < 2:
        raise DomainError("the mismatch window is not reachable on the local branch")
    return np.linspace(min(pts), max(pts), n_points)
