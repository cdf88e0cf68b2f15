"""Layered nonlinear cores: aperiodically poled and chirped photonic crystal.

Layers are counted from 1 in formulas (``m = 1..N``) but stored in a
zero-based tuple. The first layer always carries ``chi_sign = +1``.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, GuidanceViolation, InvalidLayerLength
from .modes import SlabGeometry
from .numerics import omega_from_wavelength, wavelength_from_omega

APERIODIC = "aperiodic"
PHOTONIC_CRYSTAL = "photonic_crystal"
WAVES = ("p", "s", "i")


@dataclass(frozen=True)
class Layer:
    """One homogeneous slice of the core.

    ``n_c`` and ``n_cl`` map a wave label ("p", "s", "i") to that wave's
    core/cladding index inside this layer; they are empty when the builder
    was given no geometry.
    """

    length: float
    chi_sign: int
    n_c: dict = field(default_factory=dict)
    n_cl: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidLayerLength(f"layer length must be positive, got {self.length!r}")
        if self.chi_sign not in (1, -1):
            raise DomainError("chi_sign must be +1 or -1")
        for q, nc in self.n_c.items():
            if q in self.n_cl and not nc > self.n_cl[q]:
                raise GuidanceViolation(f"wave {q}: n_c={nc!r} <= n_cl={self.n_cl[q]!r}")

    def geometry(self, wave, H, L_y=1.0):
        return SlabGeometry(H=H, n_c=self.n_c[wave], n_cl=self.n_cl[wave], L_y=L_y)


@dataclass(frozen=True)
class ChirpParameters:
    """Refractive-index slopes per unit length for pump, signal and idler.

    ``alpha`` (rad/um^2) is either supplied directly or derived from the
    slopes with :func:`spatial_chirp_alpha`.
    """

    varsigma_p: float = 0.0
    varsigma_s: float = 0.0
    varsigma_i: float = 0.0
    alpha: float = None

    def slope(self, wave):
        return {"p": self.varsigma_p, "s": self.varsigma_s, "i": self.varsigma_i}[wave]

    def derived(self, wavelength_pump):
        """Copy with ``alpha`` recomputed from the slopes."""
        return replace(self, alpha=spatial_chirp_alpha(wavelength_pump, self))

    @classmethod
    def from_alpha(cls, alpha, wavelength_pump):
        """Pump-only index chirp producing the requested ``alpha``."""
        return cls(varsigma_p=alpha * wavelength_pump / (2.0 * math.pi), alpha=alpha)


@dataclass(frozen=True, eq=False)
class LayeredStructure:
    layers: tuple
    kind: str
    chirp: object
    base_length: float

    @property
    def N(self):
        return len(self.layers)

    @property
    def lengths(self):
        return np.array([layer.length for layer in self.layers])

    @property
    def chi_signs(self):
        return np.array([layer.chi_sign for layer in self.layers])

    @property
    def total_length(self):
        return math.fsum(layer.length for layer in self.layers)

    @property
    def alpha(self):
        if self.kind != PHOTONIC_CRYSTAL:
            raise AttributeError("only photonic-crystal structures carry a spatial chirp")
        return self.chirp.alpha

    @property
    def effective_signs(self):
        """Nonlinearity signs as seen by the layer sum.

        In the photonic crystal the alternating sign is absorbed into the
        pi/l grating momentum (the mismatch there is measured from first-order
        QPM), so every layer contributes with the first layer's sign.
        """
        signs = self.chi_signs
        if self.kind == PHOTONIC_CRYSTAL:
            return signs * signs[0] * (-1) ** np.arange(self.N)
        return signs

    def to_dict(self):
        chirp = self.chirp
        if isinstance(chirp, ChirpParameters):
            chirp = {
                "varsigma_p_per_um": chirp.varsigma_p,
                "varsigma_s_per_um": chirp.varsigma_s,
                "varsigma_i_per_um": chirp.varsigma_i,
                "alpha_rad_per_um2": chirp.alpha,
            }
        return {
            "kind": self.kind,
            "N": self.N,
            "base_length_um": self.base_length,
            "total_length_um": self.total_length,
            "chirp": chirp,
            "layers": [
                {"length_um": layer.length, "chi_sign": layer.chi_sign,
                 "n_c": dict(layer.n_c), "n_cl": dict(layer.n_cl)}
                for layer in self.layers
            ],
        }


def build_aperiodic(l0=None, varsigma=0.0, N=1, total_length=None, geometry=None):
    """Aperiodically poled core with layer lengths ``l0 + m*varsigma``.

    Give either ``l0`` or ``total_length``; the other is derived from
    ``total_length = N*l0 + varsigma*N*(N-1)/2``.
    """
    if N < 1:
        raise DomainError("need at least one layer")
    if (l0 is None) == (total_length is None):
        raise DomainError("give exactly one of l0 and total_length")
    if l0 is None:
        l0 = (total_length - varsigma * N * (N - 1) / 2.0) / N
    if not l0 > 0:
        raise InvalidLayerLength(f"first layer length {l0!r} is not positive")

    indices = {}
    if geometry is not None:
        indices = {"n_c": dict.fromkeys(WAVES, geometry.n_c),
                   "n_cl": dict.fromkeys(WAVES, geometry.n_cl)}
    layers = []
    for m in range(N):
        length = l0 + m * varsigma
        if not length > 0:
            raise InvalidLayerLength(f"layer {m + 1} has length {length!r} um")
        layers.append(Layer(length, 1 if m % 2 == 0 else -1, **indices))
    return LayeredStructure(tuple(layers), APERIODIC, varsigma, l0)


def matched_cladding_index(n_cl0, n_c0, varsigma, m, l):
    """Cladding index of layer ``m`` that keeps ``n_c**2 - n_cl**2`` fixed.

    The core index of layer ``m`` is ``n_c0 + m*l*varsigma``.
    """
    shift = m * l * varsigma
    radicand = n_cl0**2 + shift * (2.0 * n_c0 + shift)
    if not radicand > 0:
        raise GuidanceViolation(f"layer {m}: cladding radicand {radicand!r} <= 0")
    n_cl = math.sqrt(radicand)
    if not n_cl < n_c0 + shift:
        raise GuidanceViolation(f"layer {m}: cladding index {n_cl!r} >= core index")
    return n_cl


def spatial_chirp_alpha(wavelength_pump, chirp):
    """Spatial chirp ``(omega_p/c) * (vs_p - vs_s/2 - vs_i/2)``, rad/um^2."""
    if not wavelength_pump > 0:
        raise DomainError("pump wavelength must be positive")
    k_p = 2.0 * math.pi / wavelength_pump
    return k_p * (chirp.varsigma_p - chirp.varsigma_s / 2.0 - chirp.varsigma_i / 2.0)


def build_chirped_pc(l=None, N=1, base=None, chirp=None, total_length=None,
                     wavelength_pump=None):
    """Equal-length photonic-crystal core with linearly chirped indices.

    Parameters
    ----------
    l : float, optional
        Layer length, um. Alternatively give ``total_length``.
    N : int
        Number of layers.
    base : SlabGeometry or dict
        Zeroth-layer geometry, either shared by all waves or keyed by "p",
        "s", "i".
    chirp : ChirpParameters
        Index slopes. If ``alpha`` is unset it is derived, which needs
        ``wavelength_pump``.
    """
    if N < 1:
        raise DomainError("need at least one layer")
    if (l is None) == (total_length is None):
        raise DomainError("give exactly one of l and total_length")
    if l is None:
        l = total_length / N
    if not l > 0:
        raise InvalidLayerLength(f"layer length {l!r} is not positive")
    chirp = chirp or ChirpParameters(alpha=0.0)
    if chirp.alpha is None:
        if wavelength_pump is None:
            raise DomainError("alpha is unset and no pump wavelength was given to derive it")
        chirp = chirp.derived(wavelength_pump)
    if base is None:
        raise DomainError("a base geometry is required")
    if isinstance(base, SlabGeometry):
        base = dict.fromkeys(WAVES, base)

    layers = []
    for m in range(N):
        n_c, n_cl = {}, {}
        for q in WAVES:
            g = base[q]
            vs = chirp.slope(q)
            n_c[q] = g.n_c + m * l * vs
            n_cl[q] = matched_cladding_index(g.n_cl, g.n_c, vs, m, l)
            if not n_c[q] > 0:
                raise GuidanceViolation(f"layer {m + 1}: core index {n_c[q]!r} <= 0")
        layers.append(Layer(l, 1 if m % 2 == 0 else -1, n_c, n_cl))
    return LayeredStructure(tuple(layers), PHOTONIC_CRYSTAL, chirp, l)


def default_qpm_offset(structure, coeffs, tuned_layer=1):
    """QPM offset that centres the structure's response on degeneracy.

    Aperiodic: the degenerate mismatch is set to ``pi / l_mean`` so the
    middle of the chirped band sits at Omega = 0. Photonic crystal: layer
    ``tuned_layer`` is phase matched at Omega = 0.
    """
    if structure.kind == APERIODIC:
        return coeffs.delta_beta0 - math.pi / (structure.total_length / structure.N)
    return coeffs.delta_beta0 + (tuned_layer - 1) * structure.alpha * structure.base_length


def phase_mismatch_profile(structure, coeffs, omega, qpm_offset, quadratic=True):
    """Per-layer phase mismatch (rad/um) at detuning ``omega``.

    Aperiodic layers share ``delta_beta0 - qpm_offset + D*Omega + B*Omega**2``;
    the photonic crystal adds ``alpha*(m-1)*l`` in layer m.

    Returns shape ``(N,)`` for scalar ``omega`` and ``(len(omega), N)``
    otherwise.
    """
    if structure.N == 0:
        raise DomainError("empty structure")
    base = coeffs.delta_beta(omega, quadratic=quadratic) - qpm_offset
    ramp = np.zeros(structure.N)
    if structure.kind == PHOTONIC_CRYSTAL:
        ramp = structure.alpha * np.arange(structure.N) * structure.base_length
    return np.add.outer(base, ramp)


def detuning_from_signal_wavelength(wavelength_signal, wavelength_pump):
    """``Omega = 2*pi*c/lambda_s - omega_p/2`` in rad/fs."""
    return omega_from_wavelength(wavelength_signal) - 0.5 * omega_from_wavelength(wavelength_pump)


def signal_wavelength_from_detuning(omega, wavelength_pump):
    return wavelength_from_omega(0.5 * omega_from_wavelength(wavelength_pump) + np.asarray(omega))
