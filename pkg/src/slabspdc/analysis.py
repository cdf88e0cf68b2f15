"""Diagnostics over computed spectra."""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .errors import DomainError, GridMismatch, GridTooCoarse, IndexOutOfRange
from .spectrum import _branch_roots, local_branch
from .structures import PHOTONIC_CRYSTAL

#: Exponent of the Gaussian ``exp(-gamma x^2)`` standing in for sinc(x).
GAMMA = 0.189


def parity_allowed(channel):
    """True when an even number of the three modes are odd."""
    return sum(mu % 2 for mu in channel.modes) % 2 == 0


def qpm_layer_tuning(l, alpha, n, N=None):
    """Degenerate phase mismatch that quasi-phase-matches layer ``n``.

    Returns ``pi/l + (n-1)*alpha*l`` in rad/um.
    """
    if not l > 0:
        raise DomainError("layer length must be positive")
    if n < 1 or (N is not None and n > N):
        raise IndexOutOfRange(f"layer {n} outside 1..{N}")
    return math.pi / l + (n - 1) * alpha * l


def discreteness_criterion(alpha, l, margin=3.0):
    """Whether a chirped photonic crystal resolves one peak per layer.

    The ratio ``|alpha| l^2 sqrt(gamma) / 4`` compares peak spacing with the
    sinc width; the spectrum counts as discrete when it reaches ``margin``.

    Returns
    -------
    (bool, float)
    """
    if not l > 0:
        raise DomainError("layer length must be positive")
    if margin < 1:
        raise DomainError("margin below 1 cannot express a strong inequality")
    ratio = abs(alpha) * l * l * math.sqrt(GAMMA) / 4.0
    return ratio >= margin, ratio


@dataclass
class Peak:
    omega: float
    height: float
    width: float


@dataclass
class PeakReport:
    peaks: list
    count: int
    discrete: bool
    criterion_ratio: float
    predicted: list = field(default_factory=list)
    spacing_kernel: float = math.nan
    spacing_half: float = math.nan

    def to_dict(self):
        return asdict(self)


def _width_at(y, x, i, level):
    """Full width where ``y`` stays above ``level`` around index ``i``."""
    def crossing(step):
        j = i
        while 0 <= j + step < len(y) and y[j + step] >= level:
            j += step
        k = j + step
        if not 0 <= k < len(y):
            return x[j]
        frac = (y[j] - level) / (y[j] - y[k])
        return x[j] + frac * (x[k] - x[j])

    return float(crossing(1) - crossing(-1))


def predicted_peaks(result):
    """Detunings where a layer is phase matched, on the result's local branch.

    Photonic crystal: ``db_m(Omega) = 0``. Aperiodic: ``db(Omega) = pi/l_m``
    (first-order QPM of layer m). Entries are None when unreachable.
    """
    st, coeffs = result.structure, result.coeffs
    if st.kind == PHOTONIC_CRYSTAL:
        ramp = st.alpha * st.base_length * np.arange(st.N)
        targets = -ramp
    else:
        targets = math.pi / st.lengths
    lo, hi = local_branch(coeffs, result.quadratic)
    out = []
    for t in targets:
        roots = [r for r in _branch_roots(coeffs, result.qpm_offset, float(t), result.quadratic)
                 if lo <= r <= hi]
        out.append(min(roots, key=abs) if roots else None)
    return out


def _narrowest_lobe(result):
    """Main-lobe width (rad/fs) of the longest layer at the steepest point."""
    slope = np.abs(np.gradient(result.coeffs.delta_beta(result.omega, result.quadratic),
                               result.omega)).max()
    if slope == 0:
        return math.inf
    return 4.0 * math.pi / (result.structure.lengths.max() * slope)


def detect_peaks(result, prominence=0.1, margin=3.0):
    """Find the spectral peaks of ``result``.

    A peak is a local maximum of ``|Phi|^2`` whose height and topographic
    prominence both reach ``prominence * max``. Widths are full widths at
    1/e of each peak height.

    Raises
    ------
    GridTooCoarse
        If fewer than 5 grid samples span the narrowest single-layer lobe.
    """
    omega = result.omega
    y = result.abs2
    if len(omega) > 1 and _narrowest_lobe(result) < 4 * (omega[1] - omega[0]):
        raise GridTooCoarse("fewer than 5 samples across the narrowest sinc lobe")

    st = result.structure
    if st.kind == PHOTONIC_CRYSTAL:
        discrete, ratio = discreteness_criterion(st.alpha, st.base_length, margin)
        slope = abs(float(result.coeffs.D))
        al = abs(st.alpha) * st.base_length
        spacing = (al / slope, al / (2 * slope)) if slope else (math.inf, math.inf)
    else:
        discrete, ratio, spacing = False, math.nan, (math.nan, math.nan)

    peaks = []
    top = float(y.max()) if y.size else 0.0
    if top > 0:
        thr = prominence * top
        idx, _ = find_peaks(y, height=thr, prominence=thr)
        for i in idx:
            peaks.append(Peak(float(omega[i]), float(y[i]),
                              _width_at(y, omega, i, y[i] / math.e)))
    return PeakReport(peaks, len(peaks), discrete, ratio, predicted_peaks(result),
                      spacing[0], spacing[1])


@dataclass
class EntanglementReport:
    overlap_interval: tuple
    overlap_metric: float
    channel_a: object
    channel_b: object
    intervals: list = field(default_factory=list)
    overlap_measure: float = 0.0

    def to_dict(self):
        return {
            "overlap_interval": self.overlap_interval,
            "overlap_metric": self.overlap_metric,
            "channel_a": list(self.channel_a.modes),
            "channel_b": list(self.channel_b.modes),
            "intervals": self.intervals,
            "overlap_measure": self.overlap_measure,
        }


def _runs(mask):
    """(start, stop) index pairs of the True runs in ``mask``, stop inclusive."""
    edges = np.diff(np.concatenate(([0], mask.astype(int), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    return list(zip(starts, stops))


def entanglement_overlap(a, b, threshold=0.1):
    """Spectral coexistence of two channels on a common grid.

    ``overlap_metric`` is ``int |Phi_a||Phi_b| / sqrt(int |Phi_a|^2 int |Phi_b|^2)``
    (trapezoid rule), so it lies in [0, 1] and is 1 exactly when the two
    moduli are proportional. ``overlap_interval`` is the widest contiguous
    detuning range where both ``|Phi|^2`` exceed ``threshold`` of their own
    maximum; every such range is listed in ``intervals``.
    """
    if a.omega.shape != b.omega.shape or not np.array_equal(a.omega, b.omega):
        raise GridMismatch("spectra are sampled on different grids")
    x = a.omega
    fa, fb = np.abs(a.amplitude), np.abs(b.amplitude)
    na = np.trapezoid(fa * fa, x)
    nb = np.trapezoid(fb * fb, x)
    metric = 0.0
    if na > 0 and nb > 0:
        metric = float(np.clip(np.trapezoid(fa * fb, x) / math.sqrt(na * nb), 0.0, 1.0))

    ya, yb = fa * fa, fb * fb
    both = np.zeros(x.shape, bool)
    if ya.max() > 0 and yb.max() > 0:
        both = (ya >= threshold * ya.max()) & (yb >= threshold * yb.max())
    intervals = [(float(x[i]), float(x[j])) for i, j in _runs(both)]
    widest = max(intervals, key=lambda iv: iv[1] - iv[0]) if intervals else None
    measure = float(sum(hi - lo for lo, hi in intervals))
    return EntanglementReport(widest, metric, a.channel, b.channel, intervals, measure)
