"""Spontaneous parametric down-conversion in layered planar waveguides."""

from .analysis import (
    detect_peaks,
    discreteness_criterion,
    entanglement_overlap,
    parity_allowed,
    qpm_layer_tuning,
)
from .modes import (
    SlabGeometry,
    dispersion_curve,
    solve_mode,
    taylor_coefficients,
    transcendental_residual,
)
from .spectrum import TriModeChannel, spatial_amplitude, total_spectrum
from .structures import ChirpParameters, build_aperiodic, build_chirped_pc

__version__ = "0.1.0"
