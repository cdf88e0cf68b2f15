"""Run configuration: a versioned JSON document with unit-suffixed keys.

Example::

    {
      "schema_version": 1,
      "geometry": {"H_um": 1.0, "n_c": 3.6, "n_cl": 3.5},
      "pump": {"wavelength_um": 0.775},
      "structure": {"kind": "aperiodic", "N": 100, "total_length_um": 12000,
                    "varsigma_um": 0.25},
      "channels": [[1, 0, 1], [1, 1, 0]],
      "grid": {"n_points": 2001},
      "analyses": {"peaks": true, "entanglement": true, "discreteness": true}
    }
"""

import copy
import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError

SCHEMA_VERSION = 1

_GEOMETRY_KEYS = {"H_um", "n_c", "n_cl", "L_y_um"}
_APERIODIC_KEYS = {"kind", "N", "l0_um", "total_length_um", "varsigma_um"}
_PC_KEYS = {"kind", "N", "l_um", "total_length_um", "alpha_rad_per_um2", "varsigma_p_per_um",
            "varsigma_s_per_um", "varsigma_i_per_um", "tuned_layer"}
_GRID_KEYS = {"n_points", "omega_min_rad_per_fs", "omega_max_rad_per_fs", "lambda_s_min_um",
              "lambda_s_max_um"}
_ANALYSIS_KEYS = {"peaks", "entanglement", "discreteness", "margin", "threshold", "prominence"}
_MODES_KEYS = {"mu", "lambda_min_um", "lambda_max_um", "n_samples"}
_TOP_KEYS = {"schema_version", "geometry", "pump", "structure", "channels", "grid", "analyses",
             "modes", "expansion", "qpm_offset_rad_per_um", "normalize", "sweep"}

SWEEP_PARAMETERS = {
    "varsigma": ("structure", "varsigma_um"),
    "alpha": ("structure", "alpha_rad_per_um2"),
    "l": ("structure", "l_um"),
    "l0": ("structure", "l0_um"),
    "N": ("structure", "N"),
    "H": ("geometry", "H_um"),
    "n": ("structure", "tuned_layer"),
}


def _check_keys(section, allowed, where):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(section) - allowed
    if extra:
        raise ConfigError(f"unknown keys in {where}: {sorted(extra)}")


def _number(section, key, where, positive=False, required=True):
    if key not in section:
        if required:
            raise ConfigError(f"{where}.{key} is required")
        return None
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}.{key} must be a finite number")
    if positive and not value > 0:
        raise ConfigError(f"{where}.{key} must be positive")
    return value


def _integer(section, key, where, minimum=None, required=True):
    if key not in section:
        if required:
            raise ConfigError(f"{where}.{key} is required")
        return None
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key} must be an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}.{key} must be >= {minimum}")
    return value


@dataclass
class RunConfig:
    """Validated run configuration.

    The original document is kept verbatim in ``raw``; :meth:`to_dict`
    returns a deep copy suitable for echoing into outputs.
    """

    raw: dict = field(repr=False)

    @classmethod
    def from_dict(cls, doc):
        doc = copy.deepcopy(doc)
        _check_keys(doc, _TOP_KEYS, "config")
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")

        geo = doc.get("geometry")
        if geo is None:
            raise ConfigError("geometry is required")
        _check_keys(geo, _GEOMETRY_KEYS, "geometry")
        _number(geo, "H_um", "geometry", positive=True)
        n_c = _number(geo, "n_c", "geometry", positive=True)
        n_cl = _number(geo, "n_cl", "geometry", positive=True)
        _number(geo, "L_y_um", "geometry", positive=True, required=False)
        if not n_c > n_cl:
            raise ConfigError("geometry.n_c must exceed geometry.n_cl")

        if "modes" in doc:
            m = doc["modes"]
            _check_keys(m, _MODES_KEYS, "modes")
            mus = m.get("mu", [0, 1])
            if not isinstance(mus, list) or not mus or not all(
                    isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in mus):
                raise ConfigError("modes.mu must be a non-empty list of non-negative integers")
            lo = _number(m, "lambda_min_um", "modes", positive=True)
            hi = _number(m, "lambda_max_um", "modes", positive=True)
            if not lo < hi:
                raise ConfigError("modes.lambda_min_um must be below lambda_max_um")
            _integer(m, "n_samples", "modes", minimum=2, required=False)

        if "structure" in doc:
            cls._validate_structure(doc)
        return cls(doc)

    @staticmethod
    def _validate_structure(doc):
        pump = doc.get("pump")
        if not isinstance(pump, dict):
            raise ConfigError("pump is required with a structure")
        _check_keys(pump, {"wavelength_um"}, "pump")
        _number(pump, "wavelength_um", "pump", positive=True)

        st = doc["structure"]
        if not isinstance(st, dict) or st.get("kind") not in ("aperiodic", "photonic_crystal"):
            raise ConfigError("structure.kind must be 'aperiodic' or 'photonic_crystal'")
        N = _integer(st, "N", "structure", minimum=1)
        if st["kind"] == "aperiodic":
            _check_keys(st, _APERIODIC_KEYS, "structure")
            if ("l0_um" in st) == ("total_length_um" in st):
                raise ConfigError("structure needs exactly one of l0_um and total_length_um")
            _number(st, "l0_um", "structure", positive=True, required=False)
            _number(st, "total_length_um", "structure", positive=True, required=False)
            _number(st, "varsigma_um", "structure", required=False)
        else:
            _check_keys(st, _PC_KEYS, "structure")
            if ("l_um" in st) == ("total_length_um" in st):
                raise ConfigError("structure needs exactly one of l_um and total_length_um")
            _number(st, "l_um", "structure", positive=True, required=False)
            _number(st, "total_length_um", "structure", positive=True, required=False)
            has_alpha = "alpha_rad_per_um2" in st
            slopes = [k for k in ("varsigma_p_per_um", "varsigma_s_per_um", "varsigma_i_per_um")
                      if k in st]
            if has_alpha and slopes:
                raise ConfigError("give either alpha_rad_per_um2 or index slopes, not both")
            _number(st, "alpha_rad_per_um2", "structure", required=False)
            for k in slopes:
                _number(st, k, "structure")
            n = _integer(st, "tuned_layer", "structure", minimum=1, required=False)
            if n is not None and n > N:
                raise ConfigError("structure.tuned_layer exceeds N")

        channels = doc.get("channels")
        if not isinstance(channels, list) or not channels:
            raise ConfigError("channels must be a non-empty list of [mu_p, mu_s, mu_i]")
        for ch in channels:
            if (not isinstance(ch, list) or len(ch) != 3 or not all(
                    isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in ch)):
                raise ConfigError(f"bad channel {ch!r}")

        grid = doc.get("grid", {})
        _check_keys(grid, _GRID_KEYS, "grid")
        _integer(grid, "n_points", "grid", minimum=2, required=False)
        om = [k for k in ("omega_min_rad_per_fs", "omega_max_rad_per_fs") if k in grid]
        lam = [k for k in ("lambda_s_min_um", "lambda_s_max_um") if k in grid]
        if om and lam:
            raise ConfigError("grid takes either an omega range or a lambda_s range")
        if len(om) == 1 or len(lam) == 1:
            raise ConfigError("grid ranges need both bounds")
        for k in om:
            _number(grid, k, "grid")
        for k in lam:
            _number(grid, k, "grid", positive=True)
        if om and not grid["omega_min_rad_per_fs"] < grid["omega_max_rad_per_fs"]:
            raise ConfigError("grid omega bounds are not increasing")
        if lam and not grid["lambda_s_min_um"] < grid["lambda_s_max_um"]:
            raise ConfigError("grid lambda_s bounds are not increasing")

        an = doc.get("analyses", {})
        _check_keys(an, _ANALYSIS_KEYS, "analyses")
        for k in ("peaks", "entanglement", "discreteness"):
            if k in an and not isinstance(an[k], bool):
                raise ConfigError(f"analyses.{k} must be true or false")
        if _number(an, "margin", "analyses", required=False) is not None and an["margin"] < 1:
            raise ConfigError("analyses.margin must be >= 1")
        for k in ("threshold", "prominence"):
            v = _number(an, k, "analyses", required=False)
            if v is not None and not 0 < v <= 1:
                raise ConfigError(f"analyses.{k} must lie in (0, 1]")

        if doc.get("expansion", "quadratic") not in ("quadratic", "linear"):
            raise ConfigError("expansion must be 'quadratic' or 'linear'")
        _number(doc, "qpm_offset_rad_per_um", "config", required=False)
        if not isinstance(doc.get("normalize", False), bool):
            raise ConfigError("normalize must be true or false")
        if "sweep" in doc:
            sw = doc["sweep"]
            _check_keys(sw, {"parameter", "values"}, "sweep")
            if sw.get("parameter") not in SWEEP_PARAMETERS:
                raise ConfigError(f"sweep.parameter must be one of {sorted(SWEEP_PARAMETERS)}")
            if not isinstance(sw.get("values"), list) or not sw["values"]:
                raise ConfigError("sweep.values must be a non-empty list")

    # convenience accessors

    @property
    def geometry(self):
        return self.raw["geometry"]

    @property
    def structure(self):
        return self.raw.get("structure")

    @property
    def analyses(self):
        return self.raw.get("analyses", {})

    def to_dict(self):
        return copy.deepcopy(self.raw)

    def to_json(self):
        """Canonical serialization used for the config echo."""
        return json.dumps(self.raw, indent=2, sort_keys=True) + "\n"

    def with_value(self, parameter, value):
        """Copy with one sweep parameter replaced."""
        section, key = SWEEP_PARAMETERS[parameter]
        doc = self.to_dict()
        doc.pop("sweep", None)
        target = doc.setdefault(section, {})
        target[key] = value
        if parameter == "l":
            target.pop("total_length_um", None)
        elif parameter == "l0":
            target.pop("total_length_um", None)
        elif parameter == "alpha":
            for k in ("varsigma_p_per_um", "varsigma_s_per_um", "varsigma_i_per_um"):
                target.pop(k, None)
        return RunConfig.from_dict(doc)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.from_dict(doc)
