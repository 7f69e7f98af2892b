"""Bloch bands, band gaps, topological indices and interface modes of 1D layered
media with real, frequency-dispersive permittivity."""

from .errors import DispersiveError
from .materials import (Layer, Materials, PermittivityModel, Structure, UnitCell, apply_sigma_perturbation,
                        eval_permittivity, sigma_bound, symmetric_pair)
from .spectrum import band_gaps, intersect_gaps, material_gaps, scan_bands
from .xfer import cell_transfer_matrix, discriminant, segment_matrix

__version__ = "0.1.0"

__all__ = [
    "DispersiveError", "Layer", "Materials", "PermittivityModel", "Structure", "UnitCell",
    "apply_sigma_perturbation", "eval_permittivity", "sigma_bound", "symmetric_pair",
    "band_gaps", "intersect_gaps", "material_gaps", "scan_bands",
    "cell_transfer_matrix", "discriminant", "segment_matrix",
]
