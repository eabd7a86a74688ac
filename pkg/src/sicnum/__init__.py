"""Numerical SIC fiducials, their Clifford symmetries and overlap arithmetic.

The package is layered: :mod:`.wh_group` fixes the displacement operators
and symplectic matrices, :mod:`.clifford` builds the matching unitaries,
:mod:`.fiducial_search` finds fiducial vectors, :mod:`.overlaps` reads
symmetries off their overlap tables, :mod:`.number_theory` handles the
dimension sequences and :mod:`.recognition` turns overlap phases into
integer polynomials.
"""
__version__ = "0.1.0"

from .wh_group import (  # noqa: E402
    DimensionContext,
    DisplacementIndex,
    SymplecticMatrix,
    dprime,
    fa_matrix,
    make_context,
    zauner_matrix,
)
from .clifford import clifford_unitary, covariance_error  # noqa: E402
from .fiducial_search import Fiducial, SearchConfig, SymmetryType, polish, search, sic_residual  # noqa: E402
from .overlaps import OverlapTable, compute_overlaps, overlap_orbit_partition, stability_group  # noqa: E402
from .number_theory import dimension_sequence, dimension_towers, pell_fundamental, sic_discriminant  # noqa: E402
from .recognition import RecognitionConfig, recognize_algebraic, recognize_overlap_phases  # noqa: E402

__all__ = [
    "__version__",
    "DimensionContext",
    "DisplacementIndex",
    "SymplecticMatrix",
    "dprime",
    "fa_matrix",
    "make_context",
    "zauner_matrix",
    "clifford_unitary",
    "covariance_error",
    "Fiducial",
    "SearchConfig",
    "SymmetryType",
    "polish",
    "search",
    "sic_residual",
    "OverlapTable",
    "compute_overlaps",
    "overlap_orbit_partition",
    "stability_group",
    "dimension_sequence",
    "dimension_towers",
    "pell_fundamental",
    "sic_discriminant",
    "RecognitionConfig",
    "recognize_algebraic",
    "recognize_overlap_phases",
]
