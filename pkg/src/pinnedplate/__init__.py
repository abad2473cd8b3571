"""Flexural waves in thin plates pinned at doubly periodic points.

Bloch dispersion via accelerated lattice sums, analytic Dirac-point
machinery, density of states, and trapped modes of finite pinned clusters.
"""

from .lattice import (Lattice, LatticeFamily, SymmetryPoint, bz_path, reduce,
                      reciprocal_vector, symmetry_points)
from .latsum import (LatticeSums, SumConfig, lattice_sums,
                     spectral_dispersion_sum, sum_RK, sum_RY)
from .green import (PlateMaterial, bloch_ratio, dispersion_value, free_green,
                    quasiperiodic_green)
from .bands import (BandPoint, BandRoot, BandSurface, IsoContour, band_diagram,
                    band_roots, band_surface, classify_band, dos_numeric,
                    isofrequency)
from .lightlines import (ConeExpansion, DegeneracyLine, DiracPoint,
                         TripleIntersection, analytic_dos, cone_fit,
                         degeneracy_line, enumerate_triples, light_line_k,
                         lines_through_point, proportionate_distortions,
                         triangular_dirac_point, triple_intersection)
from .cluster import (ClusterGeometry, ClusterSolution, build_cluster,
                      direction_degrees, field_map, localization_metric,
                      solve_cluster)
from .specfun import BesselKind, bessel, hankel1_0

__version__ = "0.1.0"

__all__ = [
    "Lattice", "LatticeFamily", "SymmetryPoint", "bz_path", "reduce",
    "reciprocal_vector", "symmetry_points",
    "LatticeSums", "SumConfig", "lattice_sums", "spectral_dispersion_sum",
    "sum_RK", "sum_RY",
    "PlateMaterial", "bloch_ratio", "dispersion_value", "free_green",
    "quasiperiodic_green",
    "BandPoint", "BandRoot", "BandSurface", "IsoContour", "band_diagram",
    "band_roots", "band_surface", "classify_band", "dos_numeric", "isofrequency",
    "ConeExpansion", "DegeneracyLine", "DiracPoint", "TripleIntersection",
    "analytic_dos", "cone_fit", "degeneracy_line", "enumerate_triples",
    "light_line_k", "lines_through_point", "proportionate_distortions",
    "triangular_dirac_point", "triple_intersection",
    "ClusterGeometry", "ClusterSolution", "build_cluster", "direction_degrees",
    "field_map", "localization_metric", "solve_cluster",
    "BesselKind", "bessel", "hankel1_0",
]
