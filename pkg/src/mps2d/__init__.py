"""Laplace eigenvalues on smooth planar domains by the method of particular
solutions, with filtered Neumann tensions and certified eigenvalue intervals."""

from .basis import BasisSet, make_fourier_bessel_basis, make_mfs_basis
from .boundary_filter import (BoundaryFunction, apply_multiplier, f_mu,
                              half_wave_weight)
from .geometry import (BoundaryDiscretization, DomainSpec, InteriorQuadrature,
                       area, build_boundary, build_interior, perimeter)
from .scanner import (EigCertificate, ModeGrid, ProblemSpec, ScanResult,
                      SolveRecord, certify, estimate_slope, find_minima,
                      refine_minimum, render_mode, scan, solve_window,
                      tension_at)
from .specfun import (BesselEval, bessel_j, bessel_j_zero, bessel_jprime_zero,
                      bessel_y)
from .tension import (GramPair, TensionResult, assemble_dirichlet,
                      assemble_neumann, min_tension)

__version__ = "0.1.0"

__all__ = [
    "BasisSet", "BesselEval", "BoundaryDiscretization", "BoundaryFunction",
    "DomainSpec", "EigCertificate", "GramPair", "InteriorQuadrature",
    "ModeGrid", "ProblemSpec", "ScanResult", "SolveRecord", "TensionResult",
    "apply_multiplier", "area", "assemble_dirichlet", "assemble_neumann",
    "bessel_j", "bessel_j_zero", "bessel_jprime_zero", "bessel_y",
    "build_boundary", "build_interior", "certify", "estimate_slope", "f_mu",
    "find_minima", "half_wave_weight", "make_fourier_bessel_basis",
    "make_mfs_basis", "min_tension", "perimeter", "refine_minimum",
    "render_mode", "scan", "solve_window", "tension_at",
]
