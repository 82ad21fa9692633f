"""First eigenvalue of the Robin p-Laplacian with a potential, and checks of its derivatives."""

from .kernels import BACKEND
from .mesh import (Mesh, MeshError, VectorField, boundary_geometry, dilation, from_callback, from_samples,
                   generate_disk_mesh, generate_ellipse_mesh, generate_mesh, generate_rect_mesh, perturb_mesh,
                   read_mesh, rotation, scale_mesh, stretch_x, surface_integral, translation, volume_integral,
                   write_mesh)
from .model import (DomainRef, EigenResult, Potential, ProblemSpec, SpecError, check_spec, rayleigh_quotient,
                    validate_spec)
from .radial import RadialGrid, bessel_robin_root, radial_lambda1
from .solver import (ConvergenceError, SolverOptions, regularized_energy, solve_dirichlet_first,
                     solve_first_eigenpair, solve_radial_first, weak_residual)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConvergenceError", "DomainRef", "EigenResult", "Mesh", "MeshError", "Potential", "ProblemSpec",
    "RadialGrid", "SolverOptions", "SpecError", "VectorField", "bessel_robin_root", "boundary_geometry",
    "check_spec", "dilation", "from_callback", "from_samples", "generate_disk_mesh", "generate_ellipse_mesh",
    "generate_mesh", "generate_rect_mesh", "perturb_mesh", "radial_lambda1", "rayleigh_quotient", "read_mesh",
    "regularized_energy", "rotation", "scale_mesh", "solve_dirichlet_first", "solve_first_eigenpair",
    "solve_radial_first", "stretch_x", "surface_integral", "translation", "validate_spec", "volume_integral",
    "weak_residual", "write_mesh",
]
