"""Spectral toolkit for free-boundary triple-junction (Y) surfaces in the unit ball.

Subpackage map:

* ``ycone.geometry``  -- canonical surfaces, frames, curvatures, structure checks
* ``ycone.mesh``      -- structured polar meshes of the face domains, junction bookkeeping
* ``ycone.assembly``  -- second-variation quadratic forms and constrained reduction
* ``ycone.spectra``   -- Morse index / nullity by bulk inertia and Dirichlet-to-Neumann routes
* ``ycone.hopf``      -- minimality certificate for sampled immersions (H(z) = z^4 h(z))
* ``ycone.cli``       -- batch command line front end
"""

from ycone.geometry import canonical_surface, evaluate_frame, boundary_frame, check_y_structure
from ycone.mesh import mesh_face, build_ymesh, refine
from ycone.assembly import assemble_forms, constraint_basis, reduce_pencil, apply_form
from ycone.spectra import inertia_count, low_spectrum, classify, steklov_face, dtn_index
from ycone.hopf import sample_immersion, derivative_grids, certificate_residuals, hopf_field

__all__ = [
    "canonical_surface", "evaluate_frame", "boundary_frame", "check_y_structure",
    "mesh_face", "build_ymesh", "refine",
    "assemble_forms", "constraint_basis", "reduce_pencil", "apply_form",
    "inertia_count", "low_spectrum", "classify", "steklov_face", "dtn_index",
    "sample_immersion", "derivative_grids", "certificate_residuals", "hopf_field",
]

__version__ = "0.1.0"
