"""Mixed local/nonlocal p-Laplacians with a Hardy potential.

The package discretises the operator ``-Delta_p u + (-Delta_p)^s u - mu |u|^(p-2) u / |x|^(p theta)``
on intervals and planar shapes, computes its first two eigenvalues, the first
nontrivial curve of its Fucik spectrum, and runs shape-optimisation
experiments (Faber-Krahn, Hong-Krahn-Szego, domain monotonicity, nodal
domains).
"""

from .hardy import (
    HardyConstants,
    InadmissibleError,
    OperatorParams,
    classical_hardy_constant,
    fractional_hardy_constant,
    hardy_constants,
    mu_max,
    psi_kernel,
)
from .mesh import Mesh, ShapeSpec, build_mesh, match_volume, restrict_mesh, tail_weight_at

__version__ = "0.1.0"
