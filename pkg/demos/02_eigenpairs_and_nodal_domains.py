"""First and second eigenpairs of the mixed operator, and their nodal domains.

Run with ``python demos/02_eigenpairs_and_nodal_domains.py``.  Takes well
under a minute.

The first eigenvalue is the minimum of the Rayleigh quotient on the unit
L^p sphere; the minimiser is positive and does not depend on the starting
field.  The second eigenvalue is the mountain-pass level between -phi_1
and phi_1.  Its eigenfunction changes sign, and each of its two nodal
domains has a first eigenvalue strictly below lambda_2.

The 2-D example puts the Hardy singularity at a corner of a rectangle,
which is the punctured regime: the inequality constants are available even
though p > N.
"""

from dataclasses import replace

import numpy as np

from mixedplap import OperatorParams, ShapeSpec, build_mesh, energy, hardy_constants
from mixedplap.eigensolver import SolveOptions, nodal_domains, solve_first_eigenpair, solve_second_eigenvalue
from mixedplap.fucik import PathOptions
from mixedplap.shapelab import nodal_domain_bound_check


def report(label, mesh, params):
    print(f"\n== {label}: {mesh.n_nodes} nodes, p={params.p}, s={params.s}, mu={params.mu:.4f}")
    runs = [solve_first_eigenpair(mesh, params, SolveOptions(seed=k)) for k in range(5)]
    lams = np.array([r.lam for r in runs])
    spread = max(energy.lp_norm(r.phi - runs[0].phi, mesh) for r in runs)
    first = runs[0]
    b = first.breakdown
    print(f"lambda_1 = {first.lam:.8f}  ({first.iterations} iterations, {first.status})")
    print(f"  energy split: local {b.local:.4f} + nonlocal {b.nonlocal_:.4f} - mu * hardy {params.mu * b.hardy:.4f}")
    print(f"  5 random starts: lambda spread {np.ptp(lams):.1e}, eigenfunction spread {spread:.1e}")
    print(f"  min phi_1 = {first.min_value:.4g} (positive)")

    sec = solve_second_eigenvalue(mesh, params, path_opts=PathOptions(n_points=17, n_seeds=1), first=first)
    nd = nodal_domains(sec.psi, mesh)
    print(f"lambda_2 = {sec.lam:.8f}  margin over lambda_1 {sec.margin:.4f}")
    print(f"  nodal domains: {nd.n_pos} positive, {nd.n_neg} negative")
    bound = nodal_domain_bound_check(sec.lam, sec.psi, mesh, params, residual=sec.residual)
    print(f"  lambda_1 of the nodal domains: {bound.lambda_pos:.6f}, {bound.lambda_neg:.6f}"
          f"  -> lambda_2 exceeds both by {bound.margin:.4f}")


params = OperatorParams(N=1, p=2.5, s=0.5, theta=0.5)
report("interval (0, 1)", build_mesh(ShapeSpec.interval(0.0, 1.0, 128), params), params)

base = OperatorParams(N=2, p=2.5, s=0.5, theta=0.6)
spec = ShapeSpec.rectangle(0.0, 1.5, 0.0, 1.0, 24)
mesh = build_mesh(spec, base)
consts = hardy_constants(base, mesh.origin_status)
print(f"\nrectangle with the origin at a corner: regime '{consts.regime}', mu_max = {consts.mu_max:.4f}")
params = replace(base, mu=0.5 * consts.mu_max)
report("rectangle [0,1.5] x [0,1], half the admissible mu", build_mesh(spec, params), params)
