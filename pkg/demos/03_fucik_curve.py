"""The first nontrivial curve of the Fucik spectrum.

Run with ``python demos/03_fucik_curve.py``.  Takes about a minute.

For the purely local operator on (0, 1) the curve is known in closed form:
a positive hump of length l carries the eigenvalue (p-1)(pi_p / l)^p, and
the two humps fill the interval.  The string method reproduces it.

For the mixed operator the curve starts at (lambda_2, lambda_2), is
nonincreasing in d and 1-Lipschitz, and approaches the trivial line
beta = lambda_1 only slowly: even the local p = 2 curve satisfies
c / lambda_1 - 1 ~ 2 pi / sqrt(d) for large d, so at d = 50 lambda_1 the
level is still about 35% above lambda_1.
"""

import math

from scipy import optimize

from mixedplap import OperatorParams, ShapeSpec, build_mesh
from mixedplap.eigensolver import solve_first_eigenpair
from mixedplap.fucik import PathOptions, fucik_curve, trivial_lines


def closed_form_c(d, p):
    pi_p = 2 * math.pi / (p * math.sin(math.pi / p))
    lam1 = (p - 1) * pi_p**p

    def hump(lam):
        return pi_p * ((p - 1) / lam) ** (1 / p)

    return optimize.brentq(lambda c: hump(c) + hump(c + d) - 1.0, lam1 * (1 + 1e-12), 1e6 * lam1)


print("local p-Laplacian, p = 2, 128 nodes: string method against the closed form")
params = OperatorParams(N=1, p=2.0, s=0.3, theta=0.32, a_nl=0.0)
mesh = build_mesh(ShapeSpec.interval(0.0, 1.0, 128), params)
first = solve_first_eigenpair(mesh, params)
grid = [0.0, 10.0, 40.0, 50 * first.lam]
curve = fucik_curve(grid, mesh, params, first.phi, first.lam, PathOptions(n_points=17, n_seeds=1))
print(f"{'d':>10} {'c(d)':>12} {'closed form':>12} {'c/lambda1':>10}")
for pt in curve.points:
    print(f"{pt.d:10.3f} {pt.c:12.6f} {closed_form_c(pt.d, 2.0):12.6f} {pt.c / first.lam:10.4f}")

print("\nmixed operator, p = 2.5, s = 0.5, 128 nodes")
params = OperatorParams(N=1, p=2.5, s=0.5, theta=0.5)
mesh = build_mesh(ShapeSpec.interval(0.0, 1.0, 128), params)
first = solve_first_eigenpair(mesh, params)
grid = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50 * first.lam]
curve = fucik_curve(grid, mesh, params, first.phi, first.lam, PathOptions(n_points=17))
print(f"lambda_1 = {first.lam:.6f}")
print(f"{'d':>10} {'alpha':>12} {'beta':>12} {'residual':>10}")
for pt in curve.points:
    print(f"{pt.d:10.3f} {pt.alpha:12.6f} {pt.beta:12.6f} {pt.residual:10.2e}")
print(f"nonincreasing: {curve.monotone};  smallest Lipschitz gap: {min(curve.lipschitz_gaps):.4f}")
vertical, horizontal = trivial_lines(first.lam, grid[-1:])
(a1, b1), (a2, b2) = vertical[0], horizontal[0]
print(f"trivial points at the last d: ({a1:.4f}, {b1:.4f}) and ({a2:.4f}, {b2:.4f})")
print("mirror images (c, d + c) are also in the spectrum:", [f"({a:.2f}, {b:.2f})" for a, b in curve.reflected()[:2]])
