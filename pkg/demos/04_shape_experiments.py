"""Shape optimisation claims tested on planar lattices.

Run with ``python demos/04_shape_experiments.py [resolution]``.  The default
resolution 32 takes about a minute; 48 matches the acceptance runs.

* Faber-Krahn: among shapes of equal area the disk has the smallest
  lambda_1.  Areas are matched exactly on the lattice by rescaling each
  shape with its cell pattern fixed.
* Domain monotonicity: shrinking the domain raises lambda_1.  Both disks
  share one lattice, so the node sets are nested.
* Hong-Krahn-Szego: lambda_2 of two disjoint unit disks stays above
  lambda_1 of one disk and approaches it as the disks move apart.  For the
  purely local operator the two would be equal; the nonlocal interaction
  between the disks is what keeps the inequality strict.
"""

import math
import sys

from mixedplap import OperatorParams, ShapeSpec, match_volume
from mixedplap.shapelab import domain_monotonicity_check, faber_krahn_experiment, hong_krahn_szego_experiment

res = int(sys.argv[1]) if len(sys.argv) > 1 else 32
params = OperatorParams(N=2, p=2.0, s=0.5, theta=0.5)

print(f"Faber-Krahn at area pi, resolution {res}")
shapes = [match_volume(ShapeSpec.disk((0.0, 0.0), 1.0, res), math.pi),
          match_volume(ShapeSpec.rectangle(-0.5, 0.5, -0.5, 0.5, res), math.pi),
          match_volume(ShapeSpec.rectangle(-1.0, 1.0, -0.5, 0.5, res), math.pi)]
fk = faber_krahn_experiment(math.pi, shapes, params)
for row in fk.rows:
    print(f"  {row['shape']:<50} area {row['volume']:.6f}  lambda_1 {row['lambda1']:.6f}")
v = fk.verdict("ball_minimal")
print(f"  disk smallest: {v.holds} (margin {v.margin:.4f})")

print("\ndomain monotonicity, disk of radius 0.8 inside the unit disk")
print("  (both on the inner disk's lattice, h = 1.6 / resolution, so the outer value differs from the one below)")
mono = domain_monotonicity_check(ShapeSpec.disk((0.0, 0.0), 0.8, res), ShapeSpec.disk((0.0, 0.0), 1.0, res),
                                 params)
print(f"  lambda_1(inner) {mono.lambda_inner:.6f} > lambda_1(outer) {mono.lambda_outer:.6f}: {mono.holds}")

print("\nHong-Krahn-Szego, two unit disks")
hks = hong_krahn_szego_experiment(1.0, [2.5, 4.0, 6.0], params, resolution=res)
ball = hks.rows[0]["lambda1_ball"]
print(f"  lambda_1(one disk) = {ball:.6f}")
for row in hks.rows[1:]:
    print(f"  separation {row['separation']:.3f}: lambda_2 = {row['lambda2']:.6f}"
          f"  (+{100 * row['margin'] / ball:.3f}%)")
for v in hks.verdicts:
    print(f"  {v.name}: {v.holds}")
