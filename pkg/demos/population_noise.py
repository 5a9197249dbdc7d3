"""Steady population profile from nine noisy samples.

-(d(x) P')' = A(x) on [0, 1] with P = 1 at both ends, d = x + 1 and
A = 4x + 1; the exact profile is P = x - x^2 + 1.  We sample P at nine
interior points, optionally perturb the samples by up to 1%, and invert.
"""

import numpy as np
from numpy.polynomial import Polynomial

from collage_mco import (
    DirichletBC,
    Interval,
    NoiseSpec,
    SparsityMode,
    Weights,
    add_noise,
    assemble_collage,
    build_multiresolution_basis,
    interpolate_target,
    sample_solution,
    solve_model1,
)

d_true = Polynomial([1.0, 1.0])
source = Polynomial([1.0, 4.0])
P_true = Polynomial([1.0, 1.0, -1.0])
bc = DirichletBC(1.0, 1.0)

basis = build_multiresolution_basis(Interval(), [11, 23])
clean = sample_solution(P_true, 9, Interval(), bc)

for level in (0.0, 0.01):
    ers = []
    for seed in range(10):
        obs = add_noise(clean, NoiseSpec(level, seed))
        system = assemble_collage(basis, None, interpolate_target(obs), source)
        sol = solve_model1(system, Weights(1, 0, 0), SparsityMode("l1"), basis=basis, k_true=d_true)
        ers.append(sol.criteria.er)
    print(f"noise {level:4.0%}: median ER {np.median(ers):.4f}  (min {min(ers):.4f}, max {max(ers):.4f})")

# nine samples carry little information about d: even without noise the
# collage residual vanishes for diffusivities well away from x + 1
