"""Pareto sweep over a simplex grid of weights for the diffusion problem.

Each weight triple gives one Model 1 solution; the nondominated ones in
(CD, -ENT, SP) form the reported front.
"""

import numpy as np
from numpy.polynomial import Polynomial

from collage_mco import Interval, OptimizerSettings, SparsityMode, assemble_collage, build_multiresolution_basis
from collage_mco.assembly import PiecewiseLinearFn
from collage_mco.basis import merge_breakpoints
from collage_mco.config import simplex_grid
from collage_mco.mco import Box, pareto_filter, sweep_solutions

K_true = Polynomial([1.0, 3.0])
basis = build_multiresolution_basis(Interval(), [11, 23])
x = merge_breakpoints(np.linspace(0, 1, 2001), basis.breakpoints())
system = assemble_collage(basis, None, PiecewiseLinearFn(x, x - x * x), Polynomial([-1.0, 12.0]))

grid = simplex_grid(0.25)
sols = sweep_solutions(system, grid, SparsityMode("l1"), Box(), OptimizerSettings(max_iter=500),
                       basis=basis, k_true=K_true, workers=4)
front = pareto_filter(sols)
print(f"{len(front)} of {len(grid)} weight triples are nondominated\n")
print(" eta1  eta2  eta3        CD      ENT  SP       ER")
for s in front:
    w, c = s.params, s.criteria
    print(f"{w.eta1:5.2f} {w.eta2:5.2f} {w.eta3:5.2f}  {c.cd:9.2e}  {c.ent:6.3f}  {c.sp:2d}  {c.er:7.4f}")
