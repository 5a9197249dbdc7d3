"""Collage-distance parameter identification for 1D steady diffusion with
entropy and sparsity as additional criteria."""

from .assembly import (
    CollageSystem,
    DirichletBC,
    PiecewiseLinearFn,
    assemble_collage,
    coercivity_lower_bound,
    collage_distance,
    collage_distance_sq,
    error_bound,
    integrate,
    norm_constant,
    solve_forward,
)
from .basis import HatBasis, HatFunction, Interval, build_multiresolution_basis
from .criteria import (
    CriteriaValues,
    SparsityMode,
    entropy,
    evaluate_criteria,
    l2_error,
    neg_entropy_smooth,
    sparsity,
    sparsity_smooth_grad,
)
from .data import NoiseSpec, ObservationSet, add_noise, interpolate_target, load_observations, \
    sample_solution, save_observations
from .mco import (
    Box,
    EpsilonBounds,
    Goals,
    OptimizerSettings,
    Solution,
    Weights,
    dominates,
    optimize,
    pareto_sweep,
    solve_model1,
    solve_model2,
    solve_model3,
)

__version__ = "0.1.0"
