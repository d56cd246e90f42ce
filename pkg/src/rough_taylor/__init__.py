"""Truncated signatures of piecewise-linear paths, exact and surrogate
p-variation, Taylor approximants of controlled differential equations, and
numerical verification of the factorial-decay remainder estimates."""

from .inequalities import (
    NeoclassicalSample,
    beta_constant,
    gamma_factorial,
    neoclassical_check,
)
from .path_signature import (
    DecayTable,
    PiecewiseLinearPath,
    chen_concat,
    decay_scan,
    level2_symmetry_check,
    signature,
)
from .rde_taylor import (
    CompensatedSum,
    ControlledTuple,
    ProfileResult,
    RemainderResult,
    SolutionSampler,
    SolverConvergenceError,
    bound_check_1var,
    compensated_riemann_sum,
    controlled_tuple,
    point_removal_delta,
    remainder,
    solve_reference,
    taylor_approx,
    theorem1_profile,
    tuple_remainder,
)
from .reports import BoundReport, make_bound_report, write_bound_csv
from .tensor_algebra import (
    TruncatedTensor,
    homogeneous_norm,
    project,
    segment_exp,
    truncated_inverse,
    truncated_mul,
    unit_tensor,
)
from .variation import (
    VariationResult,
    brute_force_pvar,
    control_omega,
    homogeneous_p_variation,
    one_variation,
    p_variation_level1,
)
from .vector_field import (
    Box,
    MultilinearField,
    VectorFieldJet,
    apply_multilinear,
    field_lip1_estimate,
    lip_norm_estimate,
    sup_norm_estimate,
    taylor_coefficient,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # tensor algebra
    "TruncatedTensor", "unit_tensor", "truncated_mul", "truncated_inverse",
    "segment_exp", "homogeneous_norm", "project",
    # paths and signatures
    "PiecewiseLinearPath", "signature", "chen_concat", "decay_scan",
    "DecayTable", "level2_symmetry_check",
    # variation
    "VariationResult", "one_variation", "p_variation_level1",
    "brute_force_pvar", "homogeneous_p_variation", "control_omega",
    # vector fields
    "VectorFieldJet", "MultilinearField", "taylor_coefficient",
    "apply_multilinear", "Box", "sup_norm_estimate", "lip_norm_estimate",
    "field_lip1_estimate",
    # controlled equations
    "SolverConvergenceError", "SolutionSampler", "solve_reference",
    "taylor_approx", "RemainderResult", "remainder", "bound_check_1var",
    "ProfileResult", "theorem1_profile", "ControlledTuple", "controlled_tuple",
    "tuple_remainder", "CompensatedSum", "compensated_riemann_sum",
    "point_removal_delta",
    # scalar inequalities
    "gamma_factorial", "NeoclassicalSample", "neoclassical_check",
    "beta_constant",
    # reports
    "BoundReport", "make_bound_report", "write_bound_csv",
]
