"""Controlled invariant convex sets for linear systems, via support functions.

The library synthesizes a convex set S and certifies that the system
x' = Ax + Bu can be kept inside S: for every boundary direction the drift
can be cancelled by some input. Template families (ellipsoids, sublevel
sets of even SOS-convex forms, piecewise quadratics on a cone partition)
are compiled to conic programs, solved with a deterministic first-order
method, and the returned certificate is re-verified by sampling.

Entry points: :func:`solve` on a :class:`SynthesisProblem`, or the
scikit-learn style :class:`InvariantSetEstimator`.
"""

from ._version import __version__
from .conic import ConicProgram, Solution, export_sdpa, parse_sdpa, solve_reference
from .estimator import InvariantSetEstimator
from .geometry import Polytope, complement_projection, polytope_D, sphere_partition
from .polynomials import HomogeneousPolynomial, monomial_basis
from .synthesis import (
    BenchmarkEntry,
    OracleReport,
    SynthesisProblem,
    SynthesisResult,
    TemplateSpec,
    benchmark_problem,
    benchmark_specs,
    benchmark_system,
    maximal_polar_contains,
    maximal_set_contains,
    oracle_boundary_check,
    oracle_deficit,
    run_benchmark,
    shadow_boundary,
    solve,
)
from .systems import (
    AlgebraicSystem,
    ControlSystem,
    reduce,
    unit_directions,
    verify_algebraic_invariance,
    verify_controlled_invariance,
)
from .templates import (
    EllipsoidTemplate,
    PiecewiseTemplate,
    PolysetTemplate,
    polar_boundary,
    projection_boundary,
    sampled_midpoint_convexity,
)

__all__ = [
    "__version__",
    "AlgebraicSystem",
    "BenchmarkEntry",
    "ConicProgram",
    "ControlSystem",
    "EllipsoidTemplate",
    "HomogeneousPolynomial",
    "InvariantSetEstimator",
    "OracleReport",
    "PiecewiseTemplate",
    "Polytope",
    "PolysetTemplate",
    "Solution",
    "SynthesisProblem",
    "SynthesisResult",
    "TemplateSpec",
    "benchmark_problem",
    "benchmark_specs",
    "benchmark_system",
    "complement_projection",
    "export_sdpa",
    "maximal_polar_contains",
    "maximal_set_contains",
    "monomial_basis",
    "oracle_boundary_check",
    "oracle_deficit",
    "parse_sdpa",
    "polar_boundary",
    "polytope_D",
    "projection_boundary",
    "reduce",
    "run_benchmark",
    "sampled_midpoint_convexity",
    "shadow_boundary",
    "solve",
    "solve_reference",
    "sphere_partition",
    "unit_directions",
    "verify_algebraic_invariance",
    "verify_controlled_invariance",
]
