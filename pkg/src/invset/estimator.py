"""Scikit-learn style front door for invariant-set synthesis.

InvariantSetEstimator wraps problem construction, solving, and verification
behind the familiar fit/predict pair: hyperparameters (template family,
degree or grid, solver overrides) go to the constructor, the system matrices
go to fit, and predict answers planar membership queries against the
synthesized projection. get_params/set_params come from BaseEstimator, so
the class drops into pipelines and grid searches unchanged.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .geometry import Polytope, polytope_D
from .synthesis import SynthesisProblem, TemplateSpec, solve
from .systems import ControlSystem
from .validation import as_float_matrix


class InvariantSetEstimator(BaseEstimator):
    """Synthesize a controlled invariant set and query its planar shadow.

    Parameters mirror the synthesis problem: template selects the family
    ("ellipsoid", "polyset", "piecewise", or the reduction-free "baseline"),
    degree applies to polysets, m1/m2 to the piecewise grid. box is a list of
    per-axis (lo, hi) pairs, symmetric about the origin (default: unit box).
    D_vertices are the planar polytope vertices to cover (default: the
    built-in quadrilateral). projection gives the two 0-based state indices
    of the plane. backend is an optional callable mapping a ConicProgram to
    a Solution; eps/max_iter override the reference-solver defaults.

    After fit: gamma_ is the certified scaling, template_ the support
    template, result_ the full SynthesisResult with verification reports.
    """

    def __init__(self, template: str = "ellipsoid", degree: int | None = None,
                 m1: int | None = None, m2: int | None = None,
                 box=None, D_vertices=None, projection=(0, 1),
                 backend=None, eps: float | None = None,
                 max_iter: int | None = None):
        self.template = template
        self.degree = degree
        self.m1 = m1
        self.m2 = m2
        self.box = box
        self.D_vertices = D_vertices
        self.projection = projection
        self.backend = backend
        self.eps = eps
        self.max_iter = max_iter

    def fit(self, A, B, y=None):
        """Synthesize the set for the system x' = Ax + Bu. y is ignored."""
        A = as_float_matrix(A, "A")
        system = ControlSystem(A, B)
        spec = TemplateSpec(self.template, degree=self.degree,
                            m1=self.m1, m2=self.m2)
        polytope = None
        if self.D_vertices is not None:
            polytope = Polytope([np.asarray(v, dtype=float)
                                 for v in self.D_vertices])
        else:
            polytope = polytope_D()
        problem = SynthesisProblem(system, spec, safe_box=self.box,
                                   inner_polytope=polytope,
                                   projection_dims=tuple(self.projection))
        options = {}
        if self.eps is not None:
            options["eps"] = float(self.eps)
        if self.max_iter is not None:
            options["max_iter"] = int(self.max_iter)
        result = solve(problem, backend=self.backend, options=options or None)
        self.problem_ = problem
        self.result_ = result
        self.gamma_ = result.gamma
        self.template_ = result.template
        self.n_features_in_ = A.shape[0]
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("this estimator is not fitted yet; call fit")
        if self.template_ is None:
            raise NotFittedError("fit produced no template (solver reported "
                                 f"{self.result_.status})")

    def decision_function(self, points, num_directions: int = 720) -> np.ndarray:
        """Signed planar membership margin, negative inside the shadow.

        The shadow is a convex projection, so membership reduces to support
        comparisons: the returned value is the largest violation of
        <x, u> <= h(lift(u)) over an even grid of planar directions u.
        """
        self._check_fitted()
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != 2:
            raise ValueError(f"expected planar points, got shape {pts.shape}")
        theta = 2.0 * np.pi * np.arange(num_directions) / num_directions
        U = np.column_stack([np.cos(theta), np.sin(theta)])
        n = self.problem_.system.dimension
        lift = np.zeros((num_directions, n))
        lift[:, list(self.problem_.projection_dims)] = U
        support = np.array([self.template_.support(row) for row in lift])
        return (pts @ U.T - support).max(axis=1)

    def predict(self, points) -> np.ndarray:
        """Boolean membership of planar points in the synthesized shadow."""
        return self.decision_function(points) <= 1e-9

    def score(self, X=None, y=None) -> float:
        """The certified gamma (larger is better), for search compatibility."""
        self._check_fitted()
        return float(self.gamma_)
