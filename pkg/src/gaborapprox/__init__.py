"""Gabor-frame analysis with Gaussian coherent states on the sqrt(pi/k) lattice:
closed-form inner products, frame bounds, dual coefficients by Richardson
iteration, the truncated projector Pi_D and weighted Sobolev norms."""

from .dual import (
    RichardsonConfig,
    RichardsonError,
    RichardsonResult,
    dual_coefficients,
    dual_gram_entry,
    dual_primal_overlap,
    dual_state,
    richardson_dual_apply,
)
from .frame import (
    CoefficientMap,
    FrameBounds,
    FrameBoundsConvergenceError,
    analysis,
    analysis_grid,
    estimate_frame_bounds,
    frame_apply,
    synthesis,
)
from .lattice import (
    DimensionError,
    EmptyBallError,
    FrameParams,
    LatticeIndex,
    enumerate_ball,
    index_norm,
    lattice_point,
)
from .mixtures import (
    GaussianMixture,
    GridSpec,
    QuadratureGrid,
    TruncationRiskError,
    default_grid,
    grid_inner_product,
    grid_norm,
    mixture_inner_product,
    sample_to_grid,
)
from .projection import ProjectionSpec, approximation_error, far_field_norm, project
from .sobolev import AliasingWarning, NormSpec, sobolev_norm, sobolev_norm_fourier, weighted_sobolev_norm
from .states import (
    OrderOverflowError,
    derivative_inner_product,
    evaluate_state,
    evaluate_state_derivative,
    fourier_transform_state,
    state_inner_product,
)

__version__ = "0.1.0"

__all__ = [
    "AliasingWarning",
    "CoefficientMap",
    "DimensionError",
    "EmptyBallError",
    "FrameBounds",
    "FrameBoundsConvergenceError",
    "FrameParams",
    "GaussianMixture",
    "GridSpec",
    "LatticeIndex",
    "NormSpec",
    "OrderOverflowError",
    "ProjectionSpec",
    "QuadratureGrid",
    "RichardsonConfig",
    "RichardsonError",
    "RichardsonResult",
    "TruncationRiskError",
    "analysis",
    "analysis_grid",
    "approximation_error",
    "default_grid",
    "derivative_inner_product",
    "dual_coefficients",
    "dual_gram_entry",
    "dual_primal_overlap",
    "dual_state",
    "enumerate_ball",
    "estimate_frame_bounds",
    "evaluate_state",
    "evaluate_state_derivative",
    "far_field_norm",
    "fourier_transform_state",
    "frame_apply",
    "grid_inner_product",
    "grid_norm",
    "index_norm",
    "lattice_point",
    "mixture_inner_product",
    "project",
    "richardson_dual_apply",
    "sample_to_grid",
    "sobolev_norm",
    "sobolev_norm_fourier",
    "state_inner_product",
    "synthesis",
    "weighted_sobolev_norm",
    "__version__",
]
