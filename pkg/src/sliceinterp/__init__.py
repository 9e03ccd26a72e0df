"""Registration-based interpolation of missing slices between grayscale images.

The package estimates a dense displacement field between two slices by
symmetric curvature-regularized registration and synthesizes in-between
slices by blending the two half-warped inputs; linear and single-direction
baselines plus an 8-bit-scale MSD metric support side-by-side evaluation.
"""

from .fieldio import GridFormatError, load_df2, load_rf32, save_df2, save_rf32
from .image import (
    Image2D,
    PgmDecodeError,
    gradient,
    load_pgm,
    msd,
    sample_bilinear,
    save_pgm,
    ssd,
    warp,
)
from .interpolation import (
    PhantomSpec,
    generate_phantom_pair,
    interpolate_at_ratio,
    interpolate_midpoint,
    interpolate_single_direction,
    interpolate_stack,
    linear_interpolate,
    render_phantom,
)
from .registration import (
    DisplacementField,
    DivergenceError,
    RegistrationConfig,
    RegistrationResult,
    energy,
    force_symmetric,
    register_single_direction,
    register_symmetric,
    smoothness_energy,
)
from .solver import (
    CurvatureSolver,
    biharmonic,
    build_solver,
    laplacian,
    mirrored_laplacian_eigenvalues,
    solve_semi_implicit,
)

__version__ = "0.1.0"

__all__ = [
    "CurvatureSolver",
    "DisplacementField",
    "DivergenceError",
    "GridFormatError",
    "Image2D",
    "PgmDecodeError",
    "PhantomSpec",
    "RegistrationConfig",
    "RegistrationResult",
    "biharmonic",
    "build_solver",
    "energy",
    "force_symmetric",
    "generate_phantom_pair",
    "gradient",
    "interpolate_at_ratio",
    "interpolate_midpoint",
    "interpolate_single_direction",
    "interpolate_stack",
    "linear_interpolate",
    "load_df2",
    "load_pgm",
    "load_rf32",
    "mirrored_laplacian_eigenvalues",
    "msd",
    "register_single_direction",
    "register_symmetric",
    "render_phantom",
    "sample_bilinear",
    "save_df2",
    "save_pgm",
    "save_rf32",
    "smoothness_energy",
    "solve_semi_implicit",
    "ssd",
    "warp",
]
