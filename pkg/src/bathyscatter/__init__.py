"""Surface water-wave scattering by seabed topography and depth reconstruction.

Submodules
----------
grid        grids, immutable fields, DFT helpers, file formats
dispersion  depth/wavenumber maps and mild-slope diagnostics
forward     Lippmann-Schwinger forward solver
measurement snapshots, noise and amplitude masks
spectral    filtered-Laplacian depth inversion
tikhonov    regularized inversion and singular-value diagnostics
topography  synthetic depth maps
experiment  experiment runner and metrics
cli         command-line entry point
"""
__version__ = "0.1.0"

from .dispersion import (  # noqa: E402
    WaveParams,
    depth_from_wavenumber,
    mild_slope_report,
    truncated_depth,
    wavenumber_from_depth,
)
from .errors import (  # noqa: E402
    BathyError,
    CapacityError,
    ConditioningError,
    ConfigError,
    DomainError,
    FieldFormatError,
    MildSlopeError,
    SolverError,
)
from .forward import build_contrast, hankel_h1_0, simplification_gap, solve_scattering  # noqa: E402
from .grid import ComplexField, DepthMap, Grid, RealField, read_field, write_field  # noqa: E402
from .measurement import add_noise, gamma_mask, recover_complex, snapshot  # noqa: E402
from .spectral import InversionConfig, reconstruct  # noqa: E402
from .tikhonov import build_k_operator, singular_spectrum, tikhonov_solve  # noqa: E402
from .topography import TopographySpec, generate_topography  # noqa: E402
