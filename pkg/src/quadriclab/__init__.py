"""quadriclab: numerical geometry of Gauss maps into the complex hyperquadric.

The package builds Gauss maps of hypersurfaces of the unit sphere as
Lagrangian immersions into the complex hyperquadric (represented through
Stiefel lifts), extracts their angle functions, and verifies the structural
identities relating angles, the cubic form, the induced connection and the
curvature, including the rotational-hypersurface profile flow.
"""

from .quadric import (
    GeometryError,
    HorizontalVector,
    StiefelPoint,
    StructureGauge,
    apply_conjugation_structure,
    quadric_curvature,
    quadric_distance,
    quadric_residual,
    ricci_matrix,
    rotate_structure,
)
from .hypersurfaces import (
    Box,
    ChartError,
    FocalRadiusError,
    HypersurfaceChart,
    ShapeSpectrum,
    cartan_tube,
    parallel_hypersurface,
    perturbed_sphere,
    principal_curvatures,
    product_spheres,
    round_sphere,
    shape_operator,
)
from .gaussmap import (
    AngleSpectrum,
    FdSteps,
    FundamentalForm,
    GaussJet,
    GaussMapError,
    angle_spectrum,
    gauge_normalize,
    gauss_map,
    mean_curvature,
    palmer_residual,
    second_fundamental_form,
    structure_operators,
)
from .verify import (
    ConnectionData,
    GaugePolicy,
    ResidualReport,
    VerifyError,
    check_csc_identities,
    check_prop1,
    classify_by_angles,
    codazzi_residual,
    connection_and_s,
    gauss_equation_residual,
    reconstruct_hypersurface,
    sectional_curvature,
)
from .rotational import (
    AlphaTrajectory,
    OdeError,
    ProfileCurve,
    ProfileState,
    build_rotational_chart,
    first_integral_residual,
    integrate_alpha,
    profile_curve,
    warped_curvature_check,
)

__version__ = "0.1.0"
