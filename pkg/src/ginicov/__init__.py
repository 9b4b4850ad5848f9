"""Gini covariance matrices, robust scatter M-estimators, elliptical samplers,
influence analysis, and Monte Carlo efficiency experiments."""

__version__ = "0.1.0"

from .core import (
    DegenerateSampleError,
    DimensionMismatchError,
    EmptySampleError,
    EstimatorConfig,
    GiniCovError,
    MomentUndefinedError,
    NonFiniteError,
    Sample,
    ScatterMatrix,
    ShapeMatrix,
    SingularMatrixError,
    TooFewObservationsError,
    ZeroTraceError,
    as_matrix,
    as_sample,
    frobenius,
    inv_sqrt,
    sym_eigen,
)
from .elliptical import (
    EllipticalSpec,
    MonteCarloValue,
    c_first,
    c_pairwise,
    draw,
    mean_squared_radius,
    normal_pairwise_constant,
    radial_pdf,
    radial_ppf,
    spec_from_json,
    spec_to_json,
    tau_regular,
)
from .influence import (
    AlphaBeta,
    AREReport,
    AreRow,
    AsvEstimate,
    IFCurve,
    TrGiniAsv,
    alpha_beta_cov,
    alpha_beta_kotz,
    alpha_beta_trgini,
    alpha_beta_tyler,
    are_table,
    asv_offdiag,
    asv_trgini_components,
    empirical_if,
    if_curve,
    if_gcm,
)
from .m_estimators import (
    FixedPointReport,
    duembgen,
    fixed_point_solve,
    kotz_m,
    tr_gini,
    tyler_m,
)
from .scales import mad, mrcm, qn, sample_covariance, to_shape
from .simulate import (
    EfficiencyReport,
    EstimatorEfficiency,
    SimScenario,
    estimate_scatter,
    finite_sample_re,
    mse_offdiag,
    run_table2,
)
from .spatial import (
    gini_mean_difference,
    multivariate_gmd,
    rank_matrix,
    sample_gcm,
    sample_rcm,
    sample_sscm,
    spatial_rank,
    spatial_sign,
)

__all__ = [name for name in dir() if not name.startswith("_")]
