//! Nelson-Siegel and extended Nelson-Siegel curve families.

mod basis;
mod lsq;
mod nelson_siegel;

pub use basis::{
    default_tau_grid, differentiate_in_basis, eval_curve, rates_collide, tau_grid, BasisFunction,
    CurveInBasis, FactorBasis, DEFAULT_TAU_MAX, DEFAULT_TAU_POINTS, MAX_CONDITION,
    RATE_COLLISION_RTOL,
};
pub use lsq::{condition_number, fit_function, fit_in_basis, fit_in_basis_l2, LeastSquaresFit};
pub use nelson_siegel::{
    default_lambda_grid, eval_ns, fit_ns, ns_as_curve, NelsonSiegelFit, NelsonSiegelParams,
};
