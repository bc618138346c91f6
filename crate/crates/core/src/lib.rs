//! Normalized Hecke eigenvalues of level-one eigenforms averaged over the
//! values of the quaternary triangular-number polynomial
//! α(x) = T(x₁) + T(x₂) + 2T(x₃) + 4T(x₄), T(x) = x(x+1)/2.
//!
//! The crate builds the arithmetic tables, exact eigenform coefficients and
//! representation numbers involved, evaluates the Euler products behind the
//! square-free power moments S_r(X), and fits the moments' growth.

pub mod arith;
pub mod dirichlet;
pub mod eigenform;
pub mod error;
pub mod lattice;
pub mod moments;
pub mod ntt;
pub mod satake;
pub mod summation;

pub use arith::{chi8, MultiplicativeTables};
pub use dirichlet::{
    constant_c, euler_value, local_l_r, local_r_r, local_u_r, sym2_edge_value, ConstantReport,
    EulerValue, LocalFactor, SeriesKind,
};
pub use eigenform::{
    delta_coefficients, eigenform_coefficients, eigenform_coefficients_with, eta3_series,
    CoefficientMethod, EigenformTable,
};
pub use error::{Budget, Error, Result};
pub use lattice::{
    enumerate_values, poly_value, rep_counts, verify_rep_identity, PolynomialKind, RepIdentityOutcome,
    RepTable,
};
pub use moments::{
    fit_main_term, growth_exponent, moment_series_lattice, moment_series_sieve, moment_sum_lattice,
    moment_sum_sieve, predicted_exponents, CheckpointSchedule, Method, MomentSeries,
};
pub use satake::{power_decomposition, sym_lambda_p, SatakeLocal};
