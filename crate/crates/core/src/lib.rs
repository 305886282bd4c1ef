//! Hermitian fractional Brownian motion toolkit: exact fBm sampling, the
//! matrix path and its product Levy areas, corrected Riemann-sum rough
//! integrals, and exact pairing/genus moment engines for cross-checking
//! Monte-Carlo runs.

pub mod algebra;
pub mod error;
pub mod fbm;
pub mod moments;
pub mod pairing;

pub use algebra::{matrix_powers, MatrixD, NCPolynomial, Tensor2, Tensor2Sum, Tensor3};
pub use error::{Error, Result};
pub use fbm::{
    cholesky_with_ridge, fbm_covariance, gram_matrix, sample_fbm, DyadicGrid, HurstIndex,
    ScalarPath, MAX_GRID_LEVEL,
};
pub use moments::{
    genus_expansion_moment, genus_g_functional, nc_moment, riemann_integrand_moment, Letter,
    MomentDim, MomentQuery,
};
pub use pairing::{
    catalan, double_factorial_count, enumerate_pairings, for_each_pairing, indicator_sum_check,
    Pairing, Permutation,
};
