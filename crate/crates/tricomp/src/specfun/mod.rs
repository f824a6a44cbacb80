//! Self-contained special-function and structured-linear-algebra kernels.

pub mod gamma;
pub mod hyp;
pub mod toeplitz;

pub use gamma::{erfc, gamma_family, gamma_fn, lgamma, regularized_p, regularized_p_inv, regularized_q, GammaFamily};
pub use hyp::{hyp_2f1, hyp_pfq};
pub use toeplitz::{first_column_sum, ltt_exp, ltt_exp_reduced, toeplitz_mul, ToeplitzFirstColumn};
