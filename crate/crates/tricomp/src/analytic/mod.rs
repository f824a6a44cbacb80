//! Closed-form and semi-analytic performance formulas: moment matching of
//! the coherent amplitude sum, the structural distributions of the geometry,
//! Laplace transforms of the interference field, threshold coverage, ergodic
//! spectral efficiency, and the cross-model comparison engine.

pub mod coverage;
pub mod distributions;
pub mod laplace;
pub mod moments;
pub mod pv;
pub mod se;

pub use coverage::{
    coverage, coverage_alzer_bound, coverage_closed_form_m1, coverage_value, v_factor,
    CoverageResult,
};
pub use distributions::{
    amp_pdf, ccdf_u, distance_pdf, levy_cdf, levy_pdf, mean_max_of_three, pdf_u, sum_pdf,
    SumPdfMode,
};
pub use laplace::{
    jt_column, laplace_interference, ops_term_column, pv_kernel_column, rps_column,
    theta_column, theta_column_kernel, toeplitz_coverage_column, AffineColumn,
};
pub use moments::{moment_match, nakagami_moment, sum_moment};
pub use pv::{pv_dyn3_se_comparison, PvSeComparison};
pub use se::{hamdi_w, spectral_efficiency, SeMethod};
