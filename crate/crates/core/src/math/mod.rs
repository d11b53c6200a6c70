//! Scalar probability kernels used throughout the crate.

pub mod bivariate;
pub mod normal;
pub mod quad;
pub mod roots;
pub mod student_t;

pub use bivariate::{binorm_cdf, binorm_cdf_d2, binorm_cdf_d3, binorm_pdf};
pub use normal::{norm_cdf, norm_inv_cdf, norm_pdf};
pub use roots::{expand_bracket, find_root_monotone};
pub use student_t::{
    scaled_t_cdf, scaled_t_inv, scaled_t_sample, student_t_cdf, student_t_inv, ScaledStudentT,
};
