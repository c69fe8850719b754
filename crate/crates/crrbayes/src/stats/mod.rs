//! Distribution primitives: exact and sampled quantities for the normal,
//! truncated normal, Beta, and Inverse-Gamma families.
//!
//! This is the numerical bedrock the calibration and propagation layers are
//! built on. Scope is deliberately narrow — only the families the model
//! needs — with the effort spent on tail-stable evaluation (see
//! [`special`] and [`truncnorm`]) rather than breadth.

pub mod samplers;
pub mod special;
pub mod truncnorm;

pub use samplers::{sample_beta, sample_inverse_gamma};
pub use special::{normal_cdf, std_normal_cdf, std_normal_inv_cdf, std_normal_pdf, std_normal_sf};
pub use truncnorm::{
    truncnorm_mean_d, truncnorm_mean_u, truncnorm_pdf, truncnorm_sample, TruncatedMoments,
    TruncatedNormal,
};
