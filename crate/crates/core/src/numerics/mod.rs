//! Numerical kernels shared by the statistical modules.

pub mod fit;
pub mod quad;
pub mod special;

pub use fit::{linear_fit, LinearFit};
pub use quad::{gauss_legendre, integrate, QuadConfig, QuadResult};
pub use special::{norm_cdf, norm_pdf, norm_quantile, norm_sf, sine_integral};
