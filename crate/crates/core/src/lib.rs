//! Convolution calculus on the half line, convoluted cosine propagators for
//! diagonal generators, their sharp extension and the induced functional
//! calculus.
//!
//! Runnable examples live in `crates/core/examples/`:
//!
//! - `convolution_calculus`: the products ∗, ∘, ∗_c and their identities
//! - `kernel_zoo`: j_α, χ_(0,1), stable densities K_δ and subordination
//! - `weyl_roundtrip`: Weyl-type inverses of co-convolution
//! - `duhamel_residual`: convoluted cosine families and their defect
//! - `sharp_extension`: prolonging a local family beyond its interval
//! - `functional_calculus`: the multiplicative map on test functions
//! - `blowup_scenarios`: closed-form growth thresholds in log space

pub mod error;
pub mod extend;
pub mod grid;
pub mod gridfn;
pub mod harness;
pub mod homomorphism;
pub mod kernels;
pub mod propagator;
pub mod weyl;
pub(crate) mod quad;

pub use error::{Error, Result};
pub use extend::{
    extend_full, extend_step, fractional_extend, iterate_doubling, BranchTerm, ExtendOptions,
    ExtensionInput, ExtensionOutput, ExtensionRun,
};
pub use grid::Grid;
pub use homomorphism::CalculusContext;
pub use gridfn::{
    antiderivative, convolution_power, convolve, convolve_direct, cosine_convolve, derivative,
    dual_convolve, integrate_product, laplace_transform, second_antiderivative, Anchored,
    GridFunction, PowerTerm, QuadratureRule,
};
pub use kernels::{stable_density, subordinate, Kernel};
pub use num_complex::Complex64;
pub use propagator::{
    base_cosine, convolve_family, duhamel_residual, duhamel_residuals, family_log_norm, family_norm,
    DiagonalGenerator, PropagatorTable,
};
pub use weyl::{roundtrip_check, t_prime, Jet, TestFunction, WeylOperator};
pub use quad::j_alpha;
