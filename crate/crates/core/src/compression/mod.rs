//! Greedy unitary compression.
//!
//! Each iteration finds the single-particle rotation `u = e^κ` that puts the
//! most weight of the remainder `R` on charge-charge terms,
//! `O(κ) = Σ_{xy} |R̃_{xxyy}|²`, stores that diagonal as a factor, and
//! subtracts it. Gradients cost `O(n^5)` per evaluation.

pub mod bfgs;
pub mod greedy;
pub mod kappa;
pub mod objective;
pub mod wilcox;

pub use greedy::{
    greedy_compress, Compression, CompressionConfig, CompressionReport, InitMode, IterationReport,
    StopReason,
};
pub use kappa::{Direction, KappaParams, ParamSpace};
pub use objective::{
    gradient, objective, reference_gradient, transform_tensor, value_and_gradient,
};
pub use wilcox::{wilcox_derivative, KappaSpectrum, RotationDerivative};
