//! Sum-of-squares factorization of two-body fermion operators.
//!
//! A two-body generator `G = Σ A_{pqrs} a†_p a†_q a_s a_r` is rewritten in
//! charge-charge form and decomposed as `G = Σ_l F_l − S`, where each
//! `F_l = Σ_{xy} J_{xy}(l) ñ_x ñ_y` is a charge-charge interaction in a
//! rotated single-particle basis and `S` is a one-body correction. Three
//! routes produce the factors:
//!
//! * [`decompositions::takagi_sos`] and [`decompositions::svd_sos`], the
//!   analytical rank-one constructions;
//! * [`compression::greedy_compress`], the greedy orbital-rotation fit whose
//!   per-iteration cost is `O(n^5)`;
//! * [`eri::compress_eri`] and [`eri::cholesky_baseline`] for real
//!   two-electron integrals.
//!
//! Every identity is checked against a dense Jordan–Wigner realization in
//! [`fock`], and factor lists compile to a layered circuit description in
//! [`circuit`].

pub mod circuit;
pub mod compression;
pub mod decompositions;
pub mod eri;
pub mod error;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod par;
pub mod spin;
pub mod tensor;

pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
