//! Multidimensional Laurent series of holomorphic functions on Reinhardt
//! domains.
//!
//! The crate is organised bottom-up:
//!
//! - [`multiindex`]: multi-indices in `Z^n`, boxes `Q_N` and the shell
//!   enumeration `σ : N → Z^n`.
//! - [`geometry`]: polyannuli, Reinhardt shadows, sampling grids and finite
//!   rational polyannulus covers of the built-in domains.
//! - [`testfns`]: holomorphic test functions with exact derivatives and
//!   closed-form Laurent coefficients.
//! - [`coefficients`]: Laurent coefficients on tori via the discrete Cauchy
//!   formula, with empirical aliasing control.
//! - [`seminorms`]: `C^k` and box seminorms, sampled for general functions
//!   and exact for monomial terms.
//! - [`series`]: partial sums, tail profiles, rearrangement and
//!   net-of-partial-sums certificates.
//! - [`bounds`]: the `μ_ℓ` factors, coefficient bounds and global
//!   summability of the bounding constants.

pub mod bounds;
pub mod coefficients;
pub mod error;
pub mod geometry;
pub mod multiindex;
pub mod seminorms;
pub mod series;
pub mod testfns;

pub use error::{Error, Result};
pub use multiindex::MultiIndex;
pub use num_complex::Complex64;
